"""Tokens, IOB corpora, splits and the radio bot schedule.

The IOB file layout is one token per line::

    # id=123 ts=2018-05-01T10:00:00Z
    Beethoven<TAB>NNP<TAB>B-NP<TAB>B-CONTR
    is<TAB>VBZ<TAB>O<TAB>O

with a blank line closing each tweet.  Unlabeled corpora carry ``-`` in
the label column.
"""
from __future__ import annotations

import enum
import json
import math
import random
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Sequence

LABELS = ("O", "B-CONTR", "I-CONTR", "B-WORK", "I-WORK")
UNK = "UNK"
NO_LABEL = "-"


class CorpusFormatError(ValueError):
    """Malformed corpus or schedule input.  ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class BotParseError(ValueError):
    pass


class EntityType(enum.Enum):
    CONTRIBUTOR = "CONTR"
    MUSICAL_WORK = "WORK"

    @property
    def short(self):
        return "C" if self is EntityType.CONTRIBUTOR else "MW"


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str = UNK
    chunk: str = UNK

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if not self.pos or not self.chunk:
            raise ValueError("pos/chunk must be non-empty (use 'UNK')")


@dataclass(frozen=True)
class TaggedTweet:
    id: str | None
    timestamp: int | None
    tokens: tuple[Token, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.tokens):
                raise ValueError(
                    f"{len(self.labels)} labels for {len(self.tokens)} tokens")
            for lab in self.labels:
                if lab not in LABELS:
                    raise ValueError(f"unknown label {lab!r}")

    @property
    def surfaces(self):
        return [t.surface for t in self.tokens]

    def with_labels(self, labels):
        return TaggedTweet(self.id, self.timestamp, self.tokens,
                           None if labels is None else tuple(labels))


@dataclass(frozen=True)
class EntitySpan:
    """Typed half-open token range ``[start, end)``.

    Equality and hashing ignore ``surface``.
    """
    etype: EntityType
    start: int
    end: int
    surface: str = field(default="", compare=False)

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    @property
    def key(self):
        return (self.etype, self.start, self.end)

    def overlaps(self, other):
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class ScheduleEntry:
    timestamp: int
    contributors: tuple[str, ...]
    work: str
    raw: str = ""

    def __post_init__(self):
        object.__setattr__(self, "contributors", tuple(self.contributors))
        if not self.contributors:
            raise ValueError("schedule entry needs at least one contributor")
        if not self.work:
            raise ValueError("schedule entry needs a work title")


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...] = ()
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        if any(a.timestamp > b.timestamp for a, b in zip(entries, entries[1:])):
            raise ValueError("schedule entries must be sorted by timestamp")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


# ---------------------------------------------------------------- tokenizing

# hashtags/mentions | words with internal ' . - joins (plus a trailing period
# on short alphabetic words: "Op.", "no.") | runs of anything else
_TOKEN_RE = re.compile(
    r"""
    [\#@]\w+
  | (?:[^\W\d_]{1,4}\.(?=\s|$))
  | \w+(?:['’.\-]\w+)*
  | [^\w\s]+
    """,
    re.VERBOSE,
)
_EDGE_PUNCT_RE = re.compile(r"^[^\w]+|[^\w]+$")


def tokenize(text):
    """Split ``text`` into surface tokens.

    >>> tokenize("Cavalleria Rusticana...hm..from a Competition")
    ['Cavalleria', 'Rusticana', '...', 'hm', '..', 'from', 'a', 'Competition']
    """
    return _TOKEN_RE.findall(text)


def normalize_token(surface):
    """Lowercase and strip leading/trailing punctuation; may return ''."""
    return _EDGE_PUNCT_RE.sub("", surface.lower())


def normalized_tokens(surfaces):
    """Normalized forms of ``surfaces`` with pure-punctuation tokens dropped."""
    out = []
    for s in surfaces:
        n = normalize_token(s)
        if n:
            out.append(n)
    return out


def tweet_from_text(text, id=None, timestamp=None):
    # POS/chunk left as UNK; features.fill_pos_chunk supplies them later
    return TaggedTweet(id, timestamp, tuple(Token(s) for s in tokenize(text)))


# ------------------------------------------------------------------- time

def parse_timestamp(value):
    """ISO-8601 string (or integer seconds) to integer UTC seconds."""
    if isinstance(value, bool):
        raise ValueError(f"bad timestamp {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    s = str(value).strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(ts):
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ------------------------------------------------------------------ IOB

def _split_label(label):
    if label == "O":
        return "O", None
    prefix, kind = label.split("-", 1)
    return prefix, EntityType(kind)


def spans_from_iob(labels, surfaces=None):
    """Group IOB labels into entity spans.

    An ``I-X`` that does not continue an ``X`` entity opens a new one.
    """
    spans = []
    start = kind = None

    def close(end):
        if kind is not None:
            text = " ".join(surfaces[start:end]) if surfaces is not None else ""
            spans.append(EntitySpan(kind, start, end, text))

    for i, label in enumerate(labels):
        if label not in LABELS:
            raise ValueError(f"unknown label {label!r} at position {i}")
        prefix, etype = _split_label(label)
        if prefix == "O":
            close(i)
            start = kind = None
        elif prefix == "B" or etype is not kind:
            close(i)
            start, kind = i, etype
    close(len(labels))
    return spans


def iob_from_spans(spans, n_tokens):
    labels = ["O"] * n_tokens
    taken = [False] * n_tokens
    for span in spans:
        if span.end > n_tokens:
            raise ValueError(f"span [{span.start}, {span.end}) outside {n_tokens} tokens")
        if any(taken[span.start:span.end]):
            raise ValueError(f"overlapping span [{span.start}, {span.end})")
        kind = span.etype.value
        labels[span.start] = f"B-{kind}"
        for i in range(span.start + 1, span.end):
            labels[i] = f"I-{kind}"
        for i in range(span.start, span.end):
            taken[i] = True
    return labels


def tweet_spans(tweet):
    if tweet.labels is None:
        raise ValueError(f"tweet {tweet.id!r} is unlabeled")
    return spans_from_iob(tweet.labels, tweet.surfaces)


# ------------------------------------------------------------- corpus I/O

def _parse_header(line, lineno):
    fields = {}
    for part in line[1:].split():
        key, sep, value = part.partition("=")
        if not sep or key not in ("id", "ts"):
            raise CorpusFormatError(f"bad header field {part!r}", lineno)
        fields[key] = value
    ts = None
    if "ts" in fields:
        try:
            ts = parse_timestamp(fields["ts"])
        except ValueError as e:
            raise CorpusFormatError(f"bad timestamp {fields['ts']!r}", lineno) from e
    return fields.get("id"), ts


def read_corpus(source):
    """Read an IOB corpus from a path or an open text stream."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_corpus(fh)

    corpus = []
    header = (None, None)
    rows = []
    first_line = None

    def flush():
        nonlocal header, rows, first_line
        if rows:
            labels = [r[3] for r in rows]
            if all(lab == NO_LABEL for lab in labels):
                labels = None
            elif NO_LABEL in labels:
                raise CorpusFormatError("tweet mixes labeled and unlabeled tokens", first_line)
            tokens = tuple(Token(r[0], r[1], r[2]) for r in rows)
            corpus.append(TaggedTweet(header[0], header[1], tokens, labels))
        elif header != (None, None):
            raise CorpusFormatError("header without tokens", first_line)
        header, rows, first_line = (None, None), [], None

    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("# ") or line == "#":
            if rows:
                raise CorpusFormatError("header inside a tweet (missing blank line)", lineno)
            header = _parse_header(line, lineno)
            first_line = lineno
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise CorpusFormatError(f"expected 4 tab-separated columns, got {len(cols)}", lineno)
        if not all(cols):
            raise CorpusFormatError("empty column", lineno)
        if cols[3] not in LABELS and cols[3] != NO_LABEL:
            raise CorpusFormatError(f"unknown label {cols[3]!r}", lineno)
        if first_line is None:
            first_line = lineno
        rows.append(cols)
    flush()
    return corpus


def format_corpus(corpus):
    out = []
    for tweet in corpus:
        head = []
        if tweet.id is not None:
            head.append(f"id={tweet.id}")
        if tweet.timestamp is not None:
            head.append(f"ts={format_timestamp(tweet.timestamp)}")
        if head:
            out.append("# " + " ".join(head) + "\n")
        labels = tweet.labels or [NO_LABEL] * len(tweet.tokens)
        for tok, lab in zip(tweet.tokens, labels):
            out.append(f"{tok.surface}\t{tok.pos}\t{tok.chunk}\t{lab}\n")
        out.append("\n")
    return "".join(out)


def write_corpus(corpus, dest):
    text = format_corpus(corpus)
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


# ---------------------------------------------------------------- splits

def split_corpus(corpus, seed, ratios=(0.8, 0.1, 0.1)):
    """Random tweet-level split into (train, testA, testB).

    Test parts get ``floor(r * N)`` tweets; the remainder goes to train.
    Each part keeps the original corpus order.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot split an empty corpus")
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    n = len(corpus)
    n_a = math.floor(ratios[1] * n + 1e-9)
    n_b = math.floor(ratios[2] * n + 1e-9)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    idx_a = sorted(order[:n_a])
    idx_b = sorted(order[n_a:n_a + n_b])
    idx_train = sorted(order[n_a + n_b:])
    return ([corpus[i] for i in idx_train],
            [corpus[i] for i in idx_a],
            [corpus[i] for i in idx_b])


# ------------------------------------------------------------ bot schedule

_PREFIX_RE = re.compile(r"^\s*now\s+playing\b", re.IGNORECASE)
_HASHTAG_BLOCK_RE = re.compile(r"(?:^|\s)#")


def parse_bot_tweet(text, timestamp):
    """Parse a "Now Playing <names> - <work> #tags" bot message."""
    raw = text
    text = " ".join(text.split())
    m = _PREFIX_RE.match(text)
    if not m:
        raise BotParseError(f"missing 'Now Playing' prefix: {raw!r}")
    body = text[m.end():]
    tags = _HASHTAG_BLOCK_RE.search(body)
    if tags:
        body = body[:tags.start()]
    names, sep, work = (body.rstrip() + " ").rpartition(" - ")
    if not sep:
        raise BotParseError(f"missing ' - ' separator: {raw!r}")
    work = work.strip()
    if not work:
        raise BotParseError(f"empty work title: {raw!r}")
    contributors = [n.strip() for n in names.split(",") if n.strip()]
    if not contributors:
        raise BotParseError(f"no contributors: {raw!r}")
    return ScheduleEntry(int(timestamp), tuple(contributors), work, raw)


def build_schedule(records):
    """Build a time-sorted schedule from ``(timestamp, text)`` pairs.

    Unparseable messages are skipped; ``Schedule.skipped`` counts them.
    """
    entries = []
    skipped = 0
    for ts, text in records:
        try:
            entries.append(parse_bot_tweet(text, ts))
        except BotParseError:
            skipped += 1
    entries.sort(key=lambda e: e.timestamp)  # stable: equal times keep input order
    return Schedule(tuple(entries), skipped)


def read_schedule(source):
    """Read a JSON-lines schedule.

    Records are either raw bot messages ``{"ts", "text"}`` or already parsed
    entries ``{"ts", "contributors", "work"}`` as written by
    :func:`write_schedule`.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_schedule(fh)
    raw_records = []
    parsed = []
    for lineno, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            ts = parse_timestamp(rec["ts"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise CorpusFormatError(f"bad schedule record: {e}", lineno) from e
        if "work" in rec:
            try:
                parsed.append(ScheduleEntry(ts, tuple(rec["contributors"]), rec["work"],
                                            rec.get("raw", "")))
            except (KeyError, TypeError, ValueError) as e:
                raise CorpusFormatError(f"bad schedule entry: {e}", lineno) from e
        elif "text" in rec:
            raw_records.append((ts, rec["text"]))
        else:
            raise CorpusFormatError("record needs 'text' or 'work'", lineno)
    built = build_schedule(raw_records)
    entries = sorted(parsed + list(built.entries), key=lambda e: e.timestamp)
    return Schedule(tuple(entries), built.skipped)


def write_schedule(schedule, dest):
    lines = []
    for e in schedule:
        lines.append(json.dumps({"ts": format_timestamp(e.timestamp),
                                 "contributors": list(e.contributors),
                                 "work": e.work, "raw": e.raw},
                                ensure_ascii=False) + "\n")
    text = "".join(lines)
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


# ---------------------------------------------------------------- stats

@dataclass
class CorpusStats:
    total_tokens: int
    contributor_tokens: int
    work_tokens: int

    @property
    def contributor_pct(self):
        return 100.0 * self.contributor_tokens / self.total_tokens if self.total_tokens else 0.0

    @property
    def work_pct(self):
        return 100.0 * self.work_tokens / self.total_tokens if self.total_tokens else 0.0

    def as_dict(self):
        return {"total_tokens": self.total_tokens,
                "contributor_tokens": self.contributor_tokens,
                "contributor_pct": self.contributor_pct,
                "work_tokens": self.work_tokens,
                "work_pct": self.work_pct}


def corpus_stats(corpus: Iterable[TaggedTweet]) -> CorpusStats:
    total = contr = work = 0
    for tweet in corpus:
        if tweet.labels is None:
            raise ValueError(f"tweet {tweet.id!r} is unlabeled")
        total += len(tweet.labels)
        contr += sum(lab.endswith("CONTR") for lab in tweet.labels)
        work += sum(lab.endswith("WORK") for lab in tweet.labels)
    return CorpusStats(total, contr, work)


def format_stats_table(columns: Sequence[tuple[str, CorpusStats]]) -> str:
    """Aligned text table: one column per corpus, counts with percentages."""
    def cell(count, pct):
        return f"{count} ({pct:.2f}%)"

    header = [""] + [name for name, _ in columns]
    rows = [
        ["Contributor"] + [cell(s.contributor_tokens, s.contributor_pct) for _, s in columns],
        ["Musical Work"] + [cell(s.work_tokens, s.work_pct) for _, s in columns],
        ["Total tokens"] + [str(s.total_tokens) for _, s in columns],
    ]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = []
    for r in [header] + rows:
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                               for i, (c, w) in enumerate(zip(r, widths))).rstrip())
    return "\n".join(lines) + "\n"
