"""Link tweets to recently broadcast tracks.

A tweet is compared with every contributor name and work title of the
tracks played within ``t`` seconds of it.  The string score is the share
of the entity's (non stop word) tokens that also occur in the tweet;
candidates under the per-type threshold are dropped, and the survivors
are projected back onto tweet tokens.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from importlib import resources

from .corpus import (EntitySpan, EntityType, ScheduleEntry, iob_from_spans,
                     normalize_token, normalized_tokens, tokenize)


def load_stopwords(path=None):
    if path is None:
        text = (resources.files("musener") / "data" / "stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(normalize_token(line))
    words.discard("")
    return frozenset(words)


DEFAULT_STOPWORDS = load_stopwords()


@dataclass(frozen=True)
class MatchConfig:
    t: float = 1200
    w: float = 0.5
    c: float = 0.5
    alpha: float = 0.7
    stopwords: frozenset = field(default=DEFAULT_STOPWORDS, repr=False)

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"time window t must be > 0, got {self.t}")
        for name in ("w", "c", "alpha"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def threshold(self, etype):
        return self.c if etype is EntityType.CONTRIBUTOR else self.w


@dataclass(frozen=True)
class Candidate:
    etype: EntityType
    entity_text: str
    entity_tokens: frozenset
    source: ScheduleEntry
    s_string: float
    s_time: float
    s_final: float

    @property
    def key(self):
        """Identity of the candidate independent of its scores."""
        return (self.etype, self.entity_text, self.source.timestamp, self.source.raw,
                self.source.contributors, self.source.work)

    def as_dict(self):
        return {"type": self.etype.short, "entity": self.entity_text,
                "track_ts": self.source.timestamp,
                "s_string": self.s_string, "s_time": self.s_time, "s_final": self.s_final}


def candidate_tracks(schedule, tweet_ts, t):
    """Entries played within ``t`` seconds (either side) of ``tweet_ts``."""
    entries = schedule.entries
    times = [e.timestamp for e in entries]
    lo = bisect.bisect_left(times, tweet_ts - t)
    hi = bisect.bisect_right(times, tweet_ts + t)
    return list(entries[lo:hi])


def entity_token_set(text, stopwords):
    return frozenset(normalized_tokens(tokenize(text))) - stopwords


def string_match_score(entity_tokens, tweet_tokens, stopwords):
    """Fraction of the entity's non stop word tokens found in the tweet."""
    entity = set(entity_tokens) - set(stopwords)
    if not entity:
        return 0.0
    tweet = set(tweet_tokens)
    return len(entity & tweet) / len(entity)


def time_proximity(entry_ts, tweet_ts, t):
    delta = abs(entry_ts - tweet_ts)
    if delta > t:
        raise ValueError(f"track {delta}s away lies outside the {t}s window")
    return 1.0 - delta / t


def project_spans(candidate, tweet_norm, stopwords):
    """Maximal runs of tweet tokens drawn from the candidate's tokens.

    Tokens that are stop words in the candidate text may sit inside a run
    but a run made only of stop words is discarded.
    """
    full = frozenset(normalized_tokens(tokenize(candidate.entity_text)))
    runs = []
    start = None
    for i, norm in enumerate(tweet_norm + [""]):
        if norm and norm in full:
            if start is None:
                start = i
            continue
        if start is not None:
            if any(tok not in stopwords for tok in tweet_norm[start:i]):
                runs.append((start, i))
            start = None
    return runs


def _resolve(scored):
    # higher s_final, then earlier track, then Contributor before Musical Work
    order = sorted(scored, key=lambda item: (
        -item[1].s_final,
        item[1].source.timestamp,
        item[1].etype is not EntityType.CONTRIBUTOR,
        item[0].start,
        item[1].entity_text,
    ))
    kept = []
    for span, cand in order:
        if not any(span.overlaps(k) for k, _ in kept):
            kept.append((span, cand))
    kept.sort(key=lambda item: item[0].start)
    return kept


@dataclass
class MatchResult:
    spans: list
    candidates: list
    chosen: list = field(default_factory=list)

    def diagnostics(self, tweet_id=None):
        return {"id": tweet_id,
                "candidates": [c.as_dict() for c in self.candidates],
                "spans": [{"type": s.etype.short, "start": s.start, "end": s.end,
                           "surface": s.surface, "entity": c.entity_text}
                          for s, c in self.chosen]}


def retained_candidates(tweet, schedule, config):
    """Candidates from in-window tracks that pass the string thresholds."""
    if tweet.timestamp is None:
        raise ValueError(f"tweet {tweet.id!r} has no timestamp")
    tweet_set = set(normalized_tokens(tweet.surfaces))
    out = []
    for entry in candidate_tracks(schedule, tweet.timestamp, config.t):
        names = [(EntityType.CONTRIBUTOR, n) for n in entry.contributors]
        names.append((EntityType.MUSICAL_WORK, entry.work))
        s_time = time_proximity(entry.timestamp, tweet.timestamp, config.t)
        for etype, text in names:
            tokens = entity_token_set(text, config.stopwords)
            s_string = string_match_score(tokens, tweet_set, config.stopwords)
            if not tokens or s_string < config.threshold(etype):
                continue
            s_final = config.alpha * s_string + (1 - config.alpha) * s_time
            out.append(Candidate(etype, text, tokens, entry, s_string, s_time, s_final))
    return out


def match_tweet(tweet, schedule, config):
    candidates = retained_candidates(tweet, schedule, config)
    surfaces = tweet.surfaces
    tweet_norm = [normalize_token(s) for s in surfaces]
    scored = []
    for cand in candidates:
        for start, end in project_spans(cand, tweet_norm, config.stopwords):
            scored.append((EntitySpan(cand.etype, start, end, " ".join(surfaces[start:end])), cand))
    chosen = _resolve(scored)
    return MatchResult([s for s, _ in chosen], candidates, chosen)


def match_corpus(corpus, schedule, config):
    """Label every tweet with the schedule-derived spans."""
    out = []
    for tweet in corpus:
        result = match_tweet(tweet, schedule, config)
        out.append(tweet.with_labels(iob_from_spans(result.spans, len(tweet.tokens))))
    return out
