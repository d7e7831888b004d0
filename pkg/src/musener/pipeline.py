"""Reconciliation of tagger and schedule output, span-level scoring, sweeps."""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .corpus import EntityType, iob_from_spans, tweet_spans
from .matcher import MatchConfig, match_tweet

GRANULARITIES = ("type", "tweet")
DEFAULT_T = (800, 1000, 1200)
DEFAULT_W = (0.33, 0.5)
DEFAULT_C = (0.33, 0.5)


def reconcile(model_spans, schedule_spans, granularity="type"):
    """Merge two span lists for one tweet, the tagger taking priority.

    ``granularity="tweet"``: schedule spans are used only when the tagger
    found nothing at all.  ``"type"``: the same rule applied separately
    for each entity type, then schedule spans clashing with a tagger span
    are dropped.
    """
    if granularity == "tweet":
        chosen = list(model_spans) if model_spans else list(schedule_spans)
        return sorted(chosen, key=lambda s: (s.start, s.end))
    if granularity != "type":
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")
    kept = list(model_spans)
    model_types = {s.etype for s in model_spans}
    for span in schedule_spans:
        if span.etype in model_types:
            continue
        if any(span.overlaps(k) for k in kept):
            continue
        kept.append(span)
    return sorted(kept, key=lambda s: (s.start, s.end))


def reconcile_corpus(model_corpus, schedule_corpus, granularity="type"):
    model_corpus = list(model_corpus)
    schedule_corpus = list(schedule_corpus)
    _check_aligned(model_corpus, schedule_corpus, "model", "schedule")
    out = []
    for m, s in zip(model_corpus, schedule_corpus):
        spans = reconcile(tweet_spans(m), tweet_spans(s), granularity)
        out.append(m.with_labels(iob_from_spans(spans, len(m.tokens))))
    return out


# ------------------------------------------------------------ evaluation

@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other):
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass
class EvalReport:
    per_type: dict = field(default_factory=lambda: {e: Counts() for e in EntityType})

    @property
    def overall(self):
        total = Counts()
        for c in self.per_type.values():
            total = total + c
        return total

    def __getitem__(self, etype):
        return self.per_type[etype]

    def as_dict(self):
        out = {e.short: self.per_type[e].as_dict() for e in EntityType}
        out["overall"] = self.overall.as_dict()
        return out


def _check_aligned(a, b, name_a="gold", name_b="predicted"):
    if len(a) != len(b):
        raise ValueError(f"{name_a} has {len(a)} tweets but {name_b} has {len(b)}")
    for i, (x, y) in enumerate(zip(a, b)):
        if x.id is not None and y.id is not None and x.id != y.id:
            raise ValueError(f"tweet {i}: id {x.id!r} in {name_a} vs {y.id!r} in {name_b}")
        if len(x.tokens) != len(y.tokens):
            raise ValueError(f"tweet {i}: {len(x.tokens)} vs {len(y.tokens)} tokens")


def score_spans(gold_spans, pred_spans, report):
    """Exact-match counting: type, start and end must all agree."""
    gold = set(gold_spans)
    pred = set(pred_spans)
    for span in pred:
        if span in gold:
            report.per_type[span.etype].tp += 1
        else:
            report.per_type[span.etype].fp += 1
    for span in gold - pred:
        report.per_type[span.etype].fn += 1


def evaluate(gold_corpus, pred_corpus):
    gold_corpus = list(gold_corpus)
    pred_corpus = list(pred_corpus)
    _check_aligned(gold_corpus, pred_corpus)
    report = EvalReport()
    for g, p in zip(gold_corpus, pred_corpus):
        score_spans(tweet_spans(g), tweet_spans(p), report)
    return report


def format_report(report, title=None):
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'type':<8}{'tp':>6}{'fp':>6}{'fn':>6}{'P':>9}{'R':>9}{'F1':>9}")
    rows = [(e.short, report[e]) for e in EntityType] + [("overall", report.overall)]
    for name, c in rows:
        lines.append(f"{name:<8}{c.tp:>6}{c.fp:>6}{c.fn:>6}"
                     f"{100 * c.precision:>9.2f}{100 * c.recall:>9.2f}{100 * c.f1:>9.2f}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- sweep

@dataclass
class SweepRow:
    t: float
    w: float
    c: float
    report: EvalReport

    def as_dict(self):
        return {"t": self.t, "w": self.w, "c": self.c, **self.report.as_dict()}


def _sweep_point(args):
    gold, schedule, t, w, c, alpha, stopwords = args
    config = MatchConfig(t=t, w=w, c=c, alpha=alpha, stopwords=stopwords)
    report = EvalReport()
    for tweet in gold:
        score_spans(tweet_spans(tweet), match_tweet(tweet, schedule, config).spans, report)
    return SweepRow(t, w, c, report)


def sweep(gold_corpus, schedule, t_list=DEFAULT_T, w_list=DEFAULT_W, c_list=DEFAULT_C,
          alpha=0.7, stopwords=None, jobs=1):
    """Schedule matching scored at every (t, w, c) grid point."""
    gold = list(gold_corpus)
    for name, values in (("t", t_list), ("w", w_list), ("c", c_list)):
        if not values:
            raise ValueError(f"empty {name} list")
    if stopwords is None:
        stopwords = MatchConfig().stopwords
    points = [(gold, schedule, t, w, c, alpha, stopwords)
              for t, w, c in itertools.product(t_list, w_list, c_list)]
    for _, _, t, w, c, _, _ in points:
        MatchConfig(t=t, w=w, c=c, alpha=alpha)  # validate before fanning out
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, points))
    return [_sweep_point(p) for p in points]


def format_sweep(rows):
    """One line per (t, w, c) grid point with C and MW columns."""
    head = f"{'t':>6} {'w':>5} {'c':>5}"
    for e in EntityType:
        head += f"  {e.short + ' P':>7}{e.short + ' R':>7}{e.short + ' F1':>7}"
    lines = [head]
    for row in rows:
        line = f"{row.t:>6g} {row.w:>5g} {row.c:>5g}"
        for e in EntityType:
            m = row.report[e]
            line += f"  {100 * m.precision:>7.2f}{100 * m.recall:>7.2f}{100 * m.f1:>7.2f}"
        lines.append(line)
    return "\n".join(lines) + "\n"
