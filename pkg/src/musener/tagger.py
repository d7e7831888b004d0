"""Linear sequence tagger: emission + transition weights, two decoders.

``decode_token`` labels each token independently; ``decode_viterbi`` adds
label-bigram transitions and searches the best whole sequence.  Both are
trained by the same averaged structured perceptron.
"""
from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import LABELS
from .features import fill_pos_chunk, tweet_features

BOS_LABEL = "BOS"
MODEL_HEADER = "musener-model v1"
DECODERS = ("token", "viterbi")


class ModelFormatError(ValueError):
    pass


@dataclass
class LinearModel:
    """Sparse weights; missing keys read as 0.

    ``emission`` maps ``(feature, label)`` and ``transition`` maps
    ``(prev_label_or_BOS, label)`` to a float.
    """
    emission: dict = field(default_factory=dict)
    transition: dict = field(default_factory=dict)
    labels: tuple = LABELS
    version: str = MODEL_HEADER

    def emission_scores(self, vector):
        get = self.emission.get
        return [sum(get((f, lab), 0.0) for f in vector) for lab in self.labels]

    def trans(self, prev, label):
        return self.transition.get((prev, label), 0.0)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    seed: int = 42
    decoder: str = "viterbi"
    shuffle: bool = True
    average: bool = True

    def __post_init__(self):
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ValueError(f"epochs must be a positive integer, got {self.epochs!r}")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")


# ------------------------------------------------------------- decoding

def _argmax(scores):
    # strict '>' keeps the earliest label on ties
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def decode_token(model, vectors):
    return [model.labels[_argmax(model.emission_scores(v))] for v in vectors]


def decode_viterbi(model, vectors):
    n = len(vectors)
    if n == 0:
        return []
    labels = model.labels
    k = len(labels)
    trans = [[model.trans(p, l) for l in labels] for p in labels]
    emit = model.emission_scores(vectors[0])
    delta = [model.trans(BOS_LABEL, labels[j]) + emit[j] for j in range(k)]
    back = []
    for i in range(1, n):
        emit = model.emission_scores(vectors[i])
        row_back = []
        new_delta = []
        for j in range(k):
            cand = [delta[p] + trans[p][j] for p in range(k)]
            p = _argmax(cand)
            row_back.append(p)
            new_delta.append(cand[p] + emit[j])
        back.append(row_back)
        delta = new_delta
    best = _argmax(delta)
    path = [best]
    for row_back in reversed(back):
        best = row_back[best]
        path.append(best)
    path.reverse()
    return [labels[j] for j in path]


def decode(model, vectors, decoder="viterbi"):
    if decoder == "token":
        return decode_token(model, vectors)
    if decoder == "viterbi":
        return decode_viterbi(model, vectors)
    raise ValueError(f"unknown decoder {decoder!r}")


def sequence_score(model, vectors, labels):
    if len(vectors) != len(labels):
        raise ValueError(f"{len(labels)} labels for {len(vectors)} feature vectors")
    score = 0.0
    prev = BOS_LABEL
    for vector, lab in zip(vectors, labels):
        score += model.trans(prev, lab)
        score += sum(model.emission.get((f, lab), 0.0) for f in vector)
        prev = lab
    return score


# ------------------------------------------------------------- training

def _sequence_counts(vectors, labels):
    """Feature counts Phi(x, y) split into emission and transition parts."""
    emit = defaultdict(int)
    trans = defaultdict(int)
    prev = BOS_LABEL
    for vector, lab in zip(vectors, labels):
        trans[(prev, lab)] += 1
        for f in vector:
            emit[(f, lab)] += 1
        prev = lab
    return emit, trans


class _Averager:
    """Weights plus the running sum needed for the averaged perceptron.

    After ``T`` steps the mean of the per-step weight vectors is
    ``w - u / T`` where ``u`` accumulates ``(step - 1) * delta`` for an update
    made at 1-based ``step``.  Both stay integer.
    """

    def __init__(self):
        self.w = defaultdict(int)
        self.u = defaultdict(int)

    def update(self, key, delta, step):
        self.w[key] += delta
        self.u[key] += (step - 1) * delta

    def current(self):
        return {k: float(v) for k, v in self.w.items() if v}

    def averaged(self, steps):
        out = {}
        for k, v in self.w.items():
            avg = v - self.u[k] / steps
            if avg:
                out[k] = avg
        return out


def train(corpus, gazetteers, config=None, log=None):
    """Averaged structured perceptron over labeled tweets."""
    config = config or TrainConfig()
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    data = []
    for tweet in corpus:
        if tweet.labels is None:
            raise ValueError(f"tweet {tweet.id!r} is unlabeled")
        tweet = fill_pos_chunk(tweet)
        data.append((tweet_features(tweet, gazetteers), list(tweet.labels)))

    emit = _Averager()
    trans = _Averager()
    # live integer weights; .get() lookups never insert into the defaultdicts
    model = LinearModel(emit.w, trans.w)
    rng = random.Random(config.seed)
    order = list(range(len(data)))
    step = 1
    for epoch in range(config.epochs):
        if config.shuffle:
            rng.shuffle(order)
        mistakes = 0
        for idx in order:
            vectors, gold = data[idx]
            if vectors:
                pred = decode(model, vectors, config.decoder)
                if pred != gold:
                    mistakes += 1
                    for sign, labels in ((1, gold), (-1, pred)):
                        e, t = _sequence_counts(vectors, labels)
                        for key, cnt in e.items():
                            emit.update(key, sign * cnt, step)
                        for key, cnt in t.items():
                            trans.update(key, sign * cnt, step)
            step += 1
        if log:
            log(f"epoch {epoch + 1}: {mistakes} mistakes over {len(order)} tweets")
        if mistakes == 0 and not config.average:
            break

    if config.average:
        return LinearModel(emit.averaged(step - 1), trans.averaged(step - 1))
    return LinearModel(emit.current(), trans.current())


def tag_tweet(model, tweet, gazetteers, decoder="viterbi"):
    tweet = fill_pos_chunk(tweet)
    return tweet.with_labels(decode(model, tweet_features(tweet, gazetteers), decoder))


# ------------------------------------------------------------------ I/O

def format_model(model):
    lines = [MODEL_HEADER]
    for (feat, lab), w in sorted(model.emission.items()):
        if w:
            lines.append(f"E\t{feat}\t{lab}\t{w!r}")
    for (prev, lab), w in sorted(model.transition.items()):
        if w:
            lines.append(f"T\t{prev}\t{lab}\t{w!r}")
    return "\n".join(lines) + "\n"


def save_model(model, path):
    for w in list(model.emission.values()) + list(model.transition.values()):
        if not math.isfinite(w):
            raise ValueError("cannot save non-finite weights")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_model(model))


def parse_model(lines):
    it = iter(lines)
    header = next(it, "").rstrip("\n")
    if header != MODEL_HEADER:
        raise ModelFormatError(f"unsupported model version {header!r}; expected {MODEL_HEADER!r}")
    emission, transition = {}, {}
    valid = set(LABELS)
    for lineno, line in enumerate(it, 2):
        line = line.rstrip("\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 4 or cols[0] not in ("E", "T"):
            raise ModelFormatError(f"line {lineno}: malformed weight line")
        kind, a, lab, w = cols
        try:
            weight = float(w)
        except ValueError:
            raise ModelFormatError(f"line {lineno}: bad weight {w!r}") from None
        if lab not in valid or (kind == "T" and a not in valid and a != BOS_LABEL):
            raise ModelFormatError(f"line {lineno}: unknown label")
        (emission if kind == "E" else transition)[(a, lab)] = weight
    return LinearModel(emission, transition)


def load_model(path):
    with open(Path(path), encoding="utf-8") as fh:
        return parse_model(fh)
