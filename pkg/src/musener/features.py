"""Gazetteers and the 26 per-token features.

Slots, in emission order:

* local (5): ``pos``, ``chunk``, ``position``, ``cap``, ``digit``
* gazetteers (9): ``gaz.<name>`` for each name in :data:`GAZETTEER_NAMES`
* context (12): ``w``, ``pos``, ``chunk`` at offsets -2, -1, +1, +2,
  e.g. ``w[-1]=his``; ``<BOS>``/``<EOS>`` past the tweet edges.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import UNK, TaggedTweet, Token, normalize_token

GAZETTEER_NAMES = (
    "firstname",
    "lastname",
    "contributor_type",
    "work_type",
    "instrument",
    "opus",
    "number",
    "key",
    "mode",
)
CONTEXT_OFFSETS = (-2, -1, 1, 2)
BOS, EOS = "<BOS>", "<EOS>"
GAZETTEER_ENV = "MUSENER_GAZETTEERS"


def _offset(k):
    return f"{k:+d}"


SLOT_NAMES = (
    ("pos", "chunk", "position", "cap", "digit")
    + tuple(f"gaz.{name}" for name in GAZETTEER_NAMES)
    + tuple(f"{kind}[{_offset(k)}]" for kind in ("w", "pos", "chunk") for k in CONTEXT_OFFSETS)
)
assert len(SLOT_NAMES) == 26


@dataclass(frozen=True)
class Gazetteer:
    name: str
    entries: frozenset

    def __contains__(self, surface):
        return normalize_token(surface) in self.entries

    def __len__(self):
        return len(self.entries)


def make_gazetteer(name, words):
    if name not in GAZETTEER_NAMES:
        raise ValueError(f"unknown gazetteer {name!r}; expected one of {GAZETTEER_NAMES}")
    entries = set()
    for line in words:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        # entries are single tokens; multi-word lines contribute each word
        for word in line.split():
            norm = normalize_token(word)
            if norm:
                entries.add(norm)
    return Gazetteer(name, frozenset(entries))


def load_gazetteer(name, path):
    with open(path, encoding="utf-8") as fh:
        return make_gazetteer(name, fh)


def gazetteer_contains(gaz, surface):
    return surface in gaz


def default_gazetteer_dir():
    env = os.environ.get(GAZETTEER_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("musener") / "data" / "gazetteers"))


def load_gazetteers(directory=None):
    """Load all nine ``<name>.txt`` files from ``directory``."""
    directory = Path(directory) if directory is not None else default_gazetteer_dir()
    return {name: load_gazetteer(name, directory / f"{name}.txt") for name in GAZETTEER_NAMES}


# ---------------------------------------------------------- POS fallback

_CLOSED_CLASS = {
    "DT": "the a an this that these those every some no",
    "IN": "in of for on at by with from about into over after before under during than as",
    "CC": "and but or nor yet",
    "PRP": "i you he she it we they me him us them",
    "PRP$": "my your his her its our their",
    "VBZ": "is has does",
    "VBP": "are am have do",
    "VBD": "was were had did",
    "MD": "can could will would should may might must",
    "RB": "not very just only also too so never nearly",
    "TO": "to",
    "WP": "who what",
    "UH": "hm oh wow yes",
}
_CLOSED = {w: tag for tag, words in _CLOSED_CLASS.items() for w in words.split()}

# checked in order; first match wins
_SUFFIX_RULES = (
    ("ly", "RB"),
    ("ing", "VBG"),
    ("ed", "VBD"),
    ("ous", "JJ"),
    ("ful", "JJ"),
    ("ive", "JJ"),
    ("able", "JJ"),
    ("ic", "JJ"),
    ("tion", "NN"),
    ("ness", "NN"),
    ("ment", "NN"),
    ("ss", "NN"),
    ("s", "NNS"),
)
NOMINAL_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS", "CD", "PRP"})


def _fallback_pos(surface):
    if surface.isdigit():
        return "CD"
    if not any(ch.isalnum() for ch in surface):
        return "."
    if surface[0] in "#@":
        return "HT" if surface[0] == "#" else "USR"
    lower = surface.lower()
    if lower in _CLOSED:
        return _CLOSED[lower]
    if surface[0].isupper():
        return "NNP"
    if any(ch.isdigit() for ch in surface):
        return "CD"
    for suffix, tag in _SUFFIX_RULES:
        if len(lower) > len(suffix) + 1 and lower.endswith(suffix):
            return tag
    return "NN"


def fallback_pos_chunk(surfaces):
    """Deterministic heuristic (pos, chunk) tags for a token sequence."""
    out = []
    for s in surfaces:
        pos = _fallback_pos(s)
        out.append((pos, "B-NP" if pos in NOMINAL_TAGS else "O"))
    return out


def fill_pos_chunk(tweet):
    """Replace ``UNK`` POS/chunk columns with the heuristic tags.

    Columns already present in the corpus win.
    """
    if all(t.pos != UNK and t.chunk != UNK for t in tweet.tokens):
        return tweet
    guessed = fallback_pos_chunk(tweet.surfaces)
    tokens = tuple(
        Token(t.surface,
              t.pos if t.pos != UNK else pos,
              t.chunk if t.chunk != UNK else chunk)
        for t, (pos, chunk) in zip(tweet.tokens, guessed)
    )
    return TaggedTweet(tweet.id, tweet.timestamp, tokens, tweet.labels)


# ------------------------------------------------------------- extraction

@dataclass(frozen=True)
class FeatureVector:
    """Active ``name=value`` features of one token.

    ``position`` keeps the exact relative position; its feature string is
    bucketed to one decimal so it generalizes across tweet lengths.
    """
    features: tuple
    position: float

    def slot_names(self):
        return tuple(f.split("=", 1)[0] for f in self.features)

    def __iter__(self):
        return iter(self.features)

    def __len__(self):
        return len(self.features)


def extract_features(tweet: TaggedTweet, index: int, gazetteers) -> FeatureVector:
    tokens = tweet.tokens
    n = len(tokens)
    if not 0 <= index < n:
        raise IndexError(f"token index {index} out of range for {n} tokens")
    missing = [g for g in GAZETTEER_NAMES if g not in gazetteers]
    if missing:
        raise ValueError(f"missing gazetteers: {', '.join(missing)}")

    tok = tokens[index]
    surface = tok.surface
    position = index / (n - 1) if n > 1 else 0.0
    feats = [
        f"pos={tok.pos}",
        f"chunk={tok.chunk}",
        f"position={position:.1f}",
        f"cap={int(surface[:1].isupper())}",
        f"digit={int(surface.isdigit())}",
    ]
    feats += [f"gaz.{name}={int(surface in gazetteers[name])}" for name in GAZETTEER_NAMES]

    def ctx(k):
        j = index + k
        if j < 0:
            return BOS, BOS, BOS
        if j >= n:
            return EOS, EOS, EOS
        t = tokens[j]
        return t.surface.lower(), t.pos, t.chunk

    context = {k: ctx(k) for k in CONTEXT_OFFSETS}
    for slot, kind in enumerate(("w", "pos", "chunk")):
        for k in CONTEXT_OFFSETS:
            feats.append(f"{kind}[{_offset(k)}]={context[k][slot]}")
    return FeatureVector(tuple(feats), position)


def tweet_features(tweet, gazetteers):
    return [extract_features(tweet, i, gazetteers) for i in range(len(tweet.tokens))]
