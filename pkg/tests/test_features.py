import pytest
from hypothesis import given, strategies as st

from musener.corpus import TaggedTweet, Token, tokenize, tweet_from_text
from musener.features import (BOS, EOS, GAZETTEER_NAMES, SLOT_NAMES, extract_features,
                              fallback_pos_chunk, fill_pos_chunk, gazetteer_contains,
                              load_gazetteer, make_gazetteer, tweet_features)

from cases import BEETHOVEN_TEXT


def test_load_keys(tmp_path):
    path = tmp_path / "key.txt"
    path.write_text("\n".join("C D E F G A B flat sharp".split()) + "\n", encoding="utf-8")
    gaz = load_gazetteer("key", path)
    assert len(gaz) == 9
    assert gazetteer_contains(gaz, "A")
    assert gazetteer_contains(gaz, "Flat")


def test_load_modes_and_dedup(tmp_path):
    path = tmp_path / "mode.txt"
    path.write_text("# modes\nmajor\nminor\nm\nMajor\n\n", encoding="utf-8")
    assert len(load_gazetteer("mode", path)) == 3
    assert len(make_gazetteer("opus", ["op", "op"])) == 1


def test_gazetteer_errors(tmp_path):
    with pytest.raises(ValueError, match="unknown gazetteer"):
        make_gazetteer("composers", ["bach"])
    with pytest.raises(OSError):
        load_gazetteer("key", tmp_path / "missing.txt")


def test_opus_forms(gazetteers):
    assert gazetteer_contains(gazetteers["opus"], "Op.")
    assert not gazetteer_contains(gazetteers["opus"], "sonata")
    assert gazetteer_contains(gazetteers["key"], "A")


def test_bundled_entries_are_normalized(gazetteers):
    from musener.corpus import normalize_token
    for gaz in gazetteers.values():
        assert gaz.entries
        assert all(normalize_token(e) == e for e in gaz.entries)


@pytest.mark.parametrize("surface, tags", [
    ("101", ("CD", "B-NP")),
    ("Beethoven", ("NNP", "B-NP")),
    ("quickly", ("RB", "O")),
    ("playing", ("VBG", "O")),
    ("the", ("DT", "O")),
    ("sonata", ("NN", "B-NP")),
    ("??", (".", "O")),
])
def test_fallback_pos_chunk(surface, tags):
    assert fallback_pos_chunk([surface]) == [tags]


def test_fill_pos_chunk_keeps_existing_columns():
    tweet = TaggedTweet("x", None, [Token("Bach", "NN", "I-NP"), Token("rocks")])
    filled = fill_pos_chunk(tweet)
    assert filled.tokens[0] == Token("Bach", "NN", "I-NP")
    assert filled.tokens[1].pos == "NNS"


def beethoven():
    return fill_pos_chunk(tweet_from_text(BEETHOVEN_TEXT))


def as_dict(vector):
    return dict(f.split("=", 1) for f in vector)


def test_first_token(gazetteers):
    f = as_dict(extract_features(beethoven(), 0, gazetteers))
    assert f["position"] == "0.0"
    assert f["cap"] == "1"
    assert f["digit"] == "0"
    assert f["gaz.lastname"] == "1"
    assert f["w[-1]"] == f["w[-2]"] == BOS
    assert f["pos[-1]"] == f["chunk[-2]"] == BOS
    assert f["w[+1]"] == "is" and f["w[+2]"] == "there"


def test_last_token(gazetteers):
    vec = extract_features(beethoven(), 9, gazetteers)
    f = as_dict(vec)
    assert vec.position == 1.0
    assert f["position"] == "1.0"
    assert f["digit"] == "1"
    assert f["w[-1]"] == "op."
    assert f["w[+1]"] == f["w[+2]"] == EOS


def test_single_token(gazetteers):
    vec = extract_features(fill_pos_chunk(tweet_from_text("Mahler")), 0, gazetteers)
    f = as_dict(vec)
    assert vec.position == 0.0
    for k in ("-2", "-1"):
        assert f[f"w[{k}]"] == f[f"pos[{k}]"] == f[f"chunk[{k}]"] == BOS
    for k in ("+1", "+2"):
        assert f[f"w[{k}]"] == f[f"pos[{k}]"] == f[f"chunk[{k}]"] == EOS


def test_extract_errors(gazetteers):
    with pytest.raises(IndexError):
        extract_features(beethoven(), 10, gazetteers)
    partial = {k: v for k, v in gazetteers.items() if k != "mode"}
    with pytest.raises(ValueError, match="mode"):
        extract_features(beethoven(), 0, partial)


def test_slot_layout():
    assert len(SLOT_NAMES) == 26
    assert len(GAZETTEER_NAMES) == 9


words = st.text(alphabet="abcXYZ019.'?", min_size=1, max_size=5)


@given(st.lists(words, min_size=1, max_size=12))
def test_every_token_has_26_slots(gazetteers, tokens):
    text = " ".join(tokens)
    tweet = fill_pos_chunk(tweet_from_text(text))
    vectors = tweet_features(tweet, gazetteers)
    assert len(vectors) == len(tokenize(text))
    for v in vectors:
        assert v.slot_names() == SLOT_NAMES
        assert 0.0 <= v.position <= 1.0
    positions = [v.position for v in vectors]
    assert positions == sorted(set(positions))


@given(st.lists(words, min_size=1, max_size=8), st.data())
def test_gazetteer_flags_ignore_case(gazetteers, tokens, data):
    text = " ".join(tokens)
    swapped = "".join(ch.swapcase() if data.draw(st.booleans()) else ch for ch in text)
    a = tweet_features(fill_pos_chunk(tweet_from_text(text)), gazetteers)
    b = tweet_features(fill_pos_chunk(tweet_from_text(swapped)), gazetteers)
    for va, vb in zip(a, b):
        assert [f for f in va if f.startswith("gaz.")] == [f for f in vb if f.startswith("gaz.")]


def test_extract_is_pure(gazetteers):
    t = beethoven()
    assert tweet_features(t, gazetteers) == tweet_features(t, gazetteers)
