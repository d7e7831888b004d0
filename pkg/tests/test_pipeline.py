import pytest
from hypothesis import given, strategies as st

from musener.corpus import LABELS, EntitySpan, EntityType, iob_from_spans, tweet_from_text
from musener.matcher import MatchConfig
from musener.pipeline import (Counts, EvalReport, evaluate, format_report, format_sweep,
                              reconcile, reconcile_corpus, sweep)

C, MW = EntityType.CONTRIBUTOR, EntityType.MUSICAL_WORK


def labelled(text, spans, **kw):
    t = tweet_from_text(text, **kw)
    return t.with_labels(iob_from_spans(spans, len(t.tokens)))


# ------------------------------------------------------------- reconcile

def test_fallback_to_schedule():
    assert reconcile([], [EntitySpan(MW, 2, 4)]) == [EntitySpan(MW, 2, 4)]
    assert reconcile([], [EntitySpan(MW, 2, 4)], "tweet") == [EntitySpan(MW, 2, 4)]


def test_model_priority():
    model, sched = [EntitySpan(C, 0, 1)], [EntitySpan(C, 3, 4)]
    assert reconcile(model, sched) == model
    assert reconcile(model, sched, "tweet") == model


def test_per_type_keeps_both():
    model, sched = [EntitySpan(C, 0, 1)], [EntitySpan(MW, 2, 4)]
    assert reconcile(model, sched) == [EntitySpan(C, 0, 1), EntitySpan(MW, 2, 4)]
    assert reconcile(model, sched, "tweet") == model


def test_per_type_drops_overlapping_schedule_span():
    model, sched = [EntitySpan(C, 0, 2)], [EntitySpan(MW, 1, 3), EntitySpan(MW, 4, 5)]
    assert reconcile(model, sched) == [EntitySpan(C, 0, 2), EntitySpan(MW, 4, 5)]


def test_reconcile_bad_granularity():
    with pytest.raises(ValueError):
        reconcile([], [], "sentence")


span_lists = st.lists(
    st.tuples(st.sampled_from([C, MW]), st.integers(0, 8), st.integers(1, 3)), max_size=4
).map(lambda xs: _disjoint([EntitySpan(e, s, s + n) for e, s, n in xs]))


def _disjoint(spans):
    kept = []
    for s in spans:
        if not any(s.overlaps(k) for k in kept):
            kept.append(s)
    return sorted(kept, key=lambda s: s.start)


@given(span_lists, span_lists, st.sampled_from(["type", "tweet"]))
def test_reconciled_spans_disjoint(model, sched, granularity):
    out = reconcile(model, sched, granularity)
    for a, b in zip(out, out[1:]):
        assert a.end <= b.start
    assert set(model) <= set(out)


@given(span_lists, span_lists)
def test_model_wins_when_it_covers_every_type(model, sched):
    if {s.etype for s in sched} <= {s.etype for s in model}:
        assert reconcile(model, sched) == model


def test_reconcile_corpus_alignment():
    a = [labelled("Bach is great", [EntitySpan(C, 0, 1)], id="1")]
    b = [labelled("Bach is great", [], id="2")]
    with pytest.raises(ValueError, match="id"):
        reconcile_corpus(a, b)
    with pytest.raises(ValueError, match="tweets"):
        reconcile_corpus(a, a + a)


# ------------------------------------------------------------ evaluation

GOLD = [labelled("Bach and Handel wrote the Messiah", [EntitySpan(C, 0, 1), EntitySpan(C, 2, 3),
                                                        EntitySpan(MW, 5, 6)], id="g1")]


def test_identical_prediction():
    report = evaluate(GOLD, GOLD)
    for e in EntityType:
        assert (report[e].precision, report[e].recall, report[e].f1) == (1.0, 1.0, 1.0)


def test_half_recall():
    pred = [labelled("Bach and Handel wrote the Messiah", [EntitySpan(C, 0, 1),
                                                           EntitySpan(MW, 5, 6)], id="g1")]
    c = evaluate(GOLD, pred)[C]
    assert (c.tp, c.fp, c.fn) == (1, 0, 1)
    assert c.precision == 1.0 and c.recall == 0.5
    assert c.f1 == pytest.approx(2 / 3, abs=1e-4)


def test_wrong_type_is_fp_and_fn():
    gold = [labelled("Bach rocks", [EntitySpan(C, 0, 1)])]
    pred = [labelled("Bach rocks", [EntitySpan(MW, 0, 1)])]
    report = evaluate(gold, pred)
    assert (report[C].tp, report[C].fp, report[C].fn) == (0, 0, 1)
    assert (report[MW].tp, report[MW].fp, report[MW].fn) == (0, 1, 0)
    assert report.overall.f1 == 0.0


def test_partial_overlap_gets_no_credit():
    gold = [labelled("the Cello Suite today", [EntitySpan(MW, 1, 3)])]
    pred = [labelled("the Cello Suite today", [EntitySpan(MW, 0, 3)])]
    mw = evaluate(gold, pred)[MW]
    assert (mw.tp, mw.fp, mw.fn) == (0, 1, 1)


def test_empty_counts_are_zero():
    c = Counts()
    assert (c.precision, c.recall, c.f1) == (0.0, 0.0, 0.0)


def test_evaluate_mismatch():
    other = [labelled("Bach and Handel", [], id="g1")]
    with pytest.raises(ValueError, match="tokens"):
        evaluate(GOLD, other)
    with pytest.raises(ValueError):
        evaluate(GOLD, [])


def test_report_table_and_json_agree():
    report = evaluate(GOLD, GOLD)
    table = format_report(report)
    assert "100.00" in table
    data = report.as_dict()
    assert set(data) == {"C", "MW", "overall"}
    assert data["overall"]["tp"] == 3


labels = st.lists(st.sampled_from(LABELS), min_size=1, max_size=8)


@st.composite
def corpus_pairs(draw):
    gold, pred = [], []
    for i in range(draw(st.integers(1, 4))):
        a = draw(labels)
        b = draw(st.lists(st.sampled_from(LABELS), min_size=len(a), max_size=len(a)))
        text = " ".join(f"w{k}" for k in range(len(a)))
        gold.append(tweet_from_text(text, id=str(i)).with_labels(a))
        pred.append(tweet_from_text(text, id=str(i)).with_labels(b))
    return gold, pred


@given(corpus_pairs())
def test_swap_symmetry(pair):
    gold, pred = pair
    fwd, back = evaluate(gold, pred), evaluate(pred, gold)
    for e in EntityType:
        assert (fwd[e].tp, fwd[e].fp, fwd[e].fn) == (back[e].tp, back[e].fn, back[e].fp)
        assert fwd[e].precision == back[e].recall


@given(corpus_pairs())
def test_f1_between_precision_and_recall(pair):
    report = evaluate(*pair)
    for c in list(report.per_type.values()) + [report.overall]:
        p, r = c.precision, c.recall
        assert 0.0 <= c.f1 <= 1.0
        if p + r:
            assert min(p, r) - 1e-12 <= c.f1 <= max(p, r) + 1e-12


# ----------------------------------------------------------------- sweep

def test_default_grid_has_12_rows(user_test, schedule):
    rows = sweep(user_test, schedule)
    assert len(rows) == 12
    assert [(r.t, r.w, r.c) for r in rows][:3] == [(800, 0.33, 0.33), (800, 0.33, 0.5),
                                                   (800, 0.5, 0.33)]
    table = format_sweep(rows)
    assert len(table.splitlines()) == 13


def test_single_point_grid(user_test, schedule):
    rows = sweep(user_test, schedule, [1200], [0.33], [0.33])
    assert len(rows) == 1
    assert rows[0].report[C].tp == 2 and rows[0].report[MW].tp == 2


def test_sweep_rerun_stable_and_parallel(user_test, schedule):
    a = [r.as_dict() for r in sweep(user_test, schedule)]
    b = [r.as_dict() for r in sweep(user_test, schedule)]
    c = [r.as_dict() for r in sweep(user_test, schedule, jobs=2)]
    assert a == b == c


def test_sweep_errors(user_test, schedule):
    with pytest.raises(ValueError, match="empty"):
        sweep(user_test, schedule, t_list=[])
    with pytest.raises(ValueError):
        sweep(user_test, schedule, w_list=[2.0])


def test_recall_falls_with_thresholds():
    # every entity appears verbatim within the window, but only partly in some tweets
    from musener.corpus import Schedule, ScheduleEntry
    sched = Schedule([ScheduleEntry(0, ("Giovanni Battista Pergolesi",), "Stabat Mater", "x"),
                      ScheduleEntry(500, ("Arvo Part",), "Spiegel im Spiegel", "y")])
    gold = [
        labelled("Pergolesi Stabat Mater", [EntitySpan(C, 0, 1), EntitySpan(MW, 1, 3)],
                 timestamp=100),
        labelled("Arvo Part and Spiegel", [EntitySpan(C, 0, 2), EntitySpan(MW, 3, 4)],
                 timestamp=600),
    ]
    rows = sweep(gold, sched, [1000], [0.0, 0.33, 0.5, 0.75, 1.0], [0.0, 0.33, 0.5, 1.0])
    recall = {(r.w, r.c): r.report.overall.recall for r in rows}
    for (w, c), rec in recall.items():
        for (w2, c2), rec2 in recall.items():
            if w2 >= w and c2 >= c:
                assert rec2 <= rec
    assert recall[(0.0, 0.0)] > recall[(1.0, 1.0)]
