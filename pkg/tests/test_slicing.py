from datetime import date

import numpy as np
import pytest
from scipy import stats as sps

from chaintrend.graph import SnapshotBuilder
from chaintrend.ingest import TransactionRecord
from chaintrend.slicing import (
    IntervalPlan,
    daily_events,
    events_from_snapshot,
    jaccard,
    pearson,
    similarity_price_series,
    slice_events,
)

T0 = 1609459200


def _pairs(*items):
    return frozenset(items)


def test_jaccard_identical_nonempty():
    s = _pairs((1, 2), (2, 3))
    assert jaccard(s, s) == 1.0


def test_jaccard_disjoint():
    assert jaccard(_pairs((1, 2)), _pairs((3, 4))) == 0.0


def test_jaccard_partial_overlap():
    a = _pairs((1, 2), (2, 3))
    b = _pairs((2, 3), (3, 4))
    assert jaccard(a, b) == pytest.approx(1 / 3)


def test_jaccard_both_empty_is_one():
    assert jaccard(frozenset(), frozenset()) == 1.0


def test_jaccard_symmetric_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = frozenset(map(int, rng.integers(0, 30, size=rng.integers(0, 15))))
        b = frozenset(map(int, rng.integers(0, 30, size=rng.integers(0, 15))))
        jab = jaccard(a, b)
        assert jab == jaccard(b, a)
        assert 0.0 <= jab <= 1.0
    assert jaccard(_pairs((5, 6)), _pairs((5, 6))) == 1.0


def test_stationary_stream_yields_uniform_min_length_intervals():
    s = _pairs((1, 2), (3, 4), (5, 6))
    plan = slice_events([s] * 35, min_days=7, max_days=28)
    assert plan.boundaries == (0, 7, 14, 21, 28, 35)
    assert plan.lengths() == [7] * 5
    assert plan.similarity_scores == (1.0,) * 4


def test_insufficient_data_raises():
    with pytest.raises(ValueError):
        slice_events([_pairs((1, 2))] * 13, min_days=7, max_days=28)


def test_trailing_stub_has_no_score():
    s = _pairs((1, 2))
    plan = slice_events([s] * 17, min_days=7, max_days=28)
    assert plan.boundaries == (0, 7, 14, 17)
    assert len(plan.similarity_scores) == 1


def _regime_stream(rng, switch_day=30, n_days=60, pool=3000, keep=0.04):
    # sparse daily samples of a persistent pool keep the union growing, so
    # within-regime similarity rises with candidate length until the switch
    base = np.arange(pool)
    out = []
    for d in range(n_days):
        src = base if d < switch_day else base + pool
        take = src[rng.random(pool) < keep]
        out.append(frozenset((int(x), int(x) + 10**6) for x in take))
    return out


def test_regime_switch_boundary_is_found():
    hits = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        plan = slice_events(_regime_stream(rng), min_days=7, max_days=28)
        if any(abs(b - 30) <= 1 for b in plan.boundaries):
            hits += 1
    assert hits >= 9


def test_boundaries_invariant_under_relabeling():
    rng = np.random.default_rng(42)
    events = _regime_stream(rng)
    ids = sorted({e for s in events for e in s})
    remap = {e: (e[0] + 77777, e[1] + 88888) for e in ids}
    relabeled = [frozenset(remap[e] for e in s) for s in events]
    a = slice_events(events, 7, 28)
    b = slice_events(relabeled, 7, 28)
    assert a.boundaries == b.boundaries
    assert a.similarity_scores == b.similarity_scores


def test_novel_event_injection_lowers_similarity_monotonically():
    base = frozenset((i, i + 100) for i in range(20))
    scores = []
    for k in range(6):
        uid = iter(range(10_000, 99_999))
        events = []
        for _ in range(14):
            novel = frozenset((next(uid), next(uid) + 500_000) for _ in range(k))
            events.append(base | novel)
        plan = slice_events(events, min_days=7, max_days=7)
        scores.append(plan.similarity_scores[0])
    assert all(a > b for a, b in zip(scores, scores[1:]))
    assert scores[0] == 1.0


def test_interval_plan_validation():
    with pytest.raises(ValueError):
        IntervalPlan((0, 7, 7), (1.0,))
    with pytest.raises(ValueError):
        IntervalPlan((0, 7, 14), (1.5,))
    with pytest.raises(ValueError):
        IntervalPlan((0,), ())


def test_pearson_perfect_linear():
    x = np.arange(10.0)
    r, p = pearson(x, 2 * x + 1)
    assert r == 1.0 and p == 0.0
    r, p = pearson(x, -x)
    assert r == -1.0 and p == 0.0


def test_pearson_matches_reference_implementation():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(5, 200))
        x = rng.normal(size=n)
        y = 0.3 * x + rng.normal(size=n)
        r, p = pearson(x, y)
        ref = sps.pearsonr(x, y)
        assert r == pytest.approx(ref.statistic, abs=1e-12)
        assert p == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)


def test_pearson_zero_variance_raises():
    with pytest.raises(ValueError):
        pearson(np.ones(5), np.arange(5.0))


def test_pearson_rejects_short_or_nonfinite():
    with pytest.raises(ValueError):
        pearson([1.0, 2.0], [2.0, 3.0])
    with pytest.raises(ValueError):
        pearson([1.0, np.nan, 3.0], [1.0, 2.0, 3.0])


def test_events_from_snapshot_collapses_direction_and_loops():
    b = SnapshotBuilder()
    txs = [TransactionRecord(T0, "0xaa", "0xbb", 1),
           TransactionRecord(T0 + 1, "0xbb", "0xaa", 1),
           TransactionRecord(T0 + 2, "0xcc", "0xcc", 1)]
    g = b.build_snapshot(txs, date(2021, 1, 1), date(2021, 1, 1))
    ev = events_from_snapshot(g)
    aa, bb = b.interner.intern("0xaa"), b.interner.intern("0xbb")
    assert ev == frozenset({(min(aa, bb), max(aa, bb))})


def test_daily_events_fills_gaps_with_empty_sets():
    b = SnapshotBuilder()
    txs = [TransactionRecord(T0, "0xaa", "0xbb", 1),
           TransactionRecord(T0 + 2 * 86400, "0xbb", "0xcc", 1)]
    days = b.build_daily(txs)
    dates, events = daily_events(days)
    assert [d.isoformat() for d in dates] == ["2021-01-01", "2021-01-02", "2021-01-03"]
    assert events[1] == frozenset()
    assert len(events[0]) == 1 and len(events[2]) == 1


def test_similarity_price_series_alignment():
    plan = IntervalPlan((0, 7, 14, 21), (0.5, 0.25))
    close = np.concatenate([np.full(7, 10.0), np.full(7, 20.0), np.full(7, 30.0)])
    scores, prices = similarity_price_series(plan, close)
    assert scores.tolist() == [0.5, 0.25]
    assert prices.tolist() == [20.0, 30.0]
