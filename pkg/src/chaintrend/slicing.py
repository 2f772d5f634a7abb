"""Data-driven time slicing over daily event sets.

An event is an undirected address pair active on a given day. Interval
boundaries are chosen greedily: each next interval takes the length (between
min_days and max_days) whose event set is most similar to the previous
interval's, measured by the Jaccard index. Ties go to the shorter candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import Sequence

import numpy as np
from scipy import stats

from .graph import GraphSnapshot


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    inter = len(a & b)
    union = len(a) + len(b) - inter
    return inter / union


@dataclass(frozen=True)
class IntervalPlan:
    """Fence-post day indices: interval i covers [boundaries[i], boundaries[i+1]).

    similarity_scores[i] is the Jaccard index between intervals i and i+1.
    A trailing stub shorter than min_days carries no score, so the score list
    can be one short of n_intervals - 1 in that case.
    """

    boundaries: tuple[int, ...]
    similarity_scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.boundaries) < 2:
            raise ValueError("plan needs at least one interval")
        if any(b >= a for a, b in zip(self.boundaries[1:], self.boundaries)):
            raise ValueError("boundaries must be strictly increasing")
        if any(not (0.0 <= s <= 1.0) for s in self.similarity_scores):
            raise ValueError("similarity scores must lie in [0, 1]")
        if not (self.n_intervals - 2 <= len(self.similarity_scores)
                <= self.n_intervals - 1):
            raise ValueError("score count does not match interval count")

    @property
    def n_intervals(self) -> int:
        return len(self.boundaries) - 1

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return list(zip(self.boundaries[:-1], self.boundaries[1:]))

    def lengths(self) -> list[int]:
        return [b - a for a, b in self.intervals]


def slice_events(
    events: Sequence[frozenset],
    min_days: int = 7,
    max_days: int = 28,
) -> IntervalPlan:
    """Greedy forward pass; the first interval is pinned at min_days."""
    if not (1 <= min_days <= max_days):
        raise ValueError("need 1 <= min_days <= max_days")
    n = len(events)
    if n < 2 * min_days:
        raise ValueError(f"need at least {2 * min_days} days of events, got {n}")

    boundaries = [0, min_days]
    scores: list[float] = []
    prev: frozenset = frozenset().union(*events[0:min_days])
    pos = min_days
    while pos < n:
        remaining = n - pos
        if remaining < min_days:
            # forced stub: emit it, no score recorded
            boundaries.append(n)
            break
        best_len = -1
        best_score = -1.0
        best_set: frozenset = frozenset()
        candidate: set = set()
        for length in range(1, min(max_days, remaining) + 1):
            candidate |= events[pos + length - 1]
            if length < min_days:
                continue
            score = jaccard(prev, frozenset(candidate))
            if score > best_score:  # strict: ties keep the shorter length
                best_score = score
                best_len = length
                best_set = frozenset(candidate)
        pos += best_len
        boundaries.append(pos)
        scores.append(best_score)
        prev = best_set
    return IntervalPlan(tuple(boundaries), tuple(scores))


def events_from_snapshot(g: GraphSnapshot) -> frozenset:
    """Undirected address-id pairs with an edge in the snapshot (loops dropped)."""
    keep = g.edge_src != g.edge_dst
    src_g = g.nodes[g.edge_src[keep]]
    dst_g = g.nodes[g.edge_dst[keep]]
    lo = np.minimum(src_g, dst_g)
    hi = np.maximum(src_g, dst_g)
    return frozenset(zip(lo.tolist(), hi.tolist()))


def daily_events(
    snapshots: Sequence[GraphSnapshot],
    start_day: date | None = None,
    end_day: date | None = None,
) -> tuple[list[date], list[frozenset]]:
    """Dense day-indexed event sets; days without a snapshot get an empty set."""
    if not snapshots:
        raise ValueError("no snapshots given")
    by_day = {g.start_day: g for g in snapshots}
    lo = start_day if start_day is not None else min(by_day)
    hi = end_day if end_day is not None else max(by_day)
    days: list[date] = []
    events: list[frozenset] = []
    d = lo
    while d <= hi:
        days.append(d)
        g = by_day.get(d)
        events.append(events_from_snapshot(g) if g is not None else frozenset())
        d += timedelta(days=1)
    return days, events


def pearson(x, y) -> tuple[float, float]:
    """Correlation coefficient with a two-sided p-value (t, n-2 dof)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be 1-d and of equal length")
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 points")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("series must be finite")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined: zero variance")
    r = float((dx * dy).sum() / (sx * sy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stats.t.sf(abs(t), n - 2))
    return r, p


def similarity_price_series(
    plan: IntervalPlan,
    close_by_day: Sequence[float],
) -> tuple[np.ndarray, np.ndarray]:
    """Pairs each adjacent-interval score with the mean close of the newer
    interval, ready for correlation."""
    close = np.asarray(close_by_day, dtype=np.float64)
    if close.size < plan.boundaries[-1]:
        raise ValueError("price series shorter than the sliced range")
    means = np.array([close[a:b].mean() for a, b in plan.intervals])
    k = len(plan.similarity_scores)
    return np.asarray(plan.similarity_scores, dtype=np.float64), means[1:k + 1]
