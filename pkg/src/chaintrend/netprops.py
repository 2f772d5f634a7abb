"""Per-snapshot network-property features.

All kernels are pure; undefined values (zero variance, too few distinct
degrees, ...) come back as NaN and are imputed downstream.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import GraphSnapshot, UndirectedView, degree_sequences, undirected_view
from .louvain import louvain_communities, modularity_of_partition

PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-9
# L1 delta contracts by the damping factor per step, so reaching
# 2 * 0.85^k < 1e-9 needs k >= 132; 200 covers every graph
PAGERANK_MAX_ITER = 200


@dataclass(frozen=True)
class NetworkFeatures:
    n_nodes: int
    n_edges: int
    degree_mean: float
    degree_std: float
    neighbor_degree_mean: float
    degree_slope: float
    active_ratio: float
    assortativity: float
    avg_clustering: float
    modularity: float
    n_communities: int
    reciprocity: float
    pagerank_mean: float
    pagerank_std: float
    lcc_fraction: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


def assortativity(g: GraphSnapshot, und: UndirectedView | None = None) -> float:
    """Pearson correlation of endpoint degrees over undirected edges,
    both orientations counted. NaN when the degree variance at edge
    ends vanishes (regular graphs)."""
    if und is None:
        und = undirected_view(g)
    if und.n_edges < 2:
        return float("nan")
    deg = und.degrees.astype(np.float64)
    x = np.concatenate([deg[und.src], deg[und.dst]])
    y = np.concatenate([deg[und.dst], deg[und.src]])
    dx = x - x.mean()
    dy = y - y.mean()
    denom = np.sqrt((dx * dx).sum() * (dy * dy).sum())
    if denom == 0.0:
        return float("nan")
    return float(np.clip((dx * dy).sum() / denom, -1.0, 1.0))


def triangle_counts(und: UndirectedView) -> np.ndarray:
    """Triangles through each node, via degree-ordered edge orientation."""
    n = und.n_nodes
    tri = np.zeros(n, dtype=np.int64)
    if und.n_edges == 0:
        return tri
    deg = und.degrees
    rank = np.lexsort((np.arange(n), deg))      # position -> node
    rank_of = np.empty(n, dtype=np.int64)
    rank_of[rank] = np.arange(n)
    a, b = und.src, und.dst
    fwd = rank_of[a] < rank_of[b]
    lo = np.where(fwd, a, b)                    # low rank -> high rank
    hi = np.where(fwd, b, a)
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, lo + 1, 1)
    np.cumsum(indptr, out=indptr)
    out = hi
    for u, v in zip(lo.tolist(), hi.tolist()):
        nu = out[indptr[u]:indptr[u + 1]]
        nv = out[indptr[v]:indptr[v + 1]]
        common = np.intersect1d(nu, nv, assume_unique=True)
        if common.size:
            tri[u] += common.size
            tri[v] += common.size
            np.add.at(tri, common, 1)
    return tri


def avg_clustering(g: GraphSnapshot, und: UndirectedView | None = None) -> float:
    """Mean local clustering 2*T_i / (k_i*(k_i-1)); degree < 2 counts as 0."""
    if und is None:
        und = undirected_view(g)
    n = und.n_nodes
    if n == 0:
        return 0.0
    deg = und.degrees.astype(np.float64)
    tri = triangle_counts(und).astype(np.float64)
    ok = deg >= 2
    c = np.zeros(n, dtype=np.float64)
    c[ok] = 2.0 * tri[ok] / (deg[ok] * (deg[ok] - 1.0))
    return float(c.mean())


def reciprocity(g: GraphSnapshot) -> float:
    m = g.n_edges
    if m == 0:
        return float("nan")
    n = g.n_nodes
    keys = g.edge_src.astype(np.int64) * n + g.edge_dst
    rev = g.edge_dst.astype(np.int64) * n + g.edge_src
    keys_sorted = np.sort(keys)
    pos = np.searchsorted(keys_sorted, rev)
    pos = np.minimum(pos, keys_sorted.size - 1)
    hit = keys_sorted[pos] == rev
    return float(hit.sum() / m)


def pagerank_stats(
    g: GraphSnapshot,
    damping: float = PAGERANK_DAMPING,
    tol: float = PAGERANK_TOL,
    max_iter: int = PAGERANK_MAX_ITER,
) -> tuple[float, float, np.ndarray, bool]:
    """(mean, std, scores, converged) by power iteration. Each distinct
    out-link carries weight 1/out_count; dangling mass spreads uniformly."""
    n = g.n_nodes
    if n == 0:
        raise ValueError("pagerank needs at least one node")
    outdeg = np.bincount(g.edge_src, minlength=n).astype(np.float64)
    dangling = outdeg == 0.0
    inv_out = np.zeros(n, dtype=np.float64)
    inv_out[~dangling] = 1.0 / outdeg[~dangling]
    mat = sp.csr_matrix(
        (inv_out[g.edge_src], (g.edge_dst, g.edge_src)), shape=(n, n)
    )
    x = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    converged = False
    for _ in range(max_iter):
        dangling_mass = float(x[dangling].sum())
        x_new = damping * (mat @ x + dangling_mass / n) + base
        if float(np.abs(x_new - x).sum()) < tol:
            x = x_new
            converged = True
            break
        x = x_new
    return float(x.mean()), float(x.std()), x, converged


def lcc_fraction(g: GraphSnapshot, und: UndirectedView | None = None) -> float:
    n = g.n_nodes
    if n == 0:
        return float("nan")
    if und is None:
        und = undirected_view(g)
    if und.n_edges == 0:
        return 1.0 / n
    adj = sp.csr_matrix(
        (np.ones(und.n_edges), (und.src, und.dst)), shape=(n, n)
    )
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    return float(sizes.max() / n)


def degree_slope_from_degrees(
    degrees: np.ndarray, n_points: int = 16, min_support: int = 10
) -> float:
    """Least-squares slope of log CCDF against log degree, with the CCDF
    sampled at log-spaced degree values. Points backed by fewer than
    min_support observations are dropped and the fit is weighted by the
    inverse delta-method variance of log CCDF, which tames tail noise.
    NaN below 3 distinct degrees."""
    k = np.asarray(degrees, dtype=np.float64)
    k = k[k >= 1]
    if np.unique(k).size < 3:
        return float("nan")
    kmin, kmax = k.min(), k.max()
    pts = np.unique(np.geomspace(kmin, kmax, n_points))
    k_sorted = np.sort(k)
    # P(K >= x) via position of x in the sorted degree list
    ccdf = 1.0 - np.searchsorted(k_sorted, pts, side="left") / k.size
    ok = ccdf >= min(min_support / k.size, 1.0)
    if ok.sum() < 3:
        ok = ccdf > 0
        if ok.sum() < 3:
            return float("nan")
    c = ccdf[ok]
    weights = np.sqrt(k.size * c / np.maximum(1.0 - c, 1.0 / k.size))
    slope = np.polyfit(np.log(pts[ok]), np.log(c), 1, w=weights)[0]
    return float(slope)


def degree_slope(g: GraphSnapshot) -> float:
    _, _, total = degree_sequences(g)
    return degree_slope_from_degrees(total)


def active_ratio(g: GraphSnapshot) -> float:
    if g.cumulative_address_count <= 0:
        raise ValueError("cumulative address count must be positive")
    return g.n_nodes / g.cumulative_address_count


def degree_stats(
    g: GraphSnapshot, und: UndirectedView | None = None
) -> tuple[float, float, float]:
    """(mean, std, neighbor mean) of total degrees; std is the population
    value; the neighbor mean averages over non-isolated nodes only."""
    n = g.n_nodes
    if n == 0:
        raise ValueError("degree stats need at least one node")
    _, _, total = degree_sequences(g)
    total = total.astype(np.float64)
    if und is None:
        und = undirected_view(g)
    udeg = und.degrees
    active = udeg > 0
    if active.any():
        neigh_sum = np.zeros(n, dtype=np.float64)
        np.add.at(neigh_sum, und.src, total[und.dst])
        np.add.at(neigh_sum, und.dst, total[und.src])
        per_node = neigh_sum[active] / udeg[active]
        neighbor_mean = float(per_node.mean())
    else:
        neighbor_mean = float("nan")
    return float(total.mean()), float(total.std()), neighbor_mean


def snapshot_features(g: GraphSnapshot, seed: int) -> NetworkFeatures:
    und = undirected_view(g)
    d_mean, d_std, nbr_mean = degree_stats(g, und)
    if und.n_edges > 0:
        labels, q, _ = louvain_communities(und, seed)
        n_comm = int(labels.max()) + 1
    else:
        q = float("nan")
        n_comm = g.n_nodes
    pr_mean, pr_std, _, _ = pagerank_stats(g)
    return NetworkFeatures(
        n_nodes=g.n_nodes,
        n_edges=g.n_edges,
        degree_mean=d_mean,
        degree_std=d_std,
        neighbor_degree_mean=nbr_mean,
        degree_slope=degree_slope(g),
        active_ratio=active_ratio(g),
        assortativity=assortativity(g, und),
        avg_clustering=avg_clustering(g, und),
        modularity=q,
        n_communities=n_comm,
        reciprocity=reciprocity(g),
        pagerank_mean=pr_mean,
        pagerank_std=pr_std,
        lcc_fraction=lcc_fraction(g, und),
    )


def _features_job(args):
    g, seed = args
    return snapshot_features(g, seed)


def compute_features(
    snapshots: Sequence[GraphSnapshot],
    seed: int,
    jobs: int = 1,
) -> list[NetworkFeatures]:
    """One feature vector per snapshot; louvain seed is seed + index."""
    tasks = [(g, seed + i) for i, g in enumerate(snapshots)]
    if jobs <= 1 or len(tasks) < 2:
        return [snapshot_features(g, s) for g, s in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_features_job, tasks, chunksize=4))


def features_frame(
    snapshots: Sequence[GraphSnapshot],
    feats: Sequence[NetworkFeatures],
) -> "pd.DataFrame":
    import pandas as pd

    rows = [f.as_row() for f in feats]
    idx = pd.Index([g.start_day for g in snapshots], name="date")
    df = pd.DataFrame(rows, index=idx, columns=NetworkFeatures.field_names())
    return df.astype(np.float64)


def write_features_csv(
    path,
    snapshots: Sequence[GraphSnapshot],
    feats: Sequence[NetworkFeatures],
    header_comment: str | None = None,
) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["start_day", "end_day"] + NetworkFeatures.field_names())
        for g, f in zip(snapshots, feats):
            row = [g.start_day.isoformat(), g.end_day.isoformat()]
            for v in f.as_row():
                row.append(repr(v) if isinstance(v, float) else v)
            w.writerow(row)
