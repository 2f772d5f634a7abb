"""Community detection by greedy modularity optimization.

Two alternating phases: local node moves while any move improves modularity,
then aggregation of communities into super-nodes. Sweep order is shuffled by
an explicit seed; the per-level modularity trace is non-decreasing.
"""

from __future__ import annotations

import numpy as np

from .graph import UndirectedView

# stop once a full level improves Q by no more than this
GAIN_TOL = 1e-9
# strict-improvement guard for a single node move
_MOVE_EPS = 1e-12


def modularity_of_partition(und: UndirectedView, labels: np.ndarray) -> float:
    """Q = sum_c [ L_c/(2m) - (K_c/(2m))^2 ] with unit edge weights.

    L_c counts ordered intra-community endpoint pairs, so each intra edge
    contributes 2; K_c sums member degrees.
    """
    labels = np.asarray(labels)
    if labels.shape != (und.n_nodes,):
        raise ValueError("labels must assign one community per node")
    m = und.n_edges
    if m == 0:
        raise ValueError("modularity needs at least one edge")
    two_m = 2.0 * m
    n_comm = int(labels.max()) + 1
    intra = labels[und.src] == labels[und.dst]
    l_c = np.bincount(labels[und.src[intra]], minlength=n_comm) * 2.0
    k_c = np.bincount(labels, weights=und.degrees.astype(np.float64),
                      minlength=n_comm)
    return float((l_c / two_m - (k_c / two_m) ** 2).sum())


def _local_phase(n, indptr, indices, weights, k, two_m, order):
    """One level of greedy moves. Returns (labels, moved_any)."""
    comm = list(range(n))
    comm_k = list(k)
    neigh_w = [0.0] * n
    touched: list[int] = []
    ptr = indptr.tolist()
    idx = indices.tolist()
    wts = weights.tolist()
    kl = list(k)
    inv_two_m = 1.0 / two_m
    moved_any = False
    while True:
        moved = 0
        for i in order:
            ci = comm[i]
            ki = kl[i]
            for p in range(ptr[i], ptr[i + 1]):
                j = idx[p]
                if j == i:
                    continue
                cj = comm[j]
                if neigh_w[cj] == 0.0:
                    touched.append(cj)
                neigh_w[cj] += wts[p]
            comm_k[ci] -= ki
            # gain of community c relative to leaving i isolated, times m
            best_c = ci
            best_gain = neigh_w[ci] - comm_k[ci] * ki * inv_two_m
            for c in touched:
                if c == ci:
                    continue
                gain = neigh_w[c] - comm_k[c] * ki * inv_two_m
                if gain > best_gain + _MOVE_EPS:
                    best_gain = gain
                    best_c = c
            comm_k[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                moved += 1
            for c in touched:
                neigh_w[c] = 0.0
            touched.clear()
        if moved == 0:
            break
        moved_any = True
    return np.asarray(comm, dtype=np.int64), moved_any


def _compact(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel to 0..C-1 in order of first appearance."""
    seen: dict[int, int] = {}
    out = np.empty(labels.size, dtype=np.int64)
    nxt = 0
    for i, c in enumerate(labels.tolist()):
        j = seen.get(c)
        if j is None:
            j = nxt
            seen[c] = nxt
            nxt += 1
        out[i] = j
    return out, nxt


def _aggregate(labels, n_comm, lo, hi, w, selfw):
    cl = labels[lo]
    ch = labels[hi]
    new_self = np.zeros(n_comm, dtype=np.float64)
    same = cl == ch
    np.add.at(new_self, cl[same], w[same])
    np.add.at(new_self, labels, selfw)
    cmin = np.minimum(cl[~same], ch[~same])
    cmax = np.maximum(cl[~same], ch[~same])
    if cmin.size:
        keys = cmin * n_comm + cmax
        uniq, inv = np.unique(keys, return_inverse=True)
        sums = np.bincount(inv, weights=w[~same])
        new_lo = uniq // n_comm
        new_hi = uniq % n_comm
    else:
        new_lo = np.empty(0, dtype=np.int64)
        new_hi = np.empty(0, dtype=np.int64)
        sums = np.empty(0, dtype=np.float64)
    return new_lo, new_hi, sums, new_self


def _csr(n, lo, hi, w):
    ends = np.concatenate([lo, hi])
    other = np.concatenate([hi, lo])
    wts = np.concatenate([w, w])
    order = np.lexsort((other, ends))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, ends + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, other[order], wts[order]


def louvain_communities(
    und: UndirectedView,
    seed: int,
) -> tuple[np.ndarray, float, list[float]]:
    """Returns (node labels, Q of the final partition, per-level Q trace).

    Q is re-evaluated from the formula on the input graph, not read off the
    incremental optimization state.
    """
    n = und.n_nodes
    if und.n_edges == 0:
        raise ValueError("community detection needs at least one edge")
    rng = np.random.default_rng(seed)

    lo = und.src.astype(np.int64)
    hi = und.dst.astype(np.int64)
    w = np.ones(lo.size, dtype=np.float64)
    selfw = np.zeros(n, dtype=np.float64)
    node_to_comm = np.arange(n, dtype=np.int64)   # composed level-0 mapping
    two_m = 2.0 * und.n_edges
    trace: list[float] = []
    level_n = n
    prev_q = -np.inf

    while True:
        indptr, indices, weights = _csr(level_n, lo, hi, w)
        k = np.zeros(level_n, dtype=np.float64)
        np.add.at(k, lo, w)
        np.add.at(k, hi, w)
        k += 2.0 * selfw
        order = rng.permutation(level_n).tolist()
        labels, moved = _local_phase(level_n, indptr, indices, weights,
                                     k.tolist(), two_m, order)
        labels, n_comm = _compact(labels)
        node_to_comm = labels[node_to_comm]
        q = modularity_of_partition(und, node_to_comm)
        trace.append(q)
        if not moved or n_comm == level_n or q - prev_q <= GAIN_TOL:
            break
        prev_q = q
        lo, hi, w, selfw = _aggregate(labels, n_comm, lo, hi, w, selfw)
        level_n = n_comm

    final_labels, _ = _compact(node_to_comm)
    return final_labels, trace[-1], trace
