"""Directed weighted address graphs per time interval.

A snapshot is immutable once built: nodes are global interned address ids,
edges are stored with local indices (0..n_nodes-1) in canonical (src, dst)
order, and weights count transactions between the pair inside the interval.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .ingest import TransactionRecord

_EPOCH = date(1970, 1, 1)
_SECONDS_PER_DAY = 86_400


def day_of_timestamp(ts: int) -> date:
    return _EPOCH + timedelta(days=ts // _SECONDS_PER_DAY)


class AddressInterner:
    """Maps address strings to dense integer ids, first come first served."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._addresses: list[str] = []

    def intern(self, address: str) -> int:
        i = self._ids.get(address)
        if i is None:
            i = len(self._addresses)
            self._ids[address] = i
            self._addresses.append(address)
        return i

    def address(self, node_id: int) -> str:
        return self._addresses[node_id]

    def __len__(self) -> int:
        return len(self._addresses)

    def __contains__(self, address: str) -> bool:
        return address in self._ids


@dataclass(frozen=True)
class GraphSnapshot:
    start_day: date
    end_day: date
    nodes: np.ndarray          # global ids, sorted ascending
    edge_src: np.ndarray       # local indices into nodes
    edge_dst: np.ndarray
    edge_weight: np.ndarray    # transaction counts, >= 1
    cumulative_address_count: int

    def __post_init__(self):
        for arr in (self.nodes, self.edge_src, self.edge_dst, self.edge_weight):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)

    @property
    def n_edges(self) -> int:
        return int(self.edge_src.size)

    def edges_global(self) -> Iterator[tuple[int, int, int]]:
        for s, d, w in zip(self.edge_src, self.edge_dst, self.edge_weight):
            yield int(self.nodes[s]), int(self.nodes[d]), int(w)

    def weight_of(self, src_gid: int, dst_gid: int) -> int:
        s = np.searchsorted(self.nodes, src_gid)
        d = np.searchsorted(self.nodes, dst_gid)
        mask = (self.edge_src == s) & (self.edge_dst == d)
        hit = np.flatnonzero(mask)
        return int(self.edge_weight[hit[0]]) if hit.size else 0


def _snapshot_from_counts(
    counts: dict[int, int],
    start_day: date,
    end_day: date,
    cumulative: int,
) -> GraphSnapshot:
    if not counts:
        empty = np.empty(0, dtype=np.int64)
        return GraphSnapshot(start_day, end_day, empty, empty.copy(),
                             empty.copy(), empty.copy(), cumulative)
    keys = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    weights = np.fromiter(counts.values(), dtype=np.int64, count=len(counts))
    src_g = keys >> 32
    dst_g = keys & 0xFFFFFFFF
    nodes = np.unique(np.concatenate([src_g, dst_g]))
    src_l = np.searchsorted(nodes, src_g)
    dst_l = np.searchsorted(nodes, dst_g)
    order = np.lexsort((dst_l, src_l))
    return GraphSnapshot(
        start_day, end_day, nodes,
        src_l[order], dst_l[order], weights[order], cumulative,
    )


class SnapshotBuilder:
    """Accumulates transactions into per-interval snapshots.

    The cumulative address count follows the interner, so feed streams from
    the start of the run for the active-address ratio to be meaningful.
    """

    def __init__(self, interner: AddressInterner | None = None) -> None:
        self.interner = interner if interner is not None else AddressInterner()

    def build_snapshot(
        self,
        txs: Iterable[TransactionRecord],
        start_day: date,
        end_day: date,
    ) -> GraphSnapshot:
        """Single snapshot over [start_day, end_day], both ends inclusive."""
        lo = (start_day - _EPOCH).days * _SECONDS_PER_DAY
        hi = ((end_day - _EPOCH).days + 1) * _SECONDS_PER_DAY
        counts: dict[int, int] = {}
        intern = self.interner.intern
        for rec in txs:
            if rec.timestamp >= hi:
                break
            u = intern(rec.source)
            v = intern(rec.target)
            if rec.timestamp < lo:
                continue
            key = (u << 32) | v
            counts[key] = counts.get(key, 0) + 1
        return _snapshot_from_counts(counts, start_day, end_day, len(self.interner))

    def build_daily(self, txs: Iterable[TransactionRecord]) -> list[GraphSnapshot]:
        """One snapshot per calendar day present in the (sorted) stream."""
        snapshots: list[GraphSnapshot] = []
        counts: dict[int, int] = {}
        intern = self.interner.intern
        current_day = -1
        for rec in txs:
            d = rec.timestamp // _SECONDS_PER_DAY
            if d != current_day:
                if d < current_day:
                    raise ValueError("transaction stream is not sorted by timestamp")
                if current_day >= 0:
                    day = _EPOCH + timedelta(days=current_day)
                    snapshots.append(
                        _snapshot_from_counts(counts, day, day, len(self.interner))
                    )
                counts = {}
                current_day = d
            key = (intern(rec.source) << 32) | intern(rec.target)
            counts[key] = counts.get(key, 0) + 1
        if current_day >= 0:
            day = _EPOCH + timedelta(days=current_day)
            snapshots.append(
                _snapshot_from_counts(counts, day, day, len(self.interner))
            )
        return snapshots


def merge_snapshots(a: GraphSnapshot, b: GraphSnapshot) -> GraphSnapshot:
    """Union nodes, add weights. Intervals must be disjoint or adjacent;
    the result covers the hull."""
    counts: dict[int, int] = {}
    for snap in (a, b):
        src_g = snap.nodes[snap.edge_src]
        dst_g = snap.nodes[snap.edge_dst]
        for s, d, w in zip(src_g, dst_g, snap.edge_weight):
            key = (int(s) << 32) | int(d)
            counts[key] = counts.get(key, 0) + int(w)
    merged = _snapshot_from_counts(
        counts,
        min(a.start_day, b.start_day),
        max(a.end_day, b.end_day),
        max(a.cumulative_address_count, b.cumulative_address_count),
    )
    if merged.n_edges == 0:
        # both empty: preserve the node union anyway (there is none)
        return merged
    # isolated nodes (none can exist: nodes are edge endpoints by construction)
    return merged


def degree_sequences(g: GraphSnapshot) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(in, out, total) degrees per node, counting distinct directed edges."""
    n = g.n_nodes
    indeg = np.bincount(g.edge_dst, minlength=n).astype(np.int64)
    outdeg = np.bincount(g.edge_src, minlength=n).astype(np.int64)
    return indeg, outdeg, indeg + outdeg


@dataclass(frozen=True)
class UndirectedView:
    """Simple undirected companion of a snapshot: self-loops dropped,
    reciprocal pairs collapsed. Local node indexing matches the snapshot."""

    n_nodes: int
    src: np.ndarray    # src < dst, sorted canonically
    dst: np.ndarray
    indptr: np.ndarray
    neighbors: np.ndarray

    def __post_init__(self):
        for arr in (self.src, self.dst, self.indptr, self.neighbors):
            arr.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return int(self.src.size)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.indptr[v]:self.indptr[v + 1]]


def undirected_view(g: GraphSnapshot) -> UndirectedView:
    keep = g.edge_src != g.edge_dst
    lo = np.minimum(g.edge_src[keep], g.edge_dst[keep])
    hi = np.maximum(g.edge_src[keep], g.edge_dst[keep])
    n = g.n_nodes
    if lo.size:
        key = lo.astype(np.int64) * n + hi
        key = np.unique(key)
        lo = (key // n).astype(np.int64)
        hi = (key % n).astype(np.int64)
    return _undirected_from_pairs(n, lo.astype(np.int64), hi.astype(np.int64))


def _undirected_from_pairs(n: int, lo: np.ndarray, hi: np.ndarray) -> UndirectedView:
    ends = np.concatenate([lo, hi])
    other = np.concatenate([hi, lo])
    order = np.lexsort((other, ends))
    ends = ends[order]
    other = other[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, ends + 1, 1)
    np.cumsum(indptr, out=indptr)
    return UndirectedView(n, lo, hi, indptr, other)


# ---------------------------------------------------------------------------
# Snapshot disk cache: edge-list CSV plus a node-id dictionary file.
# ---------------------------------------------------------------------------

def save_snapshot(g: GraphSnapshot, interner: AddressInterner, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "edges.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src_id", "dst_id", "weight"])
        src_g = g.nodes[g.edge_src]
        dst_g = g.nodes[g.edge_dst]
        for s, d, wt in zip(src_g, dst_g, g.edge_weight):
            w.writerow([int(s), int(d), int(wt)])
    with open(directory / "nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "address"])
        for gid in g.nodes:
            w.writerow([int(gid), interner.address(int(gid))])
    with open(directory / "meta.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["start_day", "end_day", "cumulative_address_count"])
        w.writerow([g.start_day.isoformat(), g.end_day.isoformat(),
                    g.cumulative_address_count])


def load_snapshot(directory) -> tuple[GraphSnapshot, dict[int, str]]:
    directory = Path(directory)
    with open(directory / "meta.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    start_day = date.fromisoformat(rows[1][0])
    end_day = date.fromisoformat(rows[1][1])
    cumulative = int(rows[1][2])
    counts: dict[int, int] = {}
    with open(directory / "edges.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for s, d, wt in reader:
            counts[(int(s) << 32) | int(d)] = int(wt)
    id_to_addr: dict[int, str] = {}
    with open(directory / "nodes.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for gid, addr in reader:
            id_to_addr[int(gid)] = addr
    snap = _snapshot_from_counts(counts, start_day, end_day, cumulative)
    return snap, id_to_addr
