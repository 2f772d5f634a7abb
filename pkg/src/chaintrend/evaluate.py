"""Model scoring, run comparison, and the feature-correlation network.

Class labels map to report names down (-1), flat (0), up (+1). Overall
precision/recall/F1 are macro averages over the three classes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .dataset import FAMILY_PREFIXES
from .slicing import pearson

LABELS = (-1, 0, 1)
LABEL_NAMES = {-1: "down", 0: "flat", 1: "up"}


def holdout_digest(actuals) -> str:
    y = np.asarray(actuals, dtype=np.int64)
    return hashlib.sha256(y.tobytes()).hexdigest()


@dataclass(frozen=True)
class ClassReport:
    confusion: tuple                 # 3x3 counts, rows actual, cols predicted
    per_class: dict                  # name -> {precision, recall, f1}
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    n: int
    zero_division: tuple             # (class name, metric) pairs scored as 0
    test_hash: str

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "confusion": [list(row) for row in self.confusion],
            "label_order": [LABEL_NAMES[c] for c in LABELS],
            "per_class": self.per_class,
            "macro": {"precision": self.macro_precision,
                      "recall": self.macro_recall, "f1": self.macro_f1},
            "zero_division": [list(z) for z in self.zero_division],
            "test_hash": self.test_hash,
        }


def score(predictions, actuals) -> ClassReport:
    pred = np.asarray(predictions, dtype=np.int64)
    act = np.asarray(actuals, dtype=np.int64)
    if pred.shape != act.shape or pred.ndim != 1 or pred.size < 1:
        raise ValueError("predictions and actuals must be equal-length, non-empty")
    for name, arr in (("predictions", pred), ("actuals", act)):
        bad = set(np.unique(arr)) - set(LABELS)
        if bad:
            raise ValueError(f"{name} contain labels outside {LABELS}: {sorted(bad)}")

    idx_a = np.searchsorted(np.array(LABELS), act)
    idx_p = np.searchsorted(np.array(LABELS), pred)
    confusion = np.zeros((3, 3), dtype=np.int64)
    np.add.at(confusion, (idx_a, idx_p), 1)

    flags = []
    per_class = {}
    precs, recs, f1s = [], [], []
    for k, c in enumerate(LABELS):
        name = LABEL_NAMES[c]
        tp = confusion[k, k]
        col = confusion[:, k].sum()
        row = confusion[k, :].sum()
        if col == 0:
            precision = 0.0
            flags.append((name, "precision"))
        else:
            precision = float(tp / col)
        if row == 0:
            recall = 0.0
            flags.append((name, "recall"))
        else:
            recall = float(tp / row)
        if precision + recall == 0.0:
            f1 = 0.0
            flags.append((name, "f1"))
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        per_class[name] = {"precision": precision, "recall": recall, "f1": f1}
        precs.append(precision)
        recs.append(recall)
        f1s.append(f1)

    return ClassReport(
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        per_class=per_class,
        macro_precision=float(np.mean(precs)),
        macro_recall=float(np.mean(recs)),
        macro_f1=float(np.mean(f1s)),
        accuracy=float(confusion.trace() / pred.size),
        n=int(pred.size),
        zero_division=tuple(flags),
        test_hash=holdout_digest(act),
    )


def _flat_metrics(report: ClassReport) -> dict[str, float]:
    out = {"accuracy": report.accuracy,
           "macro_precision": report.macro_precision,
           "macro_recall": report.macro_recall,
           "macro_f1": report.macro_f1}
    for name, metrics in report.per_class.items():
        for metric, value in metrics.items():
            out[f"{name}_{metric}"] = value
    return out


def compare(base: ClassReport, full: ClassReport) -> dict:
    """Absolute and relative metric deltas (full minus base).

    Both reports must have been scored against the same actual labels.
    Relative deltas are None where the base value is 0.
    """
    if base.test_hash != full.test_hash:
        raise ValueError("reports were scored on different test sets")
    b = _flat_metrics(base)
    f = _flat_metrics(full)
    absolute = {k: f[k] - b[k] for k in b}
    relative = {k: ((f[k] - b[k]) / b[k] if b[k] != 0 else None) for k in b}
    return {"absolute": absolute, "relative": relative,
            "test_hash": base.test_hash}


def _family_of(column: str) -> str:
    for prefix in FAMILY_PREFIXES:
        if column.startswith(prefix):
            return prefix[:-1]
    return "other"


@dataclass(frozen=True)
class CorrelationNetwork:
    nodes: tuple                  # (column, family) pairs
    edges: tuple                  # (column_i, column_j, r, p) with p < alpha
    excluded: tuple               # constant columns left out
    alpha: float
    n_rows: int

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_rows": self.n_rows,
            "nodes": [{"column": c, "family": f} for c, f in self.nodes],
            "edges": [{"source": a, "target": b, "r": r, "p": p}
                      for a, b, r, p in self.edges],
            "excluded_constant": list(self.excluded),
        }


def correlation_network(matrix, alpha: float = 0.05) -> CorrelationNetwork:
    """Pairwise Pearson graph over feature columns; links need p < alpha."""
    frame = matrix.frame[matrix.feature_columns]
    if len(frame) < 3:
        raise ValueError("need at least 3 rows to correlate")
    excluded = [c for c in frame.columns
                if np.nanstd(frame[c].to_numpy()) == 0.0]
    kept = [c for c in frame.columns if c not in excluded]
    values = {c: frame[c].to_numpy(dtype=np.float64) for c in kept}
    edges = []
    for i, a in enumerate(kept):
        for b in kept[i + 1:]:
            r, p = pearson(values[a], values[b])
            if p < alpha:
                edges.append((a, b, float(r), float(p)))
    nodes = tuple((c, _family_of(c)) for c in kept)
    return CorrelationNetwork(nodes=nodes, edges=tuple(edges),
                              excluded=tuple(excluded), alpha=alpha,
                              n_rows=len(frame))
