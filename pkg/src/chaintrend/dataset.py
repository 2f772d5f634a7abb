"""Aligned daily feature matrix with next-day trend labels.

Feature columns carry family prefixes (np_, ta_, sm_). The label at row t is
the thresholded log return from day t to day t+1, so the final joined day has
no label and is dropped. Rows inside the indicator warm-up are dropped too;
whatever is still missing afterwards is forward-filled, then leading gaps take
the column median (counts of both recorded for the sidecar).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

LABEL_THRESHOLD = 0.01
WARMUP_ROWS = 99        # longest indicator window (slowest EMA)

FAMILY_PREFIXES = ("np_", "ta_", "sm_")


def log_return(close) -> np.ndarray:
    """r[i] = ln(close[i+1] / close[i]); length is len(close) - 1."""
    x = np.asarray(close, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least two prices")
    if (x <= 0.0).any():
        raise ValueError("prices must be strictly positive")
    return np.diff(np.log(x))


def label(r: float, threshold: float = LABEL_THRESHOLD) -> int:
    if not np.isfinite(r):
        raise ValueError("return must be finite")
    if r > threshold:
        return 1
    if r < -threshold:
        return -1
    return 0


def labels_from_returns(r, threshold: float = LABEL_THRESHOLD) -> np.ndarray:
    arr = np.asarray(r, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError("returns must be finite")
    return (np.where(arr > threshold, 1, 0)
            + np.where(arr < -threshold, -1, 0)).astype(np.int64)


def make_labels(
    close,
    threshold: float = LABEL_THRESHOLD,
    on_return_change: bool = False,
) -> np.ndarray:
    """Label per day t over the first len(close)-1 days.

    Default reading thresholds r_{t+1} itself. The alternative thresholds the
    day-over-day change r_{t+1} - r_t; its first row falls back to r_1 alone.
    """
    r = log_return(close)
    if not on_return_change:
        return labels_from_returns(r, threshold)
    change = np.concatenate([r[:1], np.diff(r)])
    return labels_from_returns(change, threshold)


@dataclass
class FeatureMatrix:
    frame: pd.DataFrame              # prefixed feature columns + 'label'
    split_point: date | None = None
    warmup_dropped: int = 0
    rows_dropped_no_next_day: int = 0
    imputation: dict = field(default_factory=dict)
    threshold: float = LABEL_THRESHOLD
    label_on_return_change: bool = False

    def __post_init__(self):
        if "label" not in self.frame.columns:
            raise ValueError("matrix must carry a label column")
        if self.frame.drop(columns="label").isna().any().any():
            raise ValueError("matrix must be fully imputed")

    @property
    def dates(self) -> list[date]:
        return list(self.frame.index)

    @property
    def feature_columns(self) -> list[str]:
        return [c for c in self.frame.columns if c != "label"]

    def family_columns(self, families: Sequence[str]) -> list[str]:
        pref = tuple(f"{f.lower()}_" for f in families)
        return [c for c in self.feature_columns if c.startswith(pref)]

    def x(self, columns: Sequence[str] | None = None) -> np.ndarray:
        cols = list(columns) if columns is not None else self.feature_columns
        return self.frame[cols].to_numpy(dtype=np.float64)

    @property
    def y(self) -> np.ndarray:
        return self.frame["label"].to_numpy(dtype=np.int64)

    def _with(self, frame: pd.DataFrame) -> "FeatureMatrix":
        return FeatureMatrix(frame, self.split_point, self.warmup_dropped,
                             self.rows_dropped_no_next_day, self.imputation,
                             self.threshold, self.label_on_return_change)

    def sidecar(self) -> dict:
        return {
            "n_rows": int(len(self.frame)),
            "n_features": len(self.feature_columns),
            "warmup_dropped": self.warmup_dropped,
            "rows_dropped_no_next_day": self.rows_dropped_no_next_day,
            "imputation": self.imputation,
            "split_point": (self.split_point.isoformat()
                            if self.split_point else None),
            "threshold": self.threshold,
            "label_on_return_change": self.label_on_return_change,
        }

    def save(self, csv_path, header_comment: str | None = None) -> None:
        csv_path = Path(csv_path)
        with open(csv_path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            out = self.frame.copy()
            out.index = [d.isoformat() for d in out.index]
            out.index.name = "date"
            out.to_csv(fh, lineterminator="\n")
        sidecar_path = csv_path.with_suffix(".json")
        with open(sidecar_path, "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, csv_path) -> "FeatureMatrix":
        csv_path = Path(csv_path)
        df = pd.read_csv(csv_path, comment="#", index_col="date",
                         float_precision="round_trip")
        df.index = [date.fromisoformat(d) for d in df.index]
        df["label"] = df["label"].astype(np.int64)
        meta = json.loads(csv_path.with_suffix(".json").read_text())
        return cls(
            df,
            (date.fromisoformat(meta["split_point"])
             if meta.get("split_point") else None),
            meta.get("warmup_dropped", 0),
            meta.get("rows_dropped_no_next_day", 0),
            meta.get("imputation", {}),
            meta.get("threshold", LABEL_THRESHOLD),
            meta.get("label_on_return_change", False),
        )


def _prefix(df: pd.DataFrame, prefix: str) -> pd.DataFrame:
    return df.rename(columns={c: f"{prefix}{c}" for c in df.columns})


def assemble(
    net_feats: pd.DataFrame,
    ta_feats: pd.DataFrame,
    social_feats: pd.DataFrame,
    closes: pd.Series,
    *,
    threshold: float = LABEL_THRESHOLD,
    warmup: int = WARMUP_ROWS,
    split_point: date | None = None,
    on_return_change: bool = False,
) -> FeatureMatrix:
    """Inner-join the three families on date and attach next-day labels.

    closes must cover the joined dates (labels also need each row's next
    calendar day; rows without one are dropped and counted).
    """
    joined = pd.concat(
        [_prefix(net_feats, "np_"), _prefix(ta_feats, "ta_"),
         _prefix(social_feats, "sm_")],
        axis=1, join="inner",
    ).sort_index()
    if joined.empty:
        raise ValueError("no overlapping dates across feature families")
    joined = joined.astype(np.float64)

    next_close = closes.reindex([d + timedelta(days=1) for d in joined.index])
    this_close = closes.reindex(joined.index)
    if this_close.isna().any():
        raise ValueError("close prices missing for joined dates")
    has_next = ~next_close.isna().to_numpy()
    dropped_no_next = int((~has_next).sum())
    joined = joined.loc[has_next]
    ratio = next_close.to_numpy()[has_next] / this_close.to_numpy()[has_next]
    if (ratio <= 0.0).any():
        raise ValueError("prices must be strictly positive")
    r_next = np.log(ratio)
    if on_return_change:
        r_next = np.concatenate([r_next[:1], np.diff(r_next)])
    labels = labels_from_returns(r_next, threshold)

    if warmup >= len(joined):
        raise ValueError("warm-up leaves no rows")
    joined = joined.iloc[warmup:]
    labels = labels[warmup:]

    ffill_counts: dict[str, int] = {}
    median_counts: dict[str, int] = {}
    before = joined.isna()
    joined = joined.ffill()
    after_ffill = joined.isna()
    for c in joined.columns:
        n = int(before[c].sum() - after_ffill[c].sum())
        if n:
            ffill_counts[c] = n
    medians = joined.median()
    joined = joined.fillna(medians)
    for c in joined.columns:
        n = int(after_ffill[c].sum())
        if n:
            median_counts[c] = n
    if joined.isna().any().any():
        bad = [c for c in joined.columns if joined[c].isna().any()]
        raise ValueError(f"columns with no observed values: {bad}")

    joined["label"] = labels
    return FeatureMatrix(
        joined,
        split_point=split_point,
        warmup_dropped=warmup,
        rows_dropped_no_next_day=dropped_no_next,
        imputation={"ffill": ffill_counts, "median": median_counts},
        threshold=threshold,
        label_on_return_change=on_return_change,
    )


def split(
    m: FeatureMatrix, train_end: date | None = None
) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Chronological split: train covers dates <= train_end."""
    cut = train_end if train_end is not None else m.split_point
    if cut is None:
        raise ValueError("no split date given")
    cut = pd.Timestamp(cut)
    idx = np.array([pd.Timestamp(d) <= cut for d in m.frame.index])
    if not idx.any() or idx.all():
        raise ValueError("split leaves an empty side")
    train = m._with(m.frame.loc[idx])
    test = m._with(m.frame.loc[~idx])
    return train, test
