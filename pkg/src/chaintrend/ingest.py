"""Loaders for transaction logs, OHLCV candles and social-trend series.

File formats accepted here:
  transactions: CSV with header ``timestamp,from,to,value`` or JSONL with the
    same keys; timestamps are integer epoch seconds UTC, addresses lowercase
    0x-prefixed hex, values base-10 integers.
  candles: CSV with header ``date,open,high,low,close,volume``, ISO dates.
  social: CSV with header ``date,tweet_count,trend_score``.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

_ADDRESS_RE = re.compile(r"^0x[0-9a-f]+$")

TX_COLUMNS = ("timestamp", "from", "to", "value")
CANDLE_COLUMNS = ("date", "open", "high", "low", "close", "volume")
SOCIAL_COLUMNS = ("date", "tweet_count", "trend_score")


class SchemaError(ValueError):
    """Input file header/structure does not match the expected schema."""


class RowError(ValueError):
    """A row violates a fatal invariant (candles) or the reject budget."""


class TransactionRecord(NamedTuple):
    timestamp: int
    source: str
    target: str
    value: int


class CandleBar(NamedTuple):
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: float


class SocialRow(NamedTuple):
    date: date
    tweet_count: int
    trend_score: float


@dataclass
class IngestStats:
    """Mutable counters filled while a transaction stream is consumed."""

    total_rows: int = 0
    accepted: int = 0
    rejected: int = 0
    sorted_input: bool = True
    dropped_zero_value: int = 0
    dropped_self_loops: int = 0
    reject_samples: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "sorted_input": self.sorted_input,
            "dropped_zero_value": self.dropped_zero_value,
            "dropped_self_loops": self.dropped_self_loops,
            "reject_samples": self.reject_samples[:10],
        }


# Reject budget: stray rows happen in explorer exports, silent large-scale
# loss must not. Above this fraction of malformed rows the load aborts.
REJECT_FRACTION_LIMIT = 0.01


def _parse_tx_fields(ts_raw, src_raw, dst_raw, val_raw, valid_addr_cache):
    ts = int(ts_raw)
    if ts <= 0:
        raise ValueError(f"timestamp must be > 0, got {ts_raw!r}")
    ok = valid_addr_cache.get(src_raw)
    if ok is None:
        ok = bool(_ADDRESS_RE.match(src_raw))
        valid_addr_cache[src_raw] = ok
    if not ok:
        raise ValueError(f"bad source address {src_raw!r}")
    ok = valid_addr_cache.get(dst_raw)
    if ok is None:
        ok = bool(_ADDRESS_RE.match(dst_raw))
        valid_addr_cache[dst_raw] = ok
    if not ok:
        raise ValueError(f"bad target address {dst_raw!r}")
    value = int(val_raw)
    if value < 0:
        raise ValueError(f"value must be >= 0, got {val_raw!r}")
    return TransactionRecord(ts, src_raw, dst_raw, value)


def _tx_rows_csv(path: Path) -> Iterator[tuple]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and header and header[0].startswith("#"):
            header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TX_COLUMNS:
            raise SchemaError(
                f"{path}: expected header {','.join(TX_COLUMNS)}, got {header}"
            )
        for row in reader:
            yield row


def _tx_rows_jsonl(path: Path) -> Iterator[tuple]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            missing = [k for k in TX_COLUMNS if k not in obj]
            if missing:
                raise SchemaError(f"{path}: object missing keys {missing}")
            yield (obj["timestamp"], obj["from"], obj["to"], obj["value"])


def load_transactions(
    path,
    fmt: str = "csv",
    *,
    drop_zero_value: bool = False,
    drop_self_loops: bool = False,
    stats: IngestStats | None = None,
) -> Iterator[TransactionRecord]:
    """Yield validated transactions from ``path`` in timestamp order.

    Malformed rows are counted and skipped; more than 1% of them aborts the
    load with RowError. Unordered input is stable-sorted before emission.
    Pass an IngestStats to observe counters after consumption.
    """
    path = Path(path)
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown transaction format {fmt!r}")
    rows = _tx_rows_csv(path) if fmt == "csv" else _tx_rows_jsonl(path)
    if stats is None:
        stats = IngestStats()

    records: list[TransactionRecord] = []
    append = records.append
    cache: dict = {}
    prev_ts = 0
    in_order = True
    for row in rows:
        stats.total_rows += 1
        try:
            if len(row) != 4:
                raise ValueError(f"expected 4 fields, got {len(row)}")
            rec = _parse_tx_fields(row[0], row[1], row[2], row[3], cache)
        except (ValueError, TypeError) as exc:
            stats.rejected += 1
            if len(stats.reject_samples) < 10:
                stats.reject_samples.append(f"row {stats.total_rows}: {exc}")
            continue
        if drop_zero_value and rec.value == 0:
            stats.dropped_zero_value += 1
            continue
        if drop_self_loops and rec.source == rec.target:
            stats.dropped_self_loops += 1
            continue
        if rec.timestamp < prev_ts:
            in_order = False
        prev_ts = rec.timestamp
        append(rec)

    stats.accepted = len(records)
    stats.sorted_input = in_order
    if stats.total_rows and stats.rejected / stats.total_rows > REJECT_FRACTION_LIMIT:
        raise RowError(
            f"{path}: {stats.rejected}/{stats.total_rows} malformed rows "
            f"exceeds the {REJECT_FRACTION_LIMIT:.0%} budget"
        )
    if not in_order:
        records.sort(key=lambda r: r.timestamp)
    yield from records


def write_transactions(records: Iterable[TransactionRecord], path) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TX_COLUMNS)
        for rec in records:
            writer.writerow((rec.timestamp, rec.source, rec.target, rec.value))
            n += 1
    return n


def load_candles(path) -> tuple[list[CandleBar], list[date]]:
    """Load a daily candle series, sorted by date.

    Returns (bars, gaps) where gaps lists calendar days missing between the
    first and last bar. A bar with high < low (or any bound violation) is
    fatal.
    """
    path = Path(path)
    bars: list[CandleBar] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and header and header[0].startswith("#"):
            header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CANDLE_COLUMNS:
            raise SchemaError(
                f"{path}: expected header {','.join(CANDLE_COLUMNS)}, got {header}"
            )
        for i, row in enumerate(reader, start=2):
            try:
                d = date.fromisoformat(row[0])
                o, h, l, c, v = (float(x) for x in row[1:6])
            except (ValueError, IndexError) as exc:
                raise RowError(f"{path} line {i}: {exc}") from exc
            if h < max(o, c) or l > min(o, c):
                raise RowError(
                    f"{path} line {i}: high/low bounds violated "
                    f"(o={o} h={h} l={l} c={c})"
                )
            if v < 0:
                raise RowError(f"{path} line {i}: negative volume")
            bars.append(CandleBar(d, o, h, l, c, v))
    bars.sort(key=lambda b: b.date)
    for i in range(1, len(bars)):
        if bars[i].date == bars[i - 1].date:
            raise RowError(f"{path}: duplicate date {bars[i].date}")
    gaps: list[date] = []
    if bars:
        d = bars[0].date
        have = {b.date for b in bars}
        while d <= bars[-1].date:
            if d not in have:
                gaps.append(d)
            d += timedelta(days=1)
    return bars, gaps


def load_social(path) -> list[SocialRow]:
    path = Path(path)
    rows: list[SocialRow] = []
    seen: set[date] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and header and header[0].startswith("#"):
            header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SOCIAL_COLUMNS:
            raise SchemaError(
                f"{path}: expected header {','.join(SOCIAL_COLUMNS)}, got {header}"
            )
        for i, row in enumerate(reader, start=2):
            try:
                d = date.fromisoformat(row[0])
                tweets = int(row[1])
                score = float(row[2])
            except (ValueError, IndexError) as exc:
                raise RowError(f"{path} line {i}: {exc}") from exc
            if tweets < 0 or score < 0:
                raise RowError(f"{path} line {i}: negative social value")
            if d in seen:
                raise RowError(f"{path}: duplicate date {d}")
            seen.add(d)
            rows.append(SocialRow(d, tweets, score))
    rows.sort(key=lambda r: r.date)
    return rows


def pct_change(series) -> np.ndarray:
    """Day-over-day relative change; first element and zero-denominator
    days are NaN."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise ValueError("pct_change needs at least 2 observations")
    out = np.full(x.shape, np.nan)
    prev = x[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:] = (x[1:] - prev) / prev
    out[1:][prev == 0] = np.nan
    return out


def forward_fill(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    out = x.copy()
    last = np.nan
    for i in range(out.size):
        if math.isnan(out[i]):
            out[i] = last
        else:
            last = out[i]
    return out


def social_frame(rows):
    """Daily percentage-change features as a date-indexed DataFrame."""
    import pandas as pd

    dates, tweet_pct, trend_pct = social_features(rows)
    return pd.DataFrame(
        {"tweet_count_pct": tweet_pct, "trend_score_pct": trend_pct},
        index=pd.Index(dates, name="date"),
    )


def social_features(rows: list[SocialRow]):
    """Daily pct-change features on a gap-free date index.

    Missing days are forward-filled before the change is taken, so a gap does
    not fabricate a jump. Returns (dates, tweet_pct, trend_pct).
    """
    if len(rows) < 2:
        raise ValueError("social series needs at least 2 days")
    start, end = rows[0].date, rows[-1].date
    n_days = (end - start).days + 1
    dates = [start + timedelta(days=i) for i in range(n_days)]
    tweets = np.full(n_days, np.nan)
    score = np.full(n_days, np.nan)
    for r in rows:
        i = (r.date - start).days
        tweets[i] = r.tweet_count
        score[i] = r.trend_score
    tweets = forward_fill(tweets)
    score = forward_fill(score)
    return dates, pct_change(tweets), pct_change(score)
