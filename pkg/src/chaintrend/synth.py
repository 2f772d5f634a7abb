"""Deterministic synthetic inputs: markets, social series, transaction
streams with planted structure, and a large-corpus writer for scale checks.

Every generator is a pure function of its seed so fixtures and tests can be
regenerated byte-identically.
"""

from __future__ import annotations

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pandas as pd

from .dataset import FeatureMatrix
from .ingest import (CANDLE_COLUMNS, SOCIAL_COLUMNS, CandleBar, SocialRow,
                     TransactionRecord, write_transactions)

EPOCH_DAY0 = 18628            # 2021-01-01 in whole days since the epoch
D0 = date(2021, 1, 1)


def _dates(n_days: int) -> list[date]:
    return [D0 + timedelta(days=i) for i in range(n_days)]


def price_path(n_days: int, seed: int, s0: float = 100.0, mu: float = 0.0005,
               sigma: float = 0.04) -> np.ndarray:
    rng = np.random.default_rng(seed)
    steps = rng.normal(mu, sigma, size=n_days - 1)
    return s0 * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))


def synth_candles(n_days: int, seed: int, s0: float = 100.0,
                  mu: float = 0.0005, sigma: float = 0.04) -> list[CandleBar]:
    """Daily bars around a lognormal close path; bounds always consistent."""
    rng = np.random.default_rng(seed)
    closes = price_path(n_days, seed + 1, s0, mu, sigma)
    spreads = np.abs(rng.normal(0.0, 0.01, size=(n_days, 2)))
    volumes = np.exp(rng.normal(10.0, 0.5, size=n_days))
    bars = []
    prev_close = closes[0]
    for i, d in enumerate(_dates(n_days)):
        o, c = float(prev_close), float(closes[i])
        h = max(o, c) * (1.0 + float(spreads[i, 0]))
        lo = min(o, c) * (1.0 - float(spreads[i, 1]))
        bars.append(CandleBar(d, o, h, lo, c, float(volumes[i])))
        prev_close = c
    return bars


def synth_social(n_days: int, seed: int) -> list[SocialRow]:
    """Positive AR(1)-style interest levels with integer tweet counts."""
    rng = np.random.default_rng(seed)
    level = 50.0
    rows = []
    for d in _dates(n_days):
        level = max(1.0, 0.9 * level + 5.0 + rng.normal(0.0, 6.0))
        tweets = int(rng.poisson(level * 20.0))
        rows.append(SocialRow(d, tweets, float(round(level, 4))))
    return rows


def _pair_records(day: int, pairs, start_value: int = 1
                  ) -> list[TransactionRecord]:
    base_ts = day * 86400
    return [TransactionRecord(base_ts + i, a, b, start_value)
            for i, (a, b) in enumerate(pairs)]


def regime_stream(seed: int, n_days: int = 60, switch_day: int = 30,
                  pool_size: int = 3000, daily_rate: float = 0.04
                  ) -> list[TransactionRecord]:
    """Transactions sampled daily from a persistent pair pool that is swapped
    wholesale at switch_day.

    Sparse daily sampling keeps consecutive-window overlap growing with
    window length inside a regime, so the similarity drop at the switch is
    the dominant boundary signal.
    """
    rng = np.random.default_rng(seed)
    pools = {}
    for tag in ("a", "b"):
        src = [f"0x{tag}{i:05x}" for i in range(pool_size)]
        dst = rng.permutation(pool_size)
        pools[tag] = [(src[i], f"0x{tag}d{int(j):05x}")
                      for i, j in enumerate(dst)]
    records = []
    for day in range(n_days):
        pool = pools["a"] if day < switch_day else pools["b"]
        take = np.nonzero(rng.random(pool_size) < daily_rate)[0]
        pairs = [pool[i] for i in take]
        records.extend(_pair_records(EPOCH_DAY0 + day, pairs))
    return records


def turnover_stream(closes, seed: int, core_size: int = 120,
                    core_rate: float = 0.9, novelty_scale: float = 0.6,
                    hub_pool: int = 200) -> list[TransactionRecord]:
    """Stream whose address turnover is driven by the given price series.

    A persistent core of pairs repeats daily; on top of it, each day mints
    novel single-use pairs in proportion to that day's close, so pricier
    intervals overlap less with their predecessors. Three hub senders fan
    out to a shared counterparty pool so daily degree distributions have
    the spread the network metrics need (a graph of only degree-1 pairs has
    no defined degree correlation).
    """
    closes = np.asarray(closes, dtype=np.float64)
    rng = np.random.default_rng(seed)
    core = [(f"0xc{i:05x}", f"0xcd{i:05x}") for i in range(core_size)]
    hubs = [(f"0xaaa{i:03x}", rate) for i, rate in
            enumerate((0.5, 0.25, 0.1))]
    pool = [f"0xb{j:05x}" for j in range(hub_pool)]
    records = []
    fresh = 0
    for day, close in enumerate(closes):
        keep = np.nonzero(rng.random(core_size) < core_rate)[0]
        pairs = [core[i] for i in keep]
        for hub, rate in hubs:
            take = np.nonzero(rng.random(hub_pool) < rate)[0]
            pairs.extend((hub, pool[j]) for j in take)
        n_novel = int(round(novelty_scale * float(close)))
        for _ in range(n_novel):
            pairs.append((f"0xf{fresh:06x}", f"0xfd{fresh:06x}"))
            fresh += 1
        records.extend(_pair_records(EPOCH_DAY0 + day, pairs))
    return records


def planted_matrix(n_days: int = 1200, seed: int = 0,
                   train_fraction: float = 0.75) -> FeatureMatrix:
    """Feature matrix whose label is decided by two network-family columns
    plus one technical column, buried in family-matched noise.

    A model denied the network family can only see one of the three signal
    sources, which caps its achievable accuracy well below the full model's.
    """
    rng = np.random.default_rng(seed)
    np_sig = rng.normal(size=(n_days, 2))
    ta_sig = rng.normal(size=n_days)
    score = np_sig[:, 0] + np_sig[:, 1] + 0.7 * ta_sig \
        + 0.5 * rng.normal(size=n_days)
    lo, hi = np.quantile(score, [1.0 / 3.0, 2.0 / 3.0])
    label = np.zeros(n_days, dtype=np.int64)
    label[score < lo] = -1
    label[score >= hi] = 1

    cols = {
        "np_sig_a": np_sig[:, 0],
        "np_sig_b": np_sig[:, 1],
        "ta_sig": ta_sig,
    }
    for j in range(4):
        cols[f"np_noise_{j}"] = rng.normal(size=n_days)
    for j in range(6):
        cols[f"ta_noise_{j}"] = rng.normal(size=n_days)
    for j in range(3):
        cols[f"sm_noise_{j}"] = rng.normal(size=n_days)

    dates = pd.date_range(D0.isoformat(), periods=n_days)
    frame = pd.DataFrame(cols, index=pd.Index(dates, name="date"))
    frame = frame[sorted(frame.columns)]
    frame["label"] = label
    split = dates[int(n_days * train_fraction)].date()
    return FeatureMatrix(frame=frame, split_point=split)


def write_candles(bars: list[CandleBar], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CANDLE_COLUMNS)
        for b in bars:
            w.writerow((b.date.isoformat(), repr(b.open), repr(b.high),
                        repr(b.low), repr(b.close), repr(b.volume)))


def write_social(rows: list[SocialRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SOCIAL_COLUMNS)
        for r in rows:
            w.writerow((r.date.isoformat(), r.tweet_count, repr(r.trend_score)))


def fixture_bundle(out_dir, n_days: int = 120, seed: int = 0) -> dict:
    """Write a coherent transactions/candles/social trio for pipeline runs.

    The transaction stream's turnover follows the candle closes, so interval
    similarity and price move against each other by construction.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bars = synth_candles(n_days, seed)
    social = synth_social(n_days, seed + 1)
    txs = turnover_stream([b.close for b in bars], seed + 2)
    paths = {
        "transactions": out_dir / "transactions.csv",
        "candles": out_dir / "candles.csv",
        "social": out_dir / "social.csv",
    }
    write_transactions(txs, paths["transactions"])
    write_candles(bars, paths["candles"])
    write_social(social, paths["social"])
    return {k: str(v) for k, v in paths.items()}


def scale_corpus(path, n_tx: int = 10_000_000, n_days: int = 90,
                 n_addresses: int = 2000, seed: int = 0,
                 chunk_rows: int = 1_000_000) -> int:
    """Write a large transaction CSV with a concentrated address mix.

    Rows arrive timestamp-sorted. Returns the row count written.
    """
    rng = np.random.default_rng(seed)
    addresses = np.array([f"0x{i:06x}" for i in range(n_addresses)])
    per_day = np.full(n_days, n_tx // n_days)
    per_day[: n_tx % n_days] += 1
    day_of_row = np.repeat(np.arange(n_days), per_day)
    offsets = np.concatenate([np.sort(rng.integers(0, 86400, size=c))
                              for c in per_day])
    timestamps = (EPOCH_DAY0 + day_of_row) * 86400 + offsets

    path = Path(path)
    written = 0
    first = True
    while written < n_tx:
        take = min(chunk_rows, n_tx - written)
        # quadratic concentration: a few hub addresses dominate
        src = addresses[(n_addresses * rng.random(take) ** 2).astype(np.int64)]
        dst = addresses[(n_addresses * rng.random(take) ** 2).astype(np.int64)]
        chunk = pd.DataFrame({
            "timestamp": timestamps[written:written + take],
            "from": src,
            "to": dst,
            "value": rng.integers(1, 10_000, size=take),
        })
        chunk.to_csv(path, index=False, mode="w" if first else "a",
                     header=first)
        first = False
        written += take
    return written
