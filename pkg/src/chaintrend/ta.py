"""Daily technical-analysis indicators over OHLCV candles.

Every function returns a series aligned to the input: positions inside a
rolling warm-up are NaN, recursive indicators are defined from day 0.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

from .ingest import CandleBar, pct_change

EMA_WINDOWS = (7, 25, 99)
VOLATILITY_WINDOWS = (7, 14, 21)
RSI_WINDOW = 14
ATR_WINDOW = 14
BOLLINGER_WINDOW = 21
BOLLINGER_K = 2.0

TA_COLUMNS = (
    "price_trend",
    "ema_7", "ema_25", "ema_99",
    "macd", "macd_signal",
    "rsi",
    "volume", "volume_trend",
    "obv",
    "volatility_7", "volatility_14", "volatility_21",
    "atr",
    "price_range",
    "bb_width_pct", "bb_close_to_upper_pct", "bb_close_to_lower_pct",
)


def _as_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty 1-d series")
    return arr


def ema(close, window: int) -> np.ndarray:
    """Recursive smoothing, alpha = 2/(window+1), seeded by the first value."""
    x = _as_array(close)
    if window < 1:
        raise ValueError("window must be >= 1")
    alpha = 2.0 / (window + 1.0)
    if x.size == 1:
        return x.copy()
    rest, _ = lfilter([alpha], [1.0, alpha - 1.0], x[1:],
                      zi=np.array([(1.0 - alpha) * x[0]]))
    return np.concatenate([x[:1], rest])


def macd(close) -> tuple[np.ndarray, np.ndarray]:
    x = _as_array(close)
    line = ema(x, 12) - ema(x, 26)
    signal = ema(line, 9)
    return line, signal


def _rolling_mean(x: np.ndarray, window: int) -> np.ndarray:
    out = np.full(x.size, np.nan)
    if x.size >= window:
        out[window - 1:] = sliding_window_view(x, window).mean(axis=1)
    return out


def _rolling_std(x: np.ndarray, window: int) -> np.ndarray:
    """Sample (ddof=1) standard deviation, two-pass per window."""
    out = np.full(x.size, np.nan)
    if x.size >= window:
        w = sliding_window_view(x, window)
        mean = w.mean(axis=1)
        out[window - 1:] = np.sqrt(
            ((w - mean[:, None]) ** 2).sum(axis=1) / (window - 1)
        )
    return out


def rsi(close, window: int = RSI_WINDOW) -> np.ndarray:
    """Wilder-smoothed relative strength, NaN through the seed window.

    Degenerate windows resolve without division blow-ups: all-gain -> 100,
    all-loss -> 0, flat -> 50.
    """
    x = _as_array(close)
    n = window
    if x.size <= n:
        raise ValueError("series must be longer than the window")
    moves = np.diff(x)
    gains = np.maximum(moves, 0.0)
    losses = np.maximum(-moves, 0.0)

    def wilder(v: np.ndarray) -> np.ndarray:
        seed = v[:n].mean()
        if v.size == n:
            return np.array([seed])
        rest, _ = lfilter([1.0 / n], [1.0, -(n - 1.0) / n], v[n:],
                          zi=np.array([seed * (n - 1.0) / n]))
        return np.concatenate([[seed], rest])

    avg_gain = wilder(gains)
    avg_loss = wilder(losses)
    out = np.full(x.size, np.nan)
    tail = np.empty(avg_gain.size)
    flat = (avg_gain == 0.0) & (avg_loss == 0.0)
    no_loss = (avg_loss == 0.0) & ~flat
    normal = ~flat & ~no_loss
    tail[flat] = 50.0
    tail[no_loss] = 100.0
    tail[normal] = 100.0 - 100.0 / (1.0 + avg_gain[normal] / avg_loss[normal])
    out[n:] = tail
    return out


def obv(close, volume) -> np.ndarray:
    x = _as_array(close)
    v = _as_array(volume)
    if x.shape != v.shape:
        raise ValueError("close and volume must align")
    signed = np.sign(np.diff(x)) * v[1:]
    return np.concatenate([[0.0], np.cumsum(signed)])


def log_returns(close) -> np.ndarray:
    x = _as_array(close)
    if (x <= 0.0).any():
        raise ValueError("log returns need strictly positive prices")
    return np.diff(np.log(x))


def volatility(close, window: int) -> np.ndarray:
    """Rolling sample std of daily log returns; NaN until a full window."""
    x = _as_array(close)
    if x.size <= window:
        raise ValueError("series must be longer than the window")
    r = log_returns(x)
    out = np.full(x.size, np.nan)
    out[1:] = _rolling_std(r, window)
    return out


def true_range(high, low, close) -> np.ndarray:
    h = _as_array(high)
    l = _as_array(low)
    c = _as_array(close)
    if not (h.shape == l.shape == c.shape):
        raise ValueError("high, low, close must align")
    tr = h - l
    if h.size > 1:
        prev = c[:-1]
        tr = np.concatenate([
            tr[:1],
            np.maximum(tr[1:], np.maximum(np.abs(h[1:] - prev),
                                          np.abs(l[1:] - prev))),
        ])
    return tr


def atr(high, low, close, window: int = ATR_WINDOW) -> np.ndarray:
    tr = true_range(high, low, close)
    if tr.size <= window:
        raise ValueError("series must be longer than the window")
    return _rolling_mean(tr, window)


def bollinger(
    close, window: int = BOLLINGER_WINDOW, k: float = BOLLINGER_K
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Percentage distances relative to the mid band (SMA): band width,
    upper minus close, close minus lower. NaN where the mid band is 0."""
    x = _as_array(close)
    if x.size <= window:
        raise ValueError("series must be longer than the window")
    mid = _rolling_mean(x, window)
    sd = _rolling_std(x, window)
    upper = mid + k * sd
    lower = mid - k * sd
    with np.errstate(invalid="ignore", divide="ignore"):
        denom = np.where(mid == 0.0, np.nan, mid)
        width = (upper - lower) / denom * 100.0
        to_upper = (upper - x) / denom * 100.0
        to_lower = (x - lower) / denom * 100.0
    return width, to_upper, to_lower


def price_trend_and_range(bar: CandleBar) -> tuple[float, float]:
    return bar.close - bar.open, bar.high - bar.low


def compute_ta_features(bars: Sequence[CandleBar]) -> pd.DataFrame:
    """One row per candle, columns ordered as TA_COLUMNS."""
    if not bars:
        raise ValueError("no candles given")
    dates = [b.date for b in bars]
    o = np.array([b.open for b in bars], dtype=np.float64)
    h = np.array([b.high for b in bars], dtype=np.float64)
    l = np.array([b.low for b in bars], dtype=np.float64)
    c = np.array([b.close for b in bars], dtype=np.float64)
    v = np.array([b.volume for b in bars], dtype=np.float64)

    macd_line, macd_sig = macd(c)
    width, to_upper, to_lower = bollinger(c)
    cols = {
        "price_trend": c - o,
        "ema_7": ema(c, 7),
        "ema_25": ema(c, 25),
        "ema_99": ema(c, 99),
        "macd": macd_line,
        "macd_signal": macd_sig,
        "rsi": rsi(c),
        "volume": v,
        "volume_trend": pct_change(v),
        "obv": obv(c, v),
        "volatility_7": volatility(c, 7),
        "volatility_14": volatility(c, 14),
        "volatility_21": volatility(c, 21),
        "atr": atr(h, l, c),
        "price_range": h - l,
        "bb_width_pct": width,
        "bb_close_to_upper_pct": to_upper,
        "bb_close_to_lower_pct": to_lower,
    }
    df = pd.DataFrame(cols, index=pd.Index(dates, name="date"))
    return df[list(TA_COLUMNS)]
