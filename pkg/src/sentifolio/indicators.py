"""14-day RSI (Wilder smoothing) and simple moving average.

Undefined warm-up values are NaN, never 0.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

DEFAULT_PERIOD = 14


def _check_period(period: int) -> None:
    if int(period) != period or period < 1:
        raise ValueError(f"period must be a positive integer, got {period!r}")


def sma(closes: Sequence[float] | np.ndarray, period: int = DEFAULT_PERIOD) -> np.ndarray:
    """Trailing mean of the last ``period`` closes; NaN for the first ``period - 1`` points."""
    _check_period(period)
    x = np.asarray(closes, dtype=float)
    out = np.full(x.shape, np.nan)
    if x.size >= period:
        windows = np.lib.stride_tricks.sliding_window_view(x, period)
        out[period - 1:] = windows.mean(axis=1)
    return out


def rsi(closes: Sequence[float] | np.ndarray, period: int = DEFAULT_PERIOD) -> np.ndarray:
    """Relative Strength Index with Wilder's recursive smoothing.

    The first average gain/loss is the simple mean over the first ``period``
    moves; afterwards ``avg = (prev * (period - 1) + current) / period``.
    The first ``period`` entries are NaN. A window with no losses scores 100,
    no gains 0, and neither 50.
    """
    _check_period(period)
    x = np.asarray(closes, dtype=float)
    out = np.full(x.shape, np.nan)
    if x.size < period + 1:
        return out
    moves = np.diff(x)
    gains = np.where(moves > 0, moves, 0.0)
    losses = np.where(moves < 0, -moves, 0.0)
    avg_gain = gains[:period].mean()
    avg_loss = losses[:period].mean()
    out[period] = _rsi_value(avg_gain, avg_loss)
    for t in range(period + 1, x.size):
        avg_gain = (avg_gain * (period - 1) + gains[t - 1]) / period
        avg_loss = (avg_loss * (period - 1) + losses[t - 1]) / period
        out[t] = _rsi_value(avg_gain, avg_loss)
    return out


def _rsi_value(avg_gain: float, avg_loss: float) -> float:
    if avg_loss == 0.0:
        return 50.0 if avg_gain == 0.0 else 100.0
    if avg_gain == 0.0:
        return 0.0
    return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)


def rsi_matrix(closes: np.ndarray, period: int = DEFAULT_PERIOD) -> np.ndarray:
    """Column-wise :func:`rsi` for a dates x assets close matrix."""
    closes = np.asarray(closes, dtype=float)
    return np.column_stack([rsi(closes[:, j], period) for j in range(closes.shape[1])])


def sma_matrix(closes: np.ndarray, period: int = DEFAULT_PERIOD) -> np.ndarray:
    closes = np.asarray(closes, dtype=float)
    return np.column_stack([sma(closes[:, j], period) for j in range(closes.shape[1])])
