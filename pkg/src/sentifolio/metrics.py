"""Performance metrics on daily simple-return series."""
from __future__ import annotations

import decimal
import math
from dataclasses import asdict, dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

TRADING_DAYS = 252


@dataclass(frozen=True)
class MetricSummary:
    cumulative_return: float
    sharpe: float | None  # None when the series has zero variance
    max_drawdown: float

    def to_dict(self) -> dict:
        return asdict(self)


def _as_returns(returns: Sequence[float] | np.ndarray) -> np.ndarray:
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1:
        raise ValueError("returns must be one-dimensional")
    if np.any(r <= -1.0):
        raise ValueError("returns must be > -1")
    return r


def cumulative_return(returns: Sequence[float] | np.ndarray) -> float:
    """Compounded growth minus one, e.g. 1.5 means wealth grew 2.5-fold.

    Each return is read as the shortest decimal that round-trips to it (0.1 is
    one tenth, not the nearest binary fraction) and the product is formed in
    50-digit decimal arithmetic, so the result is the correctly rounded value of
    the decimal computation: ``cumulative_return([0.1, 0.1]) == 0.21``.
    """
    r = _as_returns(returns)
    with decimal.localcontext() as ctx:
        ctx.prec = 50
        growth = Decimal(1)
        for x in r.tolist():
            growth *= 1 + Decimal(repr(x))
        return float(growth - 1)


def sharpe(returns: Sequence[float] | np.ndarray, periods_per_year: int = TRADING_DAYS) -> float:
    """Annualized mean over sample standard deviation, with no risk-free deduction."""
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise ValueError("Sharpe ratio needs at least 2 returns")
    sd = r.std(ddof=1)
    if not sd > 0:
        raise ValueError("Sharpe ratio undefined for zero-variance returns")
    return float(r.mean() / sd * math.sqrt(periods_per_year))


def max_drawdown(returns: Sequence[float] | np.ndarray) -> float:
    """Worst peak-to-trough decline of the wealth path, which starts at 1."""
    r = _as_returns(returns)
    wealth = np.concatenate(([1.0], np.cumprod(1.0 + r)))
    peaks = np.maximum.accumulate(wealth)
    return float(min(0.0, np.min(wealth / peaks - 1.0)))


def summarize(returns: Sequence[float] | np.ndarray, periods_per_year: int = TRADING_DAYS) -> MetricSummary:
    try:
        s = sharpe(returns, periods_per_year)
    except ValueError:
        s = None
    return MetricSummary(cumulative_return(returns), s, max_drawdown(returns))
