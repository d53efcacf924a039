"""Walk-forward backtest: fit on a trailing window, trade the next day, slide.

Date ``t`` earns the close-to-close return from ``t-1`` to ``t`` using weights
chosen from information dated strictly before ``t``: the trailing window of
returns, indicators as of ``t-1`` and news dated up to ``t-1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import BacktestError, SolverError
from .indicators import rsi_matrix, sma_matrix
from .market_data import Panel, simple_returns
from .metrics import MetricSummary, summarize
from .optimizer import Moments, SolverConfig, estimate_moments, solve
from .signals import BoostScales, adjust_mu, compute_boosts

log = logging.getLogger(__name__)

SENTIMENT_MODES = ("window", "last_day")
EQUAL_WEIGHT_MODES = ("rebalanced", "buyhold")


@dataclass(frozen=True)
class BacktestConfig:
    train_window: int = 180
    test_horizon: int = 1
    solver: SolverConfig = field(default_factory=SolverConfig)
    boosts: BoostScales = field(default_factory=BoostScales)
    use_boosts: bool = True
    rsi_period: int = 14
    sma_period: int = 14
    sentiment_mode: str = "window"
    benchmark_asset: str = "BTC"
    equal_weight_mode: str = "rebalanced"

    def __post_init__(self) -> None:
        if self.train_window < 2:
            raise ValueError("train_window must be >= 2")
        if self.test_horizon < 1:
            raise ValueError("test_horizon must be >= 1")
        if self.sentiment_mode not in SENTIMENT_MODES:
            raise ValueError(f"sentiment_mode must be one of {SENTIMENT_MODES}")
        if self.equal_weight_mode not in EQUAL_WEIGHT_MODES:
            raise ValueError(f"equal_weight_mode must be one of {EQUAL_WEIGHT_MODES}")
        if self.rsi_period < 1 or self.sma_period < 1:
            raise ValueError("indicator periods must be positive")


@dataclass(frozen=True, eq=False)
class BacktestReport:
    dates: tuple[date, ...]
    assets: tuple[str, ...]
    strategy_returns: np.ndarray
    weights: np.ndarray  # one row per out-of-sample date
    adjusted_mu: np.ndarray
    equal_weight_returns: np.ndarray
    btc_returns: np.ndarray | None
    metrics: dict[str, MetricSummary]

    def __len__(self) -> int:
        return len(self.dates)


def _first_trade_index(config: BacktestConfig) -> int:
    # train_window returns need train_window + 1 prices before the first traded day
    return config.train_window + 1


def _check_length(panel: Panel, config: BacktestConfig) -> int:
    first = _first_trade_index(config)
    if len(panel) < first + 1:
        raise BacktestError(
            f"panel has {len(panel)} dates; a {config.train_window}-day window needs at least {first + 1}"
        )
    return first


def _window_sentiment(panel: Panel, lo: int, hi: int) -> np.ndarray:
    """Article-weighted mean compound per asset over panel rows [lo, hi); NaN if no news."""
    counts = panel.article_counts[lo:hi].astype(float)
    values = np.where(counts > 0, panel.sentiment[lo:hi], 0.0)
    total = counts.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = (values * counts).sum(axis=0) / total
    mean = np.where(total > 0, mean, np.nan)
    # guard against rounding pushing a mean of in-range values past +-1
    return np.clip(mean, -1.0, 1.0)


def benchmark_btc(panel: Panel, start: int = 1, asset: str = "BTC") -> np.ndarray:
    """Buy-and-hold returns of ``asset`` for panel rows ``start..end``."""
    if asset not in panel.assets:
        raise BacktestError(f"benchmark asset {asset} not in panel")
    closes = panel.closes[start - 1:, panel.index(asset)]
    return simple_returns(closes)


def benchmark_equal_weight(panel: Panel, start: int = 1, mode: str = "rebalanced") -> np.ndarray:
    """Equal-weight portfolio returns for panel rows ``start..end``.

    ``rebalanced`` resets to 1/N every day; ``buyhold`` splits capital once at
    the close before ``start`` and lets the weights drift.
    """
    if len(panel.assets) == 0 or len(panel) < 2:
        raise BacktestError("equal-weight benchmark needs a non-empty panel")
    closes = panel.closes[start - 1:]
    if mode == "rebalanced":
        return simple_returns(closes).mean(axis=1)
    if mode == "buyhold":
        wealth = (closes / closes[0]).mean(axis=1)
        return simple_returns(wealth)
    raise ValueError(f"unknown equal-weight mode {mode!r}")


def decide(panel: Panel, t: int, config: BacktestConfig, rsi=None, sma=None) -> tuple[np.ndarray, np.ndarray]:
    """Weights (and adjusted means) for trading panel row ``t``.

    Only rows ``< t`` are read. ``rsi``/``sma`` may be precomputed on the full
    panel, which is safe because both indicators are causal.
    """
    w_len = config.train_window
    if t < _first_trade_index(config) or t >= len(panel):
        raise IndexError(f"row {t} cannot be traded with a {w_len}-day window")
    returns = simple_returns(panel.closes[t - 1 - w_len:t])
    moments = estimate_moments(returns)
    mu = moments.mu
    if config.use_boosts:
        if rsi is None:
            rsi = rsi_matrix(panel.closes[:t], config.rsi_period)
        if sma is None:
            sma = sma_matrix(panel.closes[:t], config.sma_period)
        if config.sentiment_mode == "window":
            sent = _window_sentiment(panel, t - w_len, t)
        else:
            sent = _window_sentiment(panel, t - 1, t)
        prev = t - 1
        boosts = {
            a: compute_boosts(rsi[prev, j], panel.closes[prev, j], sma[prev, j], sent[j], config.boosts)
            for j, a in enumerate(panel.assets)
        }
        adjusted = adjust_mu(dict(zip(panel.assets, mu.tolist())), boosts)
        mu = np.array([adjusted[a] for a in panel.assets])
    weights = solve(Moments(mu, moments.sigma), config.solver)
    return weights, mu


def run(panel: Panel, config: BacktestConfig = BacktestConfig()) -> BacktestReport:
    first = _check_length(panel, config)
    returns = simple_returns(panel.closes)  # row k is the return dated panel row k+1
    rsi = rsi_matrix(panel.closes, config.rsi_period) if config.use_boosts else None
    sma = sma_matrix(panel.closes, config.sma_period) if config.use_boosts else None

    n_days = len(panel) - first
    n_assets = len(panel.assets)
    weights = np.empty((n_days, n_assets))
    adjusted = np.empty((n_days, n_assets))
    strategy = np.empty(n_days)
    w = mu = None
    for k, t in enumerate(range(first, len(panel))):
        if k % config.test_horizon == 0:
            try:
                w, mu = decide(panel, t, config, rsi, sma)
            except SolverError as exc:
                raise BacktestError(f"solver failed on day {t} ({panel.dates[t]}): {exc}") from exc
        weights[k] = w
        adjusted[k] = mu
        strategy[k] = float(w @ returns[t - 1])

    ew = benchmark_equal_weight(panel, first, config.equal_weight_mode)
    btc = None
    if config.benchmark_asset in panel.assets:
        btc = benchmark_btc(panel, first, config.benchmark_asset)
    else:
        log.warning("benchmark asset %s not in panel; skipping buy-and-hold benchmark", config.benchmark_asset)

    metrics = {"strategy": summarize(strategy), "equal_weight": summarize(ew)}
    if btc is not None:
        metrics["btc"] = summarize(btc)
    return BacktestReport(
        dates=panel.dates[first:],
        assets=panel.assets,
        strategy_returns=strategy,
        weights=weights,
        adjusted_mu=adjusted,
        equal_weight_returns=ew,
        btc_returns=btc,
        metrics=metrics,
    )
