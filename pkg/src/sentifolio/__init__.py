"""Sentiment- and indicator-adjusted mean-variance portfolios for crypto assets."""
from .backtest import BacktestConfig, BacktestReport, run
from .errors import BacktestError, ConfigError, DataError, SentifolioError, SolverError
from .market_data import Panel, align_panel, load_candles_csv, load_news_csv
from .metrics import cumulative_return, max_drawdown, sharpe, summarize
from .optimizer import Moments, SolverConfig, solve
from .sentiment import score_text
from .signals import BoostScales, adjust_mu, compute_boosts
from .verifier import build_prompt, parse_recommendation, verify_batch

__version__ = "0.1.0"

__all__ = [
    "BacktestConfig", "BacktestError", "BacktestReport", "BoostScales", "ConfigError", "DataError",
    "Moments", "Panel", "SentifolioError", "SolverConfig", "SolverError", "adjust_mu", "align_panel",
    "build_prompt", "compute_boosts", "cumulative_return", "load_candles_csv", "load_news_csv",
    "max_drawdown", "parse_recommendation", "run", "score_text", "sharpe", "solve", "summarize",
    "verify_batch",
]
