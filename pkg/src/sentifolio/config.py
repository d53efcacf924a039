"""Run configuration: one JSON file, strict keys, paths relative to the file."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Mapping

from .backtest import BacktestConfig
from .errors import ConfigError
from .market_data import DEFAULT_UNIVERSE, ApiConfig
from .optimizer import SolverConfig
from .signals import BoostScales
from .verifier import VerifierConfig


@dataclass(frozen=True)
class DataConfig:
    source: str = "csv"  # "csv" or "api"
    candles_csv: str | None = None
    news_csv: str | None = None
    cache_dir: str = "cache"
    # api source only: answer requests from a recorded payload file instead of the network
    mock_fixture: str | None = None

    def __post_init__(self) -> None:
        if self.source not in ("csv", "api"):
            raise ValueError("data.source must be 'csv' or 'api'")


@dataclass(frozen=True)
class IndicatorConfig:
    rsi_period: int = 14
    sma_period: int = 14

    def __post_init__(self) -> None:
        if self.rsi_period < 1 or self.sma_period < 1:
            raise ValueError("indicator periods must be positive")


@dataclass(frozen=True)
class BoostConfig:
    enabled: bool = True
    rsi: float = 0.005
    sma: float = 0.005
    sentiment: float = 0.01
    sentiment_mode: str = "window"


@dataclass(frozen=True)
class BacktestSection:
    train_window: int = 180
    test_horizon: int = 1
    benchmark_asset: str = "BTC"
    equal_weight_mode: str = "rebalanced"


@dataclass(frozen=True)
class SentimentConfig:
    lexicon: str | None = None  # None uses the bundled lexicon
    emoji_lexicon: str | None = None


@dataclass(frozen=True)
class OptimizeConfig:
    mu_csv: str | None = None
    sigma_csv: str | None = None


@dataclass(frozen=True)
class LlmConfig(VerifierConfig):
    output: str = "verification.jsonl"
    # pin record timestamps so reruns are byte-identical
    fixed_timestamp: str | None = None

    def verifier(self) -> VerifierConfig:
        names = {f.name for f in dataclasses.fields(VerifierConfig)}
        return VerifierConfig(**{k: v for k, v in dataclasses.asdict(self).items() if k in names})


@dataclass(frozen=True)
class RunConfig:
    assets: tuple[str, ...] = DEFAULT_UNIVERSE
    start: date | None = None
    end: date | None = None
    data: DataConfig = field(default_factory=DataConfig)
    api: ApiConfig = field(default_factory=ApiConfig)
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    boosts: BoostConfig = field(default_factory=BoostConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    backtest: BacktestSection = field(default_factory=BacktestSection)
    sentiment: SentimentConfig = field(default_factory=SentimentConfig)
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    llm: LlmConfig = field(default_factory=LlmConfig)
    output_dir: str = "out"
    seed: int = 0  # synthetic data only
    base_dir: Path = field(default=Path("."), compare=False)

    def __post_init__(self) -> None:
        if not self.assets or len(set(self.assets)) != len(self.assets):
            raise ValueError("assets must be a non-empty list of distinct symbols")
        if self.start and self.end and self.end < self.start:
            raise ValueError("end precedes start")

    def path(self, relative: str | Path) -> Path:
        p = Path(relative)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def cache_dir(self) -> Path:
        return self.path(self.data.cache_dir)

    @property
    def out_dir(self) -> Path:
        return self.path(self.output_dir)

    def backtest_config(self) -> BacktestConfig:
        return BacktestConfig(
            train_window=self.backtest.train_window,
            test_horizon=self.backtest.test_horizon,
            solver=self.solver,
            boosts=BoostScales(self.boosts.rsi, self.boosts.sma, self.boosts.sentiment),
            use_boosts=self.boosts.enabled,
            rsi_period=self.indicators.rsi_period,
            sma_period=self.indicators.sma_period,
            sentiment_mode=self.boosts.sentiment_mode,
            benchmark_asset=self.backtest.benchmark_asset,
            equal_weight_mode=self.backtest.equal_weight_mode,
        )


_SECTIONS = {
    "data": DataConfig, "api": ApiConfig, "indicators": IndicatorConfig, "boosts": BoostConfig,
    "solver": SolverConfig, "backtest": BacktestSection, "sentiment": SentimentConfig,
    "optimize": OptimizeConfig, "llm": LlmConfig,
}


def _build(cls, raw: Any, where: str):
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _date(raw: Any, key: str) -> date | None:
    if raw is None:
        return None
    try:
        return date.fromisoformat(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected YYYY-MM-DD, got {raw!r}") from None


def config_from_dict(raw: Mapping[str, Any], base_dir: str | Path = ".") -> RunConfig:
    """Validate a parsed config document; every omitted key takes its default."""
    if not isinstance(raw, Mapping):
        raise ConfigError("config root must be an object")
    top = {"assets", "start", "end", "output_dir", "seed", *_SECTIONS}
    unknown = sorted(set(raw) - top)
    if unknown:
        raise ConfigError(f"unknown config key(s) {', '.join(unknown)}")
    kwargs: dict[str, Any] = {name: _build(cls, raw[name], name) for name, cls in _SECTIONS.items() if name in raw}
    if "assets" in raw:
        if not isinstance(raw["assets"], list) or not all(isinstance(a, str) and a for a in raw["assets"]):
            raise ConfigError("assets: expected a list of symbols")
        kwargs["assets"] = tuple(raw["assets"])
    for key in ("start", "end"):
        if key in raw:
            kwargs[key] = _date(raw[key], key)
    if "output_dir" in raw:
        kwargs["output_dir"] = str(raw["output_dir"])
    if "seed" in raw:
        if not isinstance(raw["seed"], int):
            raise ConfigError("seed: expected an integer")
        kwargs["seed"] = raw["seed"]
    try:
        cfg = RunConfig(base_dir=Path(base_dir), **kwargs)
        cfg.backtest_config()  # surfaces invalid combinations at load time
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{path}: config file not found") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    return config_from_dict(raw, path.parent)
