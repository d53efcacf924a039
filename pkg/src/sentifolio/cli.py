"""``sentifolio`` command-line entry point.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 runtime or
solver error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import backtest, indicators, market_data, report, sentiment, verifier
from .config import RunConfig, load_config
from .errors import ConfigError, DataError, SentifolioError
from .optimizer import Moments, solve

log = logging.getLogger("sentifolio")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
COMMANDS = ("ingest", "indicators", "sentiment", "optimize", "backtest", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default, which means "data error" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sentifolio", description="Sentiment-adjusted mean-variance crypto portfolios.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    parser.add_argument("--equal-weight-mode", choices=backtest.EQUAL_WEIGHT_MODES,
                        help="equal-weight benchmark: daily rebalanced or buy-and-hold")
    parser.add_argument("--mu", type=Path, help="optimize: mean-return CSV (asset,mu)")
    parser.add_argument("--sigma", type=Path, help="optimize: covariance CSV with an asset header row")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


# ---------------------------------------------------------------------------
# Cache access
# ---------------------------------------------------------------------------


def _cache_files(cfg: RunConfig) -> tuple[Path, Path]:
    return cfg.cache_dir / "candles.csv", cfg.cache_dir / "news.csv"


def _restrict(series: market_data.PriceSeries, cfg: RunConfig) -> market_data.PriceSeries:
    candles = tuple(c for c in series.candles
                    if (cfg.start is None or c.date >= cfg.start) and (cfg.end is None or c.date <= cfg.end))
    if not candles:
        raise DataError(f"{series.asset}: no candles in the configured date range")
    return market_data.PriceSeries(series.asset, candles)


def _load_cached(cfg: RunConfig) -> tuple[dict[str, market_data.PriceSeries], list[market_data.NewsItem]]:
    candles_path, news_path = _cache_files(cfg)
    if not candles_path.is_file():
        raise DataError(f"no ingested data at {candles_path}; run `sentifolio ingest` first")
    prices = market_data.load_candles_csv(candles_path)
    missing = [a for a in cfg.assets if a not in prices]
    if missing:
        raise DataError(f"{candles_path}: no candles for {', '.join(missing)}")
    news = market_data.load_news_csv(news_path, cfg.assets).items if news_path.is_file() else []
    return {a: prices[a] for a in cfg.assets}, news


def _lexicon(cfg: RunConfig) -> sentiment.Lexicon:
    if cfg.sentiment.lexicon is None and cfg.sentiment.emoji_lexicon is None:
        return sentiment.default_lexicon()
    lex = cfg.sentiment.lexicon and cfg.path(cfg.sentiment.lexicon)
    emoji = cfg.sentiment.emoji_lexicon and cfg.path(cfg.sentiment.emoji_lexicon)
    for p in (lex, emoji):
        if p and not p.is_file():
            raise DataError(f"lexicon file not found: {p}")
    return sentiment.load_lexicon(lex or None, emoji or None)


def _daily_sentiment(cfg: RunConfig, news: list[market_data.NewsItem]) -> list[sentiment.DailySentiment]:
    return sentiment.aggregate_daily(sentiment.score_news(news, _lexicon(cfg)))


def cached_panel(cfg: RunConfig) -> market_data.Panel:
    prices, news = _load_cached(cfg)
    return market_data.align_panel(prices, _daily_sentiment(cfg, news), cfg.assets)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_ingest(cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    """Normalize raw inputs into ``<cache_dir>/candles.csv`` and ``news.csv``."""
    if cfg.data.source == "csv":
        if not cfg.data.candles_csv:
            raise ConfigError("data.candles_csv is required for the csv source")
        raw = market_data.load_candles_csv(cfg.path(cfg.data.candles_csv))
        missing = [a for a in cfg.assets if a not in raw]
        if missing:
            raise DataError(f"{cfg.path(cfg.data.candles_csv)}: no candles for {', '.join(missing)}")
        prices = {a: _restrict(raw[a], cfg) for a in cfg.assets}
        news: list[market_data.NewsItem] = []
        if cfg.data.news_csv:
            loaded = market_data.load_news_csv(cfg.path(cfg.data.news_csv), cfg.assets, (cfg.start, cfg.end))
            news = loaded.items
            if loaded.skipped:
                log.warning("skipped news rows: %s", dict(sorted(loaded.skipped.items())))
    else:
        if cfg.start is None or cfg.end is None:
            raise ConfigError("the api source needs start and end dates")
        transport = None
        if cfg.data.mock_fixture:
            fixture = cfg.path(cfg.data.mock_fixture)
            if not fixture.is_file():
                raise DataError(f"mock fixture not found: {fixture}")
            transport = market_data.FixtureTransport.from_file(fixture)
        raw_dir = cfg.cache_dir / "raw"
        prices, news = {}, []
        for a in cfg.assets:
            prices[a] = market_data.fetch_remote(cfg.api, a, cfg.start, cfg.end, "candles",
                                                 transport=transport, cache_dir=raw_dir)
            if len(prices[a]) == 0:
                raise DataError(f"{a}: the API returned no candles for {cfg.start}..{cfg.end}")
            news.extend(market_data.fetch_remote(cfg.api, a, cfg.start, cfg.end, "news",
                                                 transport=transport, cache_dir=raw_dir))
    news.sort(key=lambda n: (n.date, n.asset))
    candles_path, news_path = _cache_files(cfg)
    market_data.save_candles_csv(prices, candles_path)
    market_data.save_news_csv(news, news_path)
    log.info("cached %d assets and %d news items", len(prices), len(news))
    return [candles_path, news_path]


def cmd_indicators(cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    prices, _ = _load_cached(cfg)
    path = cfg.out_dir / "indicators.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "asset", "rsi", "sma"])
        for a, s in prices.items():
            rsi = indicators.rsi(s.closes, cfg.indicators.rsi_period)
            sma = indicators.sma(s.closes, cfg.indicators.sma_period)
            for d, r, m in zip(s.dates, rsi, sma):
                writer.writerow([d.isoformat(), a, _fmt(r), _fmt(m)])
    return [path]


def cmd_sentiment(cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    _, news = _load_cached(cfg)
    path = cfg.out_dir / "sentiment.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "asset", "mean_compound", "article_count"])
        for row in _daily_sentiment(cfg, news):
            writer.writerow([row.date.isoformat(), row.asset, repr(row.mean_compound), row.article_count])
    return [path]


def read_mu_csv(path: Path) -> dict[str, float]:
    if not path.is_file():
        raise DataError(f"mu file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["asset", "mu"]:
            raise DataError(f"{path}:1: expected header asset,mu")
        out: dict[str, float] = {}
        for row in reader:
            if not row:
                continue
            if len(row) != 2 or row[0] in out:
                raise DataError(f"{path}:{reader.line_num}: bad or duplicate row")
            try:
                out[row[0]] = float(row[1])
            except ValueError:
                raise DataError(f"{path}:{reader.line_num}: bad number {row[1]!r}") from None
    if not out:
        raise DataError(f"{path}: no assets")
    return out


def read_sigma_csv(path: Path, assets: Sequence[str]) -> np.ndarray:
    """Covariance CSV: header ``asset,A,B,...`` then one row per asset."""
    if not path.is_file():
        raise DataError(f"sigma file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "asset" or sorted(header[1:]) != sorted(assets):
            raise DataError(f"{path}:1: header must be asset followed by {', '.join(assets)}")
        cols = header[1:]
        rows: dict[str, list[float]] = {}
        for row in reader:
            if not row:
                continue
            if len(row) != len(header) or row[0] not in assets or row[0] in rows:
                raise DataError(f"{path}:{reader.line_num}: bad or duplicate row")
            try:
                rows[row[0]] = [float(x) for x in row[1:]]
            except ValueError:
                raise DataError(f"{path}:{reader.line_num}: non-numeric entry") from None
    if set(rows) != set(assets):
        raise DataError(f"{path}: expected one row per asset")
    idx = [cols.index(a) for a in assets]
    return np.array([[rows[a][k] for k in idx] for a in assets])


def cmd_optimize(cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    mu_path = args.mu or (cfg.optimize.mu_csv and cfg.path(cfg.optimize.mu_csv))
    sigma_path = args.sigma or (cfg.optimize.sigma_csv and cfg.path(cfg.optimize.sigma_csv))
    if not mu_path or not sigma_path:
        raise ConfigError("optimize needs mu and sigma CSVs (--mu/--sigma or optimize.mu_csv/sigma_csv)")
    mu = read_mu_csv(Path(mu_path))
    assets = list(mu)
    sigma = read_sigma_csv(Path(sigma_path), assets)
    try:
        moments = Moments(np.array([mu[a] for a in assets]), sigma)
    except ValueError as exc:
        raise DataError(f"{sigma_path}: {exc}") from None
    weights = solve(moments, cfg.solver)
    path = cfg.out_dir / "weights.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["asset", "weight"])
        for a, w in zip(assets, weights):
            writer.writerow([a, repr(float(w))])
    return [path]


def cmd_backtest(cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    bt = cfg.backtest_config()
    if args.equal_weight_mode:
        bt = dataclasses.replace(bt, equal_weight_mode=args.equal_weight_mode)
    result = backtest.run(cached_panel(cfg), bt)
    extra = {
        "assets": list(cfg.assets),
        "train_window": bt.train_window,
        "test_horizon": bt.test_horizon,
        "risk_aversion": bt.solver.risk_aversion,
        "max_weight": bt.solver.max_weight,
        "use_boosts": bt.use_boosts,
        "equal_weight_mode": bt.equal_weight_mode,
    }
    return list(report.write_report(result, cfg.out_dir, extra).values())


def cmd_verify(cfg: RunConfig, args: argparse.Namespace) -> list[Path]:
    transport = verifier.make_transport(cfg.llm.verifier(), cfg.base_dir)
    _, news = _load_cached(cfg)
    lex = _lexicon(cfg)
    items = [(item, sentiment.score_text(item.text, lex).compound) for item in news]
    path = cfg.out_dir / cfg.llm.output
    stamp = cfg.llm.fixed_timestamp
    verifier.verify_batch(items, transport, cfg.llm.verifier(), out_path=path,
                          **({"now": lambda: stamp} if stamp else {}))
    return [path]


_HANDLERS = {
    "ingest": cmd_ingest, "indicators": cmd_indicators, "sentiment": cmd_sentiment,
    "optimize": cmd_optimize, "backtest": cmd_backtest, "verify": cmd_verify,
}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_RUNTIME


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=str(args.out.resolve()))
        written = _HANDLERS[args.command](cfg, args)
    except SentifolioError as exc:
        print(f"sentifolio {args.command}: {exc}", file=sys.stderr)
        return exit_code(exc)
    except Exception as exc:  # anything unexpected is a runtime failure, not a crash dump
        log.debug("unhandled error", exc_info=True)
        print(f"sentifolio {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in written:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
