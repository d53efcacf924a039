"""Backtest a grid of risk-aversion and weight-cap settings on one panel.

Returns, drawdowns and concentration all move with these two knobs; the table
shows by how much on the chosen data.

    python3 scripts/sweep_risk_aversion.py --config demo/config.json
    python3 scripts/sweep_risk_aversion.py --synthetic 700
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import date

from sentifolio import backtest
from sentifolio.cli import cached_panel
from sentifolio.config import load_config
from sentifolio.market_data import DEFAULT_UNIVERSE, align_panel
from sentifolio.optimizer import SolverConfig
from sentifolio.sentiment import aggregate_daily, score_news
from sentifolio.synthetic import generate_candles, generate_news


def synthetic_panel(n_days: int, seed: int):
    start = date(2020, 2, 14)
    prices = generate_candles(DEFAULT_UNIVERSE, start, n_days, seed)
    daily = aggregate_daily(score_news(generate_news(DEFAULT_UNIVERSE, start, n_days, seed)))
    return align_panel(prices, daily, DEFAULT_UNIVERSE)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="run config whose ingested cache supplies the panel")
    src.add_argument("--synthetic", type=int, metavar="DAYS", help="use a seeded synthetic panel")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lambdas", type=float, nargs="+", default=[0.5, 1, 2, 5, 10, 50])
    parser.add_argument("--caps", type=float, nargs="+", default=[1.0, 0.5, 0.35])
    parser.add_argument("--no-boosts", action="store_true")
    parser.add_argument("--json", action="store_true", help="print JSON lines instead of a table")
    args = parser.parse_args(argv)

    if args.config:
        cfg = load_config(args.config)
        panel, base = cached_panel(cfg), cfg.backtest_config()
    else:
        panel, base = synthetic_panel(args.synthetic, args.seed), backtest.BacktestConfig()
    base = dataclasses.replace(base, use_boosts=not args.no_boosts)

    if not args.json:
        print(f"{'lambda':>8} {'cap':>5} {'cum.ret':>10} {'sharpe':>8} {'mdd':>8} {'avg max w':>9}")
    for cap in args.caps:
        for lam in args.lambdas:
            config = dataclasses.replace(base, solver=SolverConfig(risk_aversion=lam, max_weight=cap))
            report = backtest.run(panel, config)
            m = report.metrics["strategy"]
            concentration = float(report.weights.max(axis=1).mean())
            if args.json:
                print(json.dumps({"risk_aversion": lam, "max_weight": cap, **m.to_dict(),
                                  "mean_max_weight": concentration}))
            else:
                sharpe = f"{m.sharpe:8.3f}" if m.sharpe is not None else f"{'n/a':>8}"
                print(f"{lam:8.2f} {cap:5.2f} {m.cumulative_return:10.4f} {sharpe} "
                      f"{m.max_drawdown:8.4f} {concentration:9.3f}")
    ew = report.metrics["equal_weight"]
    print(f"# equal weight: cum.ret {ew.cumulative_return:.4f}, mdd {ew.max_drawdown:.4f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
