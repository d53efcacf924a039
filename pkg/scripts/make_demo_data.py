"""Write a small synthetic dataset plus config for trying the CLI offline.

    python3 scripts/make_demo_data.py demo
    sentifolio ingest --config demo/config.json
    sentifolio backtest --config demo/config.json
"""
from __future__ import annotations

import argparse
import json
from datetime import date
from pathlib import Path

from sentifolio.market_data import DEFAULT_UNIVERSE, save_candles_csv, save_news_csv
from sentifolio.synthetic import generate_candles, generate_news

MOCK_REPLY = """1. **Do I agree with the score?**

Partially. The headline reads upbeat, but the article gives little concrete evidence.

2. **Interpretation:**

Short-term attention is likely; the long-term effect is unclear.

3. **Advice:**

Hold the current position and watch volume over the next few days.
"""


def write_demo(out: Path, n_days: int = 420, seed: int = 7) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    start = date(2021, 1, 1)
    save_candles_csv(generate_candles(DEFAULT_UNIVERSE, start, n_days, seed), out / "candles.csv")
    save_news_csv(generate_news(DEFAULT_UNIVERSE, start, n_days, seed, rate=0.4), out / "news.csv")
    mock = {"default": MOCK_REPLY, "responses": {"hack": MOCK_REPLY.replace("Hold the", "Decrease the")}}
    (out / "gemini_mock.json").write_text(json.dumps(mock, indent=2) + "\n", encoding="utf-8")
    config = {
        "assets": list(DEFAULT_UNIVERSE),
        "seed": seed,
        "data": {"source": "csv", "candles_csv": "candles.csv", "news_csv": "news.csv", "cache_dir": "cache"},
        "backtest": {"train_window": 180, "test_horizon": 1},
        "solver": {"risk_aversion": 1.0, "max_weight": 1.0},
        "llm": {"transport": "mock", "mock_responses": "gemini_mock.json", "requests_per_second": 1000.0,
                "fixed_timestamp": "2021-01-01T00:00:00+00:00"},
        "output_dir": "out",
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=Path, nargs="?", default=Path("demo"))
    parser.add_argument("--days", type=int, default=420)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    print(write_demo(args.out, args.days, args.seed))
