import json
from datetime import date
from pathlib import Path

import pytest

from sentifolio.config import RunConfig, config_from_dict, load_config
from sentifolio.errors import ConfigError


def test_defaults():
    cfg = config_from_dict({})
    assert cfg.assets == ("BTC", "ETH", "ADA", "BNB", "XRP")
    bt = cfg.backtest_config()
    assert (bt.train_window, bt.test_horizon, bt.solver.risk_aversion, bt.solver.max_weight) == (180, 1, 1.0, 1.0)
    assert (bt.boosts.rsi, bt.boosts.sma, bt.boosts.sentiment) == (0.005, 0.005, 0.01)
    assert cfg.llm.requests_per_second == 1.0 and cfg.llm.max_retries == 3
    assert cfg.llm.temperature is None and cfg.llm.max_output_tokens is None


def test_sections_and_paths(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "assets": ["BTC", "ETH"], "start": "2021-01-01", "end": "2021-06-30",
        "data": {"candles_csv": "in/c.csv"}, "solver": {"max_weight": 0.6, "risk_aversion": 3},
        "boosts": {"enabled": False, "sentiment_mode": "last_day"}, "output_dir": "/abs/out",
    }))
    cfg = load_config(path)
    assert cfg.start == date(2021, 1, 1) and cfg.assets == ("BTC", "ETH")
    assert cfg.path(cfg.data.candles_csv) == tmp_path / "in" / "c.csv"
    assert cfg.out_dir == Path("/abs/out") and cfg.cache_dir == tmp_path / "cache"
    bt = cfg.backtest_config()
    assert not bt.use_boosts and bt.sentiment_mode == "last_day" and bt.solver.max_weight == 0.6


@pytest.mark.parametrize("raw, fragment", [
    ({"asets": ["BTC"]}, "asets"),
    ({"solver": {"lambda": 2}}, "solver: unknown key"),
    ({"solver": {"max_weight": 2}}, "max_weight"),
    ({"start": "2021/01/01"}, "YYYY-MM-DD"),
    ({"start": "2021-02-01", "end": "2021-01-01"}, "end precedes start"),
    ({"assets": ["BTC", "BTC"]}, "distinct"),
    ({"assets": "BTC"}, "list"),
    ({"data": {"source": "ftp"}}, "source"),
    ({"boosts": {"sentiment_mode": "ewma"}}, "sentiment_mode"),
    ({"backtest": {"train_window": 1}}, "train_window"),
    ({"llm": {"transport": "carrier pigeon"}}, "transport"),
    ({"seed": "seven"}, "seed"),
    ([], "object"),
])
def test_invalid_configs(raw, fragment):
    with pytest.raises(ConfigError, match=fragment):
        config_from_dict(raw)


def test_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{\n  'x': 1\n}")
    with pytest.raises(ConfigError, match="bad.json:2"):
        load_config(tmp_path / "bad.json")


def test_llm_section_maps_onto_verifier():
    cfg = config_from_dict({"llm": {"model": "m", "max_in_flight": 2, "output": "v.jsonl"}})
    v = cfg.llm.verifier()
    assert v.model == "m" and v.max_in_flight == 2
    assert isinstance(cfg, RunConfig)
