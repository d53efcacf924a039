import csv
import json
import sys
from datetime import date
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

from make_demo_data import write_demo  # noqa: E402
from sentifolio.cli import main  # noqa: E402
from sentifolio.synthetic import api_payloads, generate_candles, generate_news  # noqa: E402


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo")
    config = write_demo(root, n_days=230)
    assert main(["ingest", "--config", str(config)]) == 0
    return config


def _edit(config: Path, tmp_path: Path, **changes) -> Path:
    raw = json.loads(config.read_text())
    for key, value in changes.items():
        if isinstance(value, dict):
            raw.setdefault(key, {}).update(value)
        else:
            raw[key] = value
    raw["data"]["cache_dir"] = str(config.parent / "cache")
    for key in ("candles_csv", "news_csv"):
        raw["data"][key] = str(config.parent / raw["data"][key])
    raw["llm"]["mock_responses"] = str(config.parent / "gemini_mock.json")
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


def test_ingest_is_idempotent(demo):
    cache = demo.parent / "cache"
    before = {p.name: p.read_bytes() for p in cache.iterdir() if p.is_file()}
    assert main(["ingest", "--config", str(demo)]) == 0
    assert {p.name: p.read_bytes() for p in cache.iterdir() if p.is_file()} == before
    assert set(before) == {"candles.csv", "news.csv"}


def test_backtest_outputs_and_determinism(demo, tmp_path, capsys):
    assert main(["backtest", "--config", str(demo), "--out", str(tmp_path / "a")]) == 0
    assert main(["backtest", "--config", str(demo), "--out", str(tmp_path / "b")]) == 0
    doc = json.loads((tmp_path / "a" / "metrics.json").read_text())
    assert {k: len(v) for k, v in doc["series"].items()} == {"strategy": 3, "equal_weight": 3, "btc": 3}
    for name in ("metrics.json", "backtest.csv", "wealth.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = next(csv.reader((tmp_path / "a" / "backtest.csv").open()))
    assert header == ["date", "strategy_ret", "btc_ret", "ew_ret", "w_BTC", "w_ETH", "w_ADA", "w_BNB", "w_XRP"]
    assert str(tmp_path / "a" / "metrics.json") in capsys.readouterr().out


def test_equal_weight_flag(demo, tmp_path):
    assert main(["backtest", "--config", str(demo), "--out", str(tmp_path), "--equal-weight-mode", "buyhold"]) == 0
    assert json.loads((tmp_path / "metrics.json").read_text())["equal_weight_mode"] == "buyhold"


def test_indicators_and_sentiment_csv(demo, tmp_path):
    assert main(["indicators", "--config", str(demo), "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "indicators.csv").open()))
    assert rows[0]["rsi"] == "" and rows[14]["rsi"] != "" and rows[13]["sma"] != ""
    assert main(["sentiment", "--config", str(demo), "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "sentiment.csv").open()))
    assert rows and all(-1 <= float(r["mean_compound"]) <= 1 and int(r["article_count"]) >= 1 for r in rows)


def test_optimize(tmp_path):
    (tmp_path / "mu.csv").write_text("asset,mu\nA,0.01\nB,0.02\n")
    (tmp_path / "sigma.csv").write_text("asset,B,A\nA,0,0\nB,0,0\n")
    (tmp_path / "c.json").write_text(json.dumps({"solver": {"max_weight": 0.7}}))
    assert main(["optimize", "--config", str(tmp_path / "c.json"), "--mu", str(tmp_path / "mu.csv"),
                 "--sigma", str(tmp_path / "sigma.csv"), "--out", str(tmp_path)]) == 0
    rows = list(csv.reader((tmp_path / "weights.csv").open()))
    assert rows[0] == ["asset", "weight"]
    assert [(a, round(float(w), 12)) for a, w in rows[1:]] == [("A", 0.3), ("B", 0.7)]


def test_verify_with_mock(demo, tmp_path):
    assert main(["verify", "--config", str(demo), "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--config", str(demo), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "verification.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "verification.jsonl").read_bytes()
    rows = [json.loads(line) for line in a.decode().splitlines()]
    assert rows and {r["recommendation"] for r in rows} <= {"Hold", "Decrease"}
    assert any(r["recommendation"] == "Decrease" for r in rows)


def test_verify_live_without_key(demo, tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("GEMINI_API_KEY", raising=False)
    cfg = _edit(demo, tmp_path, llm={"transport": "live"})
    assert main(["verify", "--config", str(cfg)]) == 1
    assert "GEMINI_API_KEY" in capsys.readouterr().err


def test_verify_empty_news(tmp_path):
    root = tmp_path / "d"
    config = write_demo(root, n_days=20)
    (root / "news.csv").write_text("date,asset,title,body\n")
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["verify", "--config", str(config)]) == 0
    assert (root / "out" / "verification.jsonl").read_bytes() == b""


def test_ingest_from_mock_api(tmp_path):
    start = date(2022, 1, 1)
    series = generate_candles(("BTC", "ETH"), start, 40, seed=3)
    news = generate_news(("BTC", "ETH"), start, 40, seed=3)
    (tmp_path / "api.json").write_text(json.dumps(api_payloads(series, news)))
    (tmp_path / "c.json").write_text(json.dumps({
        "assets": ["BTC", "ETH"], "start": "2022-01-05", "end": "2022-02-05",
        "data": {"source": "api", "mock_fixture": "api.json"}, "api": {"rate_limit_delay": 0},
    }))
    assert main(["ingest", "--config", str(tmp_path / "c.json")]) == 0
    rows = list(csv.DictReader((tmp_path / "cache" / "candles.csv").open()))
    assert len(rows) == 2 * 32 and rows[0]["date"] == "2022-01-05"
    assert float(rows[0]["close"]) == series["BTC"].candles[4].close
    news_rows = list(csv.DictReader((tmp_path / "cache" / "news.csv").open()))
    assert len(news_rows) == sum(1 for n in news if date(2022, 1, 5) <= n.date <= date(2022, 2, 5))
    assert list((tmp_path / "cache" / "raw").glob("*.json"))


@pytest.mark.parametrize("argv", [["backtest"], ["fly", "--config", "x.json"],
                                  ["backtest", "--config", "c.json", "--equal-weight-mode", "weekly"]])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_missing_config_exits_1(tmp_path, capsys):
    assert main(["backtest", "--config", str(tmp_path / "nope.json")]) == 1
    assert "nope.json" in capsys.readouterr().err


def test_missing_input_file_is_data_error(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"data": {"candles_csv": "nope.csv"}}))
    assert main(["ingest", "--config", str(tmp_path / "c.json")]) == 2
    assert "nope.csv" in capsys.readouterr().err


def test_backtest_before_ingest_is_data_error(tmp_path, capsys):
    (tmp_path / "c.json").write_text("{}")
    assert main(["backtest", "--config", str(tmp_path / "c.json")]) == 2
    assert "ingest" in capsys.readouterr().err


def test_window_longer_than_history_is_runtime_error(demo, tmp_path, capsys):
    cfg = _edit(demo, tmp_path, backtest={"train_window": 5000})
    assert main(["backtest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "5000" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"solver": {"max_weight": 7}}))
    assert main(["backtest", "--config", str(tmp_path / "c.json")]) == 1
