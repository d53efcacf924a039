import csv
import json
import xml.etree.ElementTree as ET

import numpy as np

from sentifolio import backtest
from sentifolio.report import metrics_document, render_wealth_svg, write_report
from sentifolio.synthetic import random_panel


def _report(assets=("BTC", "ETH")):
    return backtest.run(random_panel(60, assets, seed=1), backtest.BacktestConfig(train_window=20))


def test_report_files(tmp_path):
    report = _report()
    paths = write_report(report, tmp_path, {"note": "x"})
    doc = json.loads(paths["metrics"].read_text())
    assert doc["note"] == "x" and doc["n_days"] == len(report)
    numbers = [v for series in doc["series"].values() for v in series.values()]
    assert len(numbers) == 9
    rows = list(csv.reader(paths["daily"].open()))
    assert rows[0] == ["date", "strategy_ret", "btc_ret", "ew_ret", "w_BTC", "w_ETH"]
    assert len(rows) == len(report) + 1
    assert float(rows[1][1]) == report.strategy_returns[0]
    root = ET.parse(paths["chart"]).getroot()
    assert root.tag.endswith("svg")
    assert "Proposed Strategy VS. Benchmark" in paths["chart"].read_text()


def test_rerun_is_byte_identical(tmp_path):
    write_report(_report(), tmp_path / "a")
    write_report(_report(), tmp_path / "b")
    for name in ("metrics.json", "backtest.csv", "wealth.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_missing_btc_leaves_blank_column(tmp_path):
    report = _report(("ETH", "ADA"))
    paths = write_report(report, tmp_path)
    rows = list(csv.reader(paths["daily"].open()))
    assert all(r[2] == "" for r in rows[1:])
    assert set(metrics_document(report)["series"]) == {"strategy", "equal_weight"}


def test_svg_handles_flat_series():
    svg = render_wealth_svg({"strategy": np.zeros(5)}, ["start", "a", "b", "c", "d", "e"], title="A & B")
    ET.fromstring(svg)
    assert "A &amp; B" in svg
