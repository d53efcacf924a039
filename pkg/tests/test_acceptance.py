"""Acceptance gate: one group of tests per criterion, summarized at the end of the run."""
from __future__ import annotations

import json
import math
import time
from datetime import date, timedelta

import numpy as np
import pytest

from oracles import trailing_mean, wilder_rsi
from sentifolio import backtest
from sentifolio.indicators import rsi, sma
from sentifolio.market_data import NewsItem
from sentifolio.metrics import cumulative_return, max_drawdown, sharpe
from sentifolio.optimizer import Moments, SolverConfig, brute_force_oracle, kkt_residual, objective, solve
from sentifolio.sentiment import score_text
from sentifolio.signals import BoostScales, adjust_mu, compute_boosts, rsi_boost, sentiment_boost, sma_boost
from sentifolio.synthetic import identical_panel, random_panel, trend_panel
from sentifolio.verifier import (AGREEMENTS, RECOMMENDATIONS, MockChatTransport, VerifierConfig,
                                 build_prompt, parse_recommendation, verify_batch)


# -- 1 ----------------------------------------------------------------------

@pytest.mark.criterion(1, "boost equations exact")
def test_boost_grid():
    began = time.perf_counter()
    rsi_expected = {0: -0.005, 25: -0.0025, 50: 0.0, 75: 0.0025, 100: 0.005}
    for value, expected in rsi_expected.items():
        assert abs(rsi_boost(float(value)) - expected) <= 1e-15
    for price, avg, expected in [(110.0, 100.0, 0.005), (90.0, 100.0, -0.005), (100.0, 100.0, -0.005),
                                 (100.0 + 1e-9, 100.0, 0.005), (1e-6, 2e-6, -0.005)]:
        assert abs(sma_boost(price, avg) - expected) <= 1e-15
    for compound in (-1.0, -0.5, 0.0, 0.5, 1.0):
        assert abs(sentiment_boost(compound) - 0.01 * compound) <= 1e-15

    for value in rsi_expected:
        for price, avg in [(110.0, 100.0), (90.0, 100.0), (100.0, 100.0)]:
            for compound in (-1.0, -0.5, 0.0, 0.5, 1.0):
                b = compute_boosts(float(value), price, avg, compound, BoostScales())
                expected = 0.01 * compound + 0.005 * (value - 50) / 50 + (0.005 if price > avg else -0.005)
                adjusted = adjust_mu({"X": 0.001}, {"X": b})["X"]
                assert abs(adjusted - (0.001 + expected)) <= 1e-15
    assert time.perf_counter() - began < 1.0


# -- 2 ----------------------------------------------------------------------

def _random_instance(rng: np.random.Generator, n: int) -> Moments:
    a = rng.normal(0.0, 0.03, (n, n))
    sigma = a @ a.T + np.diag(rng.uniform(0.0, 1e-4, n))
    mu = rng.normal(0.001, 0.01, n)
    return Moments(mu, (sigma + sigma.T) / 2)


@pytest.mark.criterion(2, "solver matches grid oracle and KKT certificate")
def test_solver_against_grid_oracle():
    began = time.perf_counter()
    rng = np.random.default_rng(20240214)
    checked = 0
    for n in (1, 2, 3):
        for lam in (0.5, 1.0, 5.0):
            for cap in (1.0, 0.5):
                if n * cap < 1:
                    continue
                for _ in range(8):
                    m = _random_instance(rng, n)
                    config = SolverConfig(risk_aversion=lam, max_weight=cap)
                    w = solve(m, config)
                    grid = brute_force_oracle(m, config, step=0.01)
                    assert objective(m, lam, w) >= objective(m, lam, grid) - 1e-4
                    assert kkt_residual(m, config, w) <= 1e-8
                    checked += 1
    assert checked >= 100
    assert time.perf_counter() - began < 30.0


# -- 3 ----------------------------------------------------------------------

@pytest.mark.criterion(3, "exchange-symmetric instances split evenly")
@pytest.mark.parametrize("var, cov, mu, lam, cap", [
    (0.0004, 0.0001, 0.001, 1.0, 1.0),
    (0.0004, -0.0003, -0.002, 5.0, 1.0),
    (0.01, 0.009, 0.0, 0.5, 0.5),
    (0.0009, 0.0, 0.05, 1.0, 0.6),
    (1e-8, 0.0, 0.003, 1.0, 1.0),
])
def test_symmetric_two_asset(var, cov, mu, lam, cap):
    m = Moments(np.array([mu, mu]), np.array([[var, cov], [cov, var]]))
    w = solve(m, SolverConfig(risk_aversion=lam, max_weight=cap))
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-6, rtol=0)


# -- 4 ----------------------------------------------------------------------

@pytest.mark.criterion(4, "RSI/SMA match independent oracle")
@pytest.mark.parametrize("seed", range(10))
def test_indicators_random_walk(seed):
    rng = np.random.default_rng(seed)
    closes = (100.0 * np.exp(np.cumsum(rng.normal(0, 0.02, 100)))).tolist()
    for got, want in ((rsi(closes, 14), wilder_rsi(closes, 14)), (sma(closes, 14), trailing_mean(closes, 14))):
        for g, w in zip(got, want):
            if w is None:
                assert math.isnan(g)
            else:
                assert abs(g - w) <= 1e-9


@pytest.mark.criterion(4, "RSI/SMA match independent oracle")
def test_monotone_series_hit_rsi_extremes():
    rising = [100.0 + k for k in range(60)]
    falling = rising[::-1]
    assert all(v == 100.0 for v in rsi(rising)[14:])
    assert all(v == 0.0 for v in rsi(falling)[14:])


# -- 5 ----------------------------------------------------------------------

@pytest.mark.criterion(5, "VADER compound matches frozen reference")
def test_vader_fixture_corpus(fixtures_dir):
    rows = json.loads((fixtures_dir / "vader_reference.json").read_text(encoding="utf-8"))
    assert len(rows) == 50
    worst = max(abs(score_text(row["text"]).compound - row["compound"]) for row in rows)
    assert worst <= 1e-4
    deviations = (fixtures_dir / "vader_deviations.md").read_text(encoding="utf-8")
    assert "None." in deviations


# -- 6 ----------------------------------------------------------------------

@pytest.mark.criterion(6, "metric identities")
def test_metric_identities():
    assert cumulative_return([0.1, 0.1]) == 0.21
    wealth = np.array([1.0, 1.2, 0.9, 1.5])
    assert abs(max_drawdown(wealth[1:] / wealth[:-1] - 1.0) - (-0.25)) <= 1e-12
    assert abs(sharpe([0.01, 0.02, 0.03]) - 2 * math.sqrt(252)) <= 1e-9


# -- 7 ----------------------------------------------------------------------

@pytest.mark.criterion(7, "end-to-end synthetic backtest")
@pytest.mark.parametrize("cap", [1.0, 0.5])
def test_trend_panel_late_returns(cap):
    began = time.perf_counter()
    config = backtest.BacktestConfig(train_window=180, solver=SolverConfig(max_weight=cap))
    report = backtest.run(trend_panel(300), config)
    late = report.strategy_returns[-60:]
    expected = cap * 0.01 + (1 - cap) * 0.0
    assert np.max(np.abs(late - expected)) <= 1e-9
    assert time.perf_counter() - began < 10.0


@pytest.mark.criterion(7, "end-to-end synthetic backtest")
def test_identical_assets_track_equal_weight():
    began = time.perf_counter()
    report = backtest.run(identical_panel(320, 4, seed=3), backtest.BacktestConfig(train_window=180))
    assert np.max(np.abs(report.strategy_returns - report.equal_weight_returns)) <= 1e-12
    assert time.perf_counter() - began < 10.0


# -- 8 ----------------------------------------------------------------------

@pytest.mark.criterion(8, "no lookahead under truncation")
def test_truncation_never_changes_past_decisions():
    panel = random_panel(140, ("BTC", "ETH", "ADA"), seed=11, news_rate=0.8)
    config = backtest.BacktestConfig(train_window=40, solver=SolverConfig(max_weight=0.6))
    full = backtest.run(panel, config)
    first = len(panel) - len(full)
    rng = np.random.default_rng(5)
    cuts = rng.choice(np.arange(first, len(panel) - 1), size=20, replace=False)
    for t in cuts:
        short = backtest.run(panel.truncate(int(t) + 1), config)
        k = len(short)
        assert short.dates == full.dates[:k]
        assert np.array_equal(short.weights, full.weights[:k])
        assert np.array_equal(short.adjusted_mu, full.adjusted_mu[:k])
        assert np.array_equal(short.strategy_returns, full.strategy_returns[:k])


# -- 9 ----------------------------------------------------------------------

@pytest.mark.criterion(9, "prompt byte-identical to template instantiation")
def test_prompt_matches_stored_instantiation(fixtures_dir):
    expected = (fixtures_dir / "prompt_expected.txt").read_bytes()
    headline = "Grayscale Transfers Over 314 BTC Worth $37.5 Million to Coinbase Again"
    prompt = build_prompt(headline, 0.8399)
    assert prompt.encode("utf-8") == expected
    assert "The VADER sentiment score is: 0.84\n" in prompt


# -- 10 ---------------------------------------------------------------------

@pytest.mark.criterion(10, "verifier parsing and fault-tolerant batches")
def test_sample_response_parses(fixtures_dir):
    sample = (fixtures_dir / "sample_llm_response.txt").read_text(encoding="utf-8")
    assert parse_recommendation(sample) == ("Hold", "Partial")


@pytest.mark.criterion(10, "verifier parsing and fault-tolerant batches")
def test_mock_batch_with_faults_populates_every_record(fixtures_dir, tmp_path):
    sample = (fixtures_dir / "sample_llm_response.txt").read_text(encoding="utf-8")
    items = [(NewsItem(date(2024, 1, 1) + timedelta(days=k), "BTC", f"Headline number {k}"), 0.1 * (k % 10) - 0.45)
             for k in range(25)]
    transport = MockChatTransport(default=sample, faults={"number 3\"": 500, "number 17\"": 429,
                                                          "number 21\"": 400})
    sleeps = []
    out = tmp_path / "records.jsonl"
    records = verify_batch(items, transport, VerifierConfig(requests_per_second=1000.0),
                           out_path=out, sleep=sleeps.append)
    assert len(records) == len(items)
    assert [r.request.news_text for r in records] == [i.text for i, _ in items]
    for k, rec in enumerate(records):
        assert rec.recommendation in RECOMMENDATIONS and rec.agreement in AGREEMENTS and rec.timestamp
        if k in (3, 17, 21):
            assert (rec.recommendation, rec.agreement) == ("Unclear", "Unclear") and rec.error
        else:
            assert (rec.recommendation, rec.agreement) == ("Hold", "Partial") and rec.error is None
    assert len(out.read_text(encoding="utf-8").splitlines()) == len(items)
