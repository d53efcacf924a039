import math

import pytest
from hypothesis import given, strategies as st

from sentifolio.signals import (BoostScales, BoostSet, adjust_mu, compute_boosts, rsi_boost, sentiment_boost,
                                sma_boost)

rsi_values = st.floats(0, 100)
compounds = st.floats(-1, 1)
positive = st.floats(1e-6, 1e6)


def test_adjust_mu_examples():
    assert adjust_mu({"A": 0.001}, {"A": BoostSet(0.01, 0.005, 0.005)})["A"] == pytest.approx(0.021, abs=1e-15)
    assert adjust_mu({"A": 0.0}, {"A": BoostSet(-0.01, -0.005, -0.005)})["A"] == pytest.approx(-0.02, abs=1e-15)
    assert adjust_mu({"A": 0.0123}, {"A": BoostSet()}) == {"A": 0.0123}


def test_adjust_mu_needs_matching_assets():
    with pytest.raises(ValueError, match="B"):
        adjust_mu({"A": 0.0, "B": 0.0}, {"A": BoostSet()})


def test_undefined_inputs_give_zero_boost():
    assert rsi_boost(None) == rsi_boost(math.nan) == 0.0
    assert sma_boost(10.0, None) == sma_boost(10.0, math.nan) == 0.0
    assert sentiment_boost(None) == sentiment_boost(math.nan) == 0.0


def test_out_of_range_inputs_rejected():
    with pytest.raises(ValueError):
        rsi_boost(100.5)
    with pytest.raises(ValueError):
        sentiment_boost(-1.01)
    with pytest.raises(ValueError):
        sma_boost(0.0, 1.0)


def test_custom_scales():
    b = compute_boosts(100.0, 2.0, 1.0, 1.0, BoostScales(rsi=0.1, sma=0.2, sentiment=0.3))
    assert (b.rsi, b.sma, b.sentiment) == (0.1, 0.2, 0.3)


@given(rsi_values, positive, positive, compounds)
def test_boost_bounds(r, price, avg, c):
    b = compute_boosts(r, price, avg, c)
    assert -0.005 <= b.rsi <= 0.005
    assert b.sma in (-0.005, 0.005)
    assert -0.01 <= b.sentiment <= 0.01
    assert abs(adjust_mu({"X": 0.0}, {"X": b})["X"]) <= 0.02 + 1e-15


@given(st.floats(0, 50))
def test_rsi_boost_antisymmetric_about_fifty(d):
    assert rsi_boost(50 + d) == pytest.approx(-rsi_boost(50 - d), abs=1e-16)


@given(st.floats(-0.1, 0.1), rsi_values, rsi_values, compounds, compounds, positive, positive)
def test_adjustment_is_additive(mu, r1, r2, c1, c2, p, s):
    b1, b2 = compute_boosts(r1, p, s, c1), compute_boosts(r2, s, p, c2)
    twice = adjust_mu(adjust_mu({"X": mu}, {"X": b1}), {"X": b2})["X"]
    once = adjust_mu({"X": mu}, {"X": b1 + b2})["X"]
    assert twice == pytest.approx(once, abs=1e-15)


@given(st.floats(-0.1, 0.1), rsi_values, positive, positive, compounds)
def test_adjustment_equals_boost_sum(mu, r, p, s, c):
    b = compute_boosts(r, p, s, c)
    assert adjust_mu({"X": mu}, {"X": b})["X"] == mu + b.sentiment + b.rsi + b.sma
