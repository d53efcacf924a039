import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sentifolio.metrics import cumulative_return, max_drawdown, sharpe, summarize

daily = st.lists(st.floats(-0.5, 0.5, allow_nan=False), min_size=2, max_size=60)


def test_known_values():
    assert cumulative_return([]) == 0.0
    assert cumulative_return([1.0, -0.5]) == 0.0
    assert max_drawdown([0.1, 0.2]) == 0.0
    assert max_drawdown([-0.1]) == pytest.approx(-0.1, abs=1e-15)


def test_drawdown_counts_from_initial_wealth():
    # wealth 1 -> 0.5 -> 1.5 -> 0.75: worst is -50% from either the start or the 1.5 peak
    assert max_drawdown([-0.5, 2.0, -0.5]) == pytest.approx(-0.5, abs=1e-15)


def test_sharpe_errors():
    with pytest.raises(ValueError):
        sharpe([0.01])
    with pytest.raises(ValueError):
        sharpe([0.01, 0.01, 0.01])
    assert summarize([0.01, 0.01]).sharpe is None


def test_returns_at_or_below_minus_one_rejected():
    with pytest.raises(ValueError):
        cumulative_return([0.1, -1.0])


@given(daily)
def test_cumulative_matches_exact_decimal_product(r):
    exact = Fraction(1)
    for x in r:
        exact *= 1 + Fraction(repr(x))
    assert cumulative_return(r) == pytest.approx(float(exact - 1), rel=1e-14, abs=1e-15)


@given(daily)
def test_drawdown_in_range_and_consistent_with_wealth(r):
    mdd = max_drawdown(r)
    assert -1.0 < mdd <= 0.0
    wealth = np.cumprod(np.concatenate(([1.0], 1 + np.array(r))))
    assert wealth[-1] / wealth.max() - 1 >= mdd - 1e-12


@given(daily, st.floats(0.1, 10))
def test_sharpe_scale_invariant(r, k):
    if np.std(r, ddof=1) < 1e-6:
        return
    assert sharpe(np.array(r) * k) == pytest.approx(sharpe(r), rel=1e-9)


def test_summary_dict():
    d = summarize([0.01, -0.02, 0.03]).to_dict()
    assert set(d) == {"cumulative_return", "sharpe", "max_drawdown"}
    assert math.isfinite(d["sharpe"])
