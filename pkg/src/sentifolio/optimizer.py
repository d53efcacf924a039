"""Long-only mean-variance portfolios on the (optionally capped) simplex.

Maximizes ``mu @ w - risk_aversion / 2 * w @ sigma @ w`` subject to
``sum(w) == 1`` and ``0 <= w <= max_weight``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverError

_BOUND_ATOL = 1e-12
_FEASIBILITY_TOL = 1e-9
_MIN_CURVATURE = 1e-12


@dataclass(frozen=True, eq=False)
class Moments:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        n = mu.shape[0]
        if mu.ndim != 1 or sigma.shape != (n, n):
            raise ValueError(f"mu {mu.shape} and sigma {sigma.shape} do not match")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValueError("moments must be finite")
        if np.max(np.abs(sigma - sigma.T), initial=0.0) > 1e-12:
            raise ValueError("sigma is not symmetric")
        if np.any(np.diag(sigma) < 0):
            raise ValueError("sigma has a negative variance")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    risk_aversion: float = 1.0
    max_weight: float = 1.0
    tolerance: float = 1e-10
    max_iterations: int = 100_000

    def __post_init__(self) -> None:
        if not self.risk_aversion > 0:
            raise ValueError("risk_aversion must be positive")
        if not 0 < self.max_weight <= 1:
            raise ValueError("max_weight must be in (0, 1]")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def check_feasible(self, n: int) -> None:
        if n < 1 or n * self.max_weight < 1 - 1e-12:
            raise SolverError(f"max_weight {self.max_weight} is infeasible for {n} assets")


def estimate_moments(window: np.ndarray) -> Moments:
    """Column means and unbiased (n - 1) sample covariance of a days x assets matrix."""
    x = np.asarray(window, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("need at least 2 return rows")
    if not np.all(np.isfinite(x)):
        raise ValueError("return window has missing or non-finite cells")
    mu = x.mean(axis=0)
    dev = x - mu
    sigma = dev.T @ dev / (x.shape[0] - 1)
    sigma = (sigma + sigma.T) / 2.0
    return Moments(mu, sigma)


def objective(moments: Moments, risk_aversion: float, w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    return float(moments.mu @ w - 0.5 * risk_aversion * (w @ moments.sigma @ w))


def repair_psd(sigma: np.ndarray) -> np.ndarray:
    """Shift the diagonal when sample noise makes ``sigma`` indefinite."""
    smallest = np.linalg.eigvalsh(sigma)[0]
    if smallest < -1e-10:
        return sigma + (abs(smallest) + 1e-12) * np.eye(sigma.shape[0])
    return sigma


def project_capped_simplex(v: np.ndarray, cap: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{w : sum(w) = 1, 0 <= w <= cap}``.

    The projection is ``clip(v - theta, 0, cap)`` for the unique ``theta`` that
    makes it sum to one. That sum is piecewise linear in ``theta`` with kinks at
    ``v`` and ``v - cap``, so scanning the sorted kinks finds ``theta`` exactly.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    cap = min(cap, 1.0)
    if n * cap < 1 - 1e-12:
        raise ValueError("capped simplex is empty")
    kinks = np.unique(np.concatenate((v - cap, v)))
    # mass falls from n*cap (theta below every kink) to 0 (above every kink)
    mass = np.clip(v[None, :] - kinks[:, None], 0.0, cap).sum(axis=1)
    first_below = int(np.argmax(mass < 1.0))
    hi = kinks[first_below]
    lo = kinks[first_below - 1] if first_below > 0 else hi - 1.0
    mid = 0.5 * (lo + hi)
    free = (v - mid > 0) & (v - mid < cap)
    n_cap = int(np.count_nonzero(v - mid >= cap))
    if free.any():
        theta = (v[free].sum() + n_cap * cap - 1.0) / np.count_nonzero(free)
    else:
        theta = mid
    w = np.clip(v - theta, 0.0, cap)
    # push the rounding residue onto interior coordinates so bounds stay exact
    inner = (w > 0) & (w < cap)
    if inner.any():
        w[inner] += (1.0 - w.sum()) / np.count_nonzero(inner)
        w = np.clip(w, 0.0, cap)
    return w


def kkt_residual(moments: Moments, config: SolverConfig, w: np.ndarray) -> float:
    """Largest violation of the capped-simplex optimality conditions.

    With gradient ``g = mu - risk_aversion * sigma @ w`` and budget multiplier
    ``nu``: free weights need ``g_i == nu``, weights at zero ``g_i <= nu`` and
    weights at the cap ``g_i >= nu``. ``nu`` is chosen to minimize the worst
    violation, which is then half the gap between the largest "must not exceed"
    gradient and the smallest "must not fall below" one.
    """
    w = np.asarray(w, dtype=float)
    cap = min(config.max_weight, 1.0)
    if w.shape != moments.mu.shape:
        raise ValueError("weight vector has the wrong length")
    if (abs(w.sum() - 1.0) > _FEASIBILITY_TOL or np.any(w < -_FEASIBILITY_TOL)
            or np.any(w > cap + _FEASIBILITY_TOL)):
        raise ValueError("weights are infeasible")
    return _residual(moments.mu, repair_psd(moments.sigma), config.risk_aversion, cap, w)


def _residual(mu: np.ndarray, sigma: np.ndarray, lam: float, cap: float, w: np.ndarray) -> float:
    g = mu - lam * (sigma @ w)
    at_zero = w <= _BOUND_ATOL
    at_cap = w >= cap - _BOUND_ATOL
    upper_bounded = ~at_cap  # g_i <= nu
    lower_bounded = ~at_zero  # g_i >= nu
    if not upper_bounded.any() or not lower_bounded.any():
        return 0.0
    gap = g[upper_bounded].max() - g[lower_bounded].min()
    return max(0.0, 0.5 * float(gap))


def _polish(mu: np.ndarray, sigma: np.ndarray, lam: float, cap: float, w: np.ndarray) -> np.ndarray | None:
    """Solve the equality-constrained KKT system on the active set of ``w``."""
    at_zero = w <= _BOUND_ATOL
    at_cap = (w >= cap - _BOUND_ATOL) & ~at_zero
    free = ~(at_zero | at_cap)
    out = np.where(at_cap, cap, 0.0)
    budget = 1.0 - out.sum()
    k = int(np.count_nonzero(free))
    if k == 0:
        return out if abs(budget) <= 1e-12 else None
    f = np.flatnonzero(free)
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = lam * sigma[np.ix_(f, f)]
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.empty(k + 1)
    rhs[:k] = mu[f] - lam * sigma[np.ix_(f, np.flatnonzero(at_cap))] @ out[at_cap]
    rhs[k] = budget
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    wf = sol[:k]
    if np.any(wf < -1e-12) or np.any(wf > cap + 1e-12):
        return None
    out[f] = np.clip(wf, 0.0, cap)
    inner = (out > 0) & (out < cap)
    if inner.any():
        out[inner] += (1.0 - out.sum()) / np.count_nonzero(inner)
    if abs(out.sum() - 1.0) > 1e-12:
        return None
    return out


def solve(moments: Moments, config: SolverConfig = SolverConfig()) -> np.ndarray:
    """Projected gradient ascent with active-set polishing.

    Steps use ``1 / L`` with ``L = risk_aversion * max eigenvalue(sigma)``.
    Whenever the active set is stable for a few iterations the KKT system on
    that set is solved directly; the polished point is accepted once its KKT
    residual is within ``config.tolerance``. Deterministic for fixed inputs.
    """
    n = moments.n
    config.check_feasible(n)
    if n == 1:
        return np.ones(1)
    cap = min(config.max_weight, 1.0)
    lam = config.risk_aversion
    mu = moments.mu
    sigma = repair_psd(moments.sigma)
    curvature = lam * float(np.linalg.eigvalsh(sigma)[-1])
    step = 1.0 / max(curvature, _MIN_CURVATURE)

    w = project_capped_simplex(np.full(n, 1.0 / n), cap)
    pattern = None
    stable = 0
    residual = math.inf
    for _ in range(config.max_iterations):
        residual = _residual(mu, sigma, lam, cap, w)
        if residual <= config.tolerance:
            return w
        w = project_capped_simplex(w + step * (mu - lam * (sigma @ w)), cap)
        new_pattern = ((w <= _BOUND_ATOL) | (w >= cap - _BOUND_ATOL)).tobytes() + (w >= cap - _BOUND_ATOL).tobytes()
        stable = stable + 1 if new_pattern == pattern else 0
        pattern = new_pattern
        if stable >= 2:
            polished = _polish(mu, sigma, lam, cap, w)
            if polished is not None and _residual(mu, sigma, lam, cap, polished) <= config.tolerance:
                return polished
    raise SolverError(
        f"no convergence after {config.max_iterations} iterations (KKT residual {residual:.3e})"
    )


def brute_force_oracle(moments: Moments, config: SolverConfig, step: float = 0.01) -> np.ndarray:
    """Best grid point of the capped simplex, by exhaustive enumeration (n <= 4)."""
    n = moments.n
    if n > 4:
        raise ValueError("grid enumeration is limited to 4 assets")
    config.check_feasible(n)
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-9:
        raise ValueError("step must divide 1")
    top = min(m, math.floor(config.max_weight * m + 1e-9))
    if n == 1:
        grid = np.array([[m]])
    else:
        heads = np.array(list(itertools.product(range(top + 1), repeat=n - 1)), dtype=np.int64)
        last = m - heads.sum(axis=1)
        keep = (last >= 0) & (last <= top)
        grid = np.column_stack((heads[keep], last[keep]))
        if grid.size == 0:
            raise ValueError(f"no grid point with step {step} satisfies max_weight {config.max_weight}")
    w = grid / m
    values = w @ moments.mu - 0.5 * config.risk_aversion * np.einsum("ki,ij,kj->k", w, moments.sigma, w)
    return w[int(np.argmax(values))]
