"""Additive expected-return boosts from RSI, price vs SMA, and news sentiment."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping


@dataclass(frozen=True)
class BoostScales:
    rsi: float = 0.005
    sma: float = 0.005
    sentiment: float = 0.01

    def __post_init__(self) -> None:
        if min(self.rsi, self.sma, self.sentiment) < 0:
            raise ValueError("boost scales must be non-negative")


@dataclass(frozen=True)
class BoostSet:
    sentiment: float = 0.0
    rsi: float = 0.0
    sma: float = 0.0

    def __add__(self, other: "BoostSet") -> "BoostSet":
        return BoostSet(self.sentiment + other.sentiment, self.rsi + other.rsi, self.sma + other.sma)


def _undefined(x: float | None) -> bool:
    return x is None or (isinstance(x, float) and math.isnan(x))


def rsi_boost(rsi: float | None, scale: float = 0.005) -> float:
    """``scale * (rsi - 50) / 50``; 0 while RSI is still warming up."""
    if _undefined(rsi):
        return 0.0
    if not 0.0 <= rsi <= 100.0:
        raise ValueError(f"RSI {rsi} outside [0, 100]")
    return scale * (rsi - 50.0) / 50.0


def sma_boost(price: float, sma: float | None, scale: float = 0.005) -> float:
    # price == sma lands in the negative branch
    if not price > 0:
        raise ValueError(f"price must be positive, got {price}")
    if _undefined(sma):
        return 0.0
    return scale if price > sma else -scale


def sentiment_boost(mean_compound: float | None, scale: float = 0.01) -> float:
    if _undefined(mean_compound):
        return 0.0
    if not -1.0 <= mean_compound <= 1.0:
        raise ValueError(f"compound {mean_compound} outside [-1, 1]")
    return scale * mean_compound


def compute_boosts(
    rsi: float | None,
    price: float,
    sma: float | None,
    mean_compound: float | None,
    scales: BoostScales = BoostScales(),
) -> BoostSet:
    return BoostSet(
        sentiment=sentiment_boost(mean_compound, scales.sentiment),
        rsi=rsi_boost(rsi, scales.rsi),
        sma=sma_boost(price, sma, scales.sma),
    )


def adjust_mu(mu: Mapping[str, float], boosts: Mapping[str, BoostSet]) -> dict[str, float]:
    """Adjusted expected return per asset: mean + sentiment + RSI + SMA boosts."""
    if set(mu) != set(boosts):
        missing = sorted(set(mu) ^ set(boosts))
        raise ValueError(f"mu and boosts cover different assets: {missing}")
    return {a: mu[a] + boosts[a].sentiment + boosts[a].rsi + boosts[a].sma for a in mu}
