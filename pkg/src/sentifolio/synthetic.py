"""Seeded synthetic prices and headlines for demos and tests."""
from __future__ import annotations

from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Mapping, Sequence

import numpy as np

from .market_data import Candle, NewsItem, Panel, PriceSeries

_POSITIVE = (
    "{a} rallies as institutional demand grows",
    "{a} developers ship a successful upgrade",
    "Analysts are optimistic about {a} after strong adoption numbers",
    "{a} wins a major partnership, traders celebrate",
    "Great week for {a} holders as fees fall",
)
_NEGATIVE = (
    "{a} slides after an exchange hack",
    "Regulators warn investors about {a} scams",
    "{a} holders worried as volume collapses",
    "Lawsuit fears hit {a}, traders panic",
    "{a} network outage frustrates users",
)
_NEUTRAL = (
    "{a} trading volume steady ahead of the data release",
    "{a} foundation publishes its quarterly report",
    "Exchange lists new {a} trading pairs",
)
_START_PRICES = {"BTC": 9_000.0, "ETH": 250.0, "ADA": 0.08, "BNB": 20.0, "XRP": 0.25}


def candles_from_closes(asset: str, start: date, closes: Sequence[float], volume: float = 1_000.0) -> PriceSeries:
    """Flat candles (open = high = low = close) for a given close path."""
    return PriceSeries(asset, tuple(
        Candle(start + timedelta(days=k), c, c, c, c, volume) for k, c in enumerate(closes)
    ))


def random_walk_closes(n_days: int, rng: np.random.Generator, start_price: float = 100.0,
                       drift: float = 0.0005, vol: float = 0.03) -> np.ndarray:
    log_moves = rng.normal(drift, vol, n_days - 1)
    return start_price * np.exp(np.concatenate(([0.0], np.cumsum(log_moves))))


def generate_candles(assets: Sequence[str], start: date, n_days: int, seed: int) -> dict[str, PriceSeries]:
    """Correlated log-normal walks with realistic OHLC spreads."""
    rng = np.random.default_rng(seed)
    market = rng.normal(0.0008, 0.025, n_days - 1)
    out = {}
    for j, a in enumerate(assets):
        beta = 0.6 + 0.1 * j
        own = rng.normal(0.0002 * (j - 1), 0.02 + 0.004 * j, n_days - 1)
        log_moves = beta * market + own
        start_price = _START_PRICES.get(a, 50.0 * (j + 1))
        closes = start_price * np.exp(np.concatenate(([0.0], np.cumsum(log_moves))))
        opens = np.concatenate(([closes[0]], closes[:-1]))
        wick = np.abs(rng.normal(0.0, 0.01, (2, n_days)))
        highs = np.maximum(opens, closes) * (1 + wick[0])
        lows = np.minimum(opens, closes) * (1 - wick[1])
        volume = rng.lognormal(10, 0.5, n_days)
        candles = tuple(
            Candle(start + timedelta(days=k), round(float(opens[k]), 8), round(float(highs[k]), 8),
                   round(float(lows[k]), 8), round(float(closes[k]), 8), round(float(volume[k]), 4))
            for k in range(n_days)
        )
        out[a] = PriceSeries(a, candles)
    return out


def generate_news(assets: Sequence[str], start: date, n_days: int, seed: int,
                  rate: float = 0.6) -> list[NewsItem]:
    """Template headlines, roughly ``rate`` articles per asset-day."""
    rng = np.random.default_rng(seed + 1)
    items = []
    for k in range(n_days):
        day = start + timedelta(days=k)
        for a in assets:
            for _ in range(rng.poisson(rate)):
                u = rng.random()
                pool = _POSITIVE if u < 0.4 else _NEGATIVE if u < 0.75 else _NEUTRAL
                title = pool[rng.integers(len(pool))].format(a=a)
                body = f"Market update on {a}. " + pool[rng.integers(len(pool))].format(a=a) + "."
                items.append(NewsItem(day, a, title, body))
    return items


def api_payloads(series: Mapping[str, PriceSeries], news: Iterable[NewsItem] = ()) -> dict:
    """Re-express candles and news in the market-data API's row format.

    The result feeds :class:`~sentifolio.market_data.FixtureTransport`.
    """
    def midnight(d: date) -> int:
        return int(datetime(d.year, d.month, d.day, tzinfo=timezone.utc).timestamp())

    candles = {
        a: [{"time": midnight(c.date), "open": c.open, "high": c.high, "low": c.low, "close": c.close,
             "volumefrom": c.volume, "volumeto": 0.0} for c in s.candles]
        for a, s in series.items()
    }
    articles: dict[str, list[dict]] = {}
    for k, item in enumerate(news):
        # distinct intraday timestamps keep same-day articles apart
        ts = midnight(item.date) + 3600 + k % 80_000
        articles.setdefault(item.asset, []).append({"PUBLISHED_ON": ts, "TITLE": item.title, "BODY": item.body})
    return {"candles": candles, "news": articles}


def trend_panel(n_days: int, growth: float = 0.01, assets: tuple[str, str] = ("A", "B"),
                start: date = date(2021, 1, 1)) -> Panel:
    """First asset compounds at ``growth`` per day, the second stays flat."""
    closes = np.column_stack((100.0 * (1.0 + growth) ** np.arange(n_days), np.full(n_days, 50.0)))
    return _panel(closes, assets, start)


def identical_panel(n_days: int, n_assets: int, seed: int, start: date = date(2021, 1, 1)) -> Panel:
    """Every asset follows the same random walk."""
    path = random_walk_closes(n_days, np.random.default_rng(seed))
    closes = np.repeat(path[:, None], n_assets, axis=1)
    return _panel(closes, tuple(f"X{j}" for j in range(n_assets)), start)


def random_panel(n_days: int, assets: Sequence[str], seed: int, news_rate: float = 0.5,
                 start: date = date(2021, 1, 1)) -> Panel:
    """Independent random walks with random daily sentiment cells."""
    rng = np.random.default_rng(seed)
    closes = np.column_stack([random_walk_closes(n_days, rng, 100.0 * (j + 1)) for j in range(len(assets))])
    counts = rng.poisson(news_rate, closes.shape).astype(np.int64)
    sentiment = np.where(counts > 0, rng.uniform(-1, 1, closes.shape), np.nan)
    dates = tuple(start + timedelta(days=k) for k in range(n_days))
    return Panel(dates, tuple(assets), closes, sentiment, counts)


def _panel(closes: np.ndarray, assets: Sequence[str], start: date) -> Panel:
    dates = tuple(start + timedelta(days=k) for k in range(closes.shape[0]))
    return Panel(dates, tuple(assets), closes, np.full(closes.shape, np.nan),
                 np.zeros(closes.shape, dtype=np.int64))
