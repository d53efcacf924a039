"""Daily price and news ingestion: CSV loaders, a caching HTTP fetcher, and panel alignment."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, NamedTuple, Protocol, Sequence

import numpy as np

from .errors import ConfigError, DataError, FetchError

log = logging.getLogger(__name__)

CANDLE_HEADER = ("date", "asset", "open", "high", "low", "close", "volume")
NEWS_HEADER = ("date", "asset", "title", "body")
PANEL_HEADER = ("date", "asset", "close", "mean_compound", "article_count")

DEFAULT_UNIVERSE = ("BTC", "ETH", "ADA", "BNB", "XRP")

_SECONDS_PER_DAY = 86_400


@dataclass(frozen=True)
class Candle:
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self) -> None:
        prices = (self.open, self.high, self.low, self.close)
        if not all(math.isfinite(p) for p in prices + (self.volume,)):
            raise DataError(f"{self.date}: non-finite value in candle")
        if min(prices) <= 0:
            raise DataError(f"{self.date}: non-positive price in candle")
        if self.volume < 0:
            raise DataError(f"{self.date}: negative volume")
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise DataError(f"{self.date}: open/close outside [low, high]")


@dataclass(frozen=True)
class PriceSeries:
    asset: str
    candles: tuple[Candle, ...]

    def __post_init__(self) -> None:
        if not self.asset:
            raise DataError("empty asset ticker")
        for prev, cur in zip(self.candles, self.candles[1:]):
            if cur.date <= prev.date:
                raise DataError(f"{self.asset}: dates not strictly increasing at {cur.date}")

    def __len__(self) -> int:
        return len(self.candles)

    @property
    def dates(self) -> list[date]:
        return [c.date for c in self.candles]

    @property
    def closes(self) -> np.ndarray:
        return np.array([c.close for c in self.candles], dtype=float)


@dataclass(frozen=True)
class NewsItem:
    date: date
    asset: str
    title: str
    body: str = ""

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise DataError(f"{self.date} {self.asset}: empty news title")
        if not self.asset:
            raise DataError(f"{self.date}: news item without asset")

    @property
    def text(self) -> str:
        """Title and body joined as two sentences; the unit that gets scored."""
        if not self.body.strip():
            return self.title
        return f"{self.title}. {self.body}"


class NewsLoad(NamedTuple):
    items: list[NewsItem]
    skipped: Counter


def _parse_date(raw: str) -> date:
    return date.fromisoformat(raw.strip())


def _check_header(path: Path, header: Sequence[str] | None, expected: Sequence[str]) -> None:
    if header is None:
        raise DataError(f"{path}: empty file")
    if tuple(h.strip() for h in header) != tuple(expected):
        raise DataError(f"{path}:1: expected header {','.join(expected)!r}, got {','.join(header)!r}")


def load_candles_csv(path: str | os.PathLike) -> dict[str, PriceSeries]:
    """Read a ``date,asset,open,high,low,close,volume`` file into one series per asset.

    Assets keep the order of their first appearance; candles are sorted by date.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"candle file not found: {path}")
    rows: dict[str, dict[date, Candle]] = defaultdict(dict)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None), CANDLE_HEADER)
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(CANDLE_HEADER):
                raise DataError(f"{where}: expected {len(CANDLE_HEADER)} fields, got {len(row)}")
            try:
                day = _parse_date(row[0])
                asset = row[1].strip()
                o, h, lo, c, v = (float(x) for x in row[2:])
            except ValueError as exc:
                raise DataError(f"{where}: malformed row ({exc})") from None
            try:
                candle = Candle(day, o, h, lo, c, v)
            except DataError as exc:
                raise DataError(f"{where}: {exc}") from None
            if not asset:
                raise DataError(f"{where}: empty asset ticker")
            if day in rows[asset]:
                raise DataError(f"{where}: duplicate row for ({asset}, {day})")
            rows[asset][day] = candle
    return {
        asset: PriceSeries(asset, tuple(by_day[d] for d in sorted(by_day)))
        for asset, by_day in rows.items()
    }


def save_candles_csv(series: Mapping[str, PriceSeries], path: str | os.PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANDLE_HEADER)
        for asset, s in series.items():
            for c in s.candles:
                writer.writerow([c.date.isoformat(), asset, repr(c.open), repr(c.high),
                                 repr(c.low), repr(c.close), repr(c.volume)])


def load_news_csv(
    path: str | os.PathLike,
    universe: Iterable[str] | None = None,
    date_range: tuple[date | None, date | None] | None = None,
) -> NewsLoad:
    """Read a ``date,asset,title,body`` file.

    Rows with an empty title, an asset outside ``universe`` or a date outside
    ``date_range`` are skipped with a warning and counted in ``skipped``.
    A row that cannot be parsed at all raises :class:`DataError`.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"news file not found: {path}")
    allowed = set(universe) if universe is not None else None
    start, end = date_range if date_range is not None else (None, None)
    items: list[NewsItem] = []
    skipped: Counter = Counter()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None), NEWS_HEADER)
        for row in reader:
            where = f"{path}:{reader.line_num}"
            if not row:
                continue
            if len(row) != len(NEWS_HEADER):
                raise DataError(f"{where}: expected {len(NEWS_HEADER)} fields, got {len(row)}")
            try:
                day = _parse_date(row[0])
            except ValueError:
                raise DataError(f"{where}: bad date {row[0]!r}") from None
            asset, title, body = row[1].strip(), row[2], row[3]
            if not title.strip():
                log.warning("%s: empty title, row skipped", where)
                skipped["empty_title"] += 1
                continue
            if allowed is not None and asset not in allowed:
                log.warning("%s: asset %r not in universe, row skipped", where, asset)
                skipped["unknown_asset"] += 1
                continue
            if (start is not None and day < start) or (end is not None and day > end):
                log.warning("%s: date %s outside data range, row skipped", where, day)
                skipped["out_of_range"] += 1
                continue
            items.append(NewsItem(day, asset, title, body))
    return NewsLoad(items, skipped)


def save_news_csv(items: Iterable[NewsItem], path: str | os.PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(NEWS_HEADER)
        for item in items:
            writer.writerow([item.date.isoformat(), item.asset, item.title, item.body])


def simple_returns(closes: Sequence[float] | np.ndarray) -> np.ndarray:
    """Close-to-close returns ``p[t] / p[t-1] - 1`` along the first axis."""
    p = np.asarray(closes, dtype=float)
    if p.shape[0] < 2:
        raise ValueError("need at least 2 prices to compute returns")
    if not np.all(p > 0):
        raise ValueError("prices must be positive")
    return p[1:] / p[:-1] - 1.0


# ---------------------------------------------------------------------------
# Panel
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Panel:
    """Rectangular date x asset view of closes and aggregated daily sentiment.

    ``sentiment`` holds NaN where an asset had no news that day; ``article_counts``
    is 0 there.
    """

    dates: tuple[date, ...]
    assets: tuple[str, ...]
    closes: np.ndarray
    sentiment: np.ndarray
    article_counts: np.ndarray

    def __post_init__(self) -> None:
        shape = (len(self.dates), len(self.assets))
        for name in ("closes", "sentiment", "article_counts"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise DataError(f"panel {name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
        if len(set(self.assets)) != len(self.assets):
            raise DataError("duplicate assets in panel")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("panel dates must be strictly increasing")
        if not np.all(self.closes > 0):
            raise DataError("panel closes must be positive")

    def __len__(self) -> int:
        return len(self.dates)

    def index(self, asset: str) -> int:
        try:
            return self.assets.index(asset)
        except ValueError:
            raise KeyError(asset) from None

    def truncate(self, stop: int) -> "Panel":
        """The first ``stop`` dates of the panel."""
        return Panel(self.dates[:stop], self.assets, self.closes[:stop].copy(),
                     self.sentiment[:stop].copy(), self.article_counts[:stop].copy())

    def select(self, assets: Sequence[str]) -> "Panel":
        idx = [self.index(a) for a in assets]
        return Panel(self.dates, tuple(assets), self.closes[:, idx].copy(),
                     self.sentiment[:, idx].copy(), self.article_counts[:, idx].copy())

    def identical_to(self, other: "Panel") -> bool:
        """Bitwise equality, treating NaN cells as equal."""
        return (
            self.dates == other.dates
            and self.assets == other.assets
            and all(
                a.dtype == b.dtype and a.tobytes() == b.tobytes()
                for a, b in (
                    (self.closes, other.closes),
                    (self.sentiment, other.sentiment),
                    (self.article_counts, other.article_counts),
                )
            )
        )


def align_panel(
    prices: Mapping[str, PriceSeries],
    sentiment: Iterable[Any] = (),
    assets: Sequence[str] | None = None,
) -> Panel:
    """Inner-join the asset calendars and attach daily sentiment.

    ``sentiment`` rows need ``asset``, ``date``, ``mean_compound`` and
    ``article_count`` attributes. Rows for assets or dates outside the panel are
    ignored; the caller's raw collection is left untouched.
    """
    order = tuple(assets) if assets is not None else tuple(prices)
    if not order:
        raise DataError("no assets to align")
    for a in order:
        if a not in prices:
            raise DataError(f"no price series for asset {a}")
        if len(prices[a]) == 0:
            raise DataError(f"empty price series for asset {a}")
    common = set(prices[order[0]].dates)
    for a in order[1:]:
        common &= set(prices[a].dates)
    if not common:
        raise DataError("price series share no dates")
    dates = tuple(sorted(common))
    row = {d: i for i, d in enumerate(dates)}
    closes = np.empty((len(dates), len(order)))
    for j, a in enumerate(order):
        for c in prices[a].candles:
            i = row.get(c.date)
            if i is not None:
                closes[i, j] = c.close
    sent = np.full(closes.shape, np.nan)
    counts = np.zeros(closes.shape, dtype=np.int64)
    col = {a: j for j, a in enumerate(order)}
    for rec in sentiment:
        i, j = row.get(rec.date), col.get(rec.asset)
        if i is None or j is None:
            continue
        sent[i, j] = rec.mean_compound
        counts[i, j] = rec.article_count
    return Panel(dates, order, closes, sent, counts)


def save_panel(panel: Panel, path: str | os.PathLike) -> None:
    """Write a panel in long CSV form; floats use ``repr`` so reloading is exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PANEL_HEADER)
        for i, d in enumerate(panel.dates):
            for j, a in enumerate(panel.assets):
                s = panel.sentiment[i, j]
                writer.writerow([d.isoformat(), a, repr(float(panel.closes[i, j])),
                                 "" if math.isnan(s) else repr(float(s)),
                                 int(panel.article_counts[i, j])])


def load_panel(path: str | os.PathLike) -> Panel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"panel file not found: {path}")
    cells: dict[tuple[date, str], tuple[float, float, int]] = {}
    dates: list[date] = []
    assets: list[str] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, None), PANEL_HEADER)
        for row in reader:
            try:
                d, a = _parse_date(row[0]), row[1]
                cells[(d, a)] = (float(row[2]), float(row[3]) if row[3] else math.nan, int(row[4]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{reader.line_num}: malformed panel row") from None
            if not dates or dates[-1] != d:
                dates.append(d)
            if a not in assets:
                assets.append(a)
    shape = (len(dates), len(assets))
    closes, sent = np.empty(shape), np.empty(shape)
    counts = np.empty(shape, dtype=np.int64)
    for i, d in enumerate(dates):
        for j, a in enumerate(assets):
            try:
                closes[i, j], sent[i, j], counts[i, j] = cells[(d, a)]
            except KeyError:
                raise DataError(f"{path}: panel is not rectangular, missing ({d}, {a})") from None
    return Panel(tuple(dates), tuple(assets), closes, sent, counts)


def describe_closes(series: PriceSeries) -> dict[str, float]:
    """count/mean/std/min/quartiles/max of the close prices (sample std)."""
    c = series.closes
    q25, q50, q75 = np.percentile(c, [25, 50, 75])
    return {
        "count": float(c.size),
        "mean": float(c.mean()),
        "std": float(c.std(ddof=1)) if c.size > 1 else math.nan,
        "min": float(c.min()),
        "25%": float(q25),
        "50%": float(q50),
        "75%": float(q75),
        "max": float(c.max()),
    }


# ---------------------------------------------------------------------------
# Remote fetching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApiConfig:
    """Endpoints and retry policy for the market-data API.

    The key itself is never stored here; only the name of the environment
    variable that holds it.
    """

    candles_url: str = "https://min-api.cryptocompare.com/data/v2/histoday"
    news_url: str = "https://data-api.coindesk.com/news/v1/article/list"
    quote: str = "USD"
    api_key_env: str = "CRYPTOCOMPARE_API_KEY"
    api_key_header: str = "authorization"
    api_key_prefix: str = "Apikey "
    rate_limit_delay: float = 0.25
    max_retries: int = 3
    backoff: float = 1.0
    page_limit: int = 2000
    news_page_limit: int = 100
    max_pages: int = 500
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.rate_limit_delay < 0 or self.backoff < 0:
            raise ValueError("delays must be non-negative")
        if self.page_limit < 1 or self.news_page_limit < 1 or self.max_pages < 1:
            raise ValueError("page limits must be positive")


@dataclass(frozen=True)
class HttpResponse:
    status: int
    body: str


class Transport(Protocol):
    def get(self, url: str, params: Mapping[str, str], headers: Mapping[str, str]) -> HttpResponse: ...


class UrllibTransport:
    """Live HTTP GET via the standard library."""

    def __init__(self, timeout: float = 30.0):
        self.timeout = timeout

    def get(self, url: str, params: Mapping[str, str], headers: Mapping[str, str]) -> HttpResponse:
        full = f"{url}?{urllib.parse.urlencode(sorted(params.items()))}" if params else url
        req = urllib.request.Request(full, headers=dict(headers))
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return HttpResponse(resp.status, resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            return HttpResponse(exc.code, exc.read().decode("utf-8", "replace"))
        except urllib.error.URLError as exc:
            raise ConnectionError(str(exc.reason)) from exc


class ScriptedTransport:
    """Replays a fixed sequence of responses (or exceptions), one per call."""

    def __init__(self, script: Iterable[HttpResponse | Exception]):
        self.script = list(script)
        self.calls: list[tuple[str, dict[str, str]]] = []

    def get(self, url: str, params: Mapping[str, str], headers: Mapping[str, str]) -> HttpResponse:
        self.calls.append((url, dict(params)))
        if not self.script:
            raise AssertionError("scripted transport exhausted")
        step = self.script.pop(0)
        if isinstance(step, Exception):
            raise step
        return step


class FixtureTransport:
    """Offline stand-in for the market-data API, answering from a JSON fixture.

    The fixture maps ``{"candles": {ASSET: [rows]}, "news": {ASSET: [articles]}}``
    with rows/articles in the API's own payload format. Every request is answered
    with the full row set for its asset; news pagination ends on the second page.
    """

    def __init__(self, payloads: Mapping[str, Mapping[str, list]]):
        self.payloads = payloads
        self.calls = 0

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "FixtureTransport":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def get(self, url: str, params: Mapping[str, str], headers: Mapping[str, str]) -> HttpResponse:
        self.calls += 1
        if "fsym" in params:
            rows = self.payloads.get("candles", {}).get(params["fsym"], [])
            body = {"Response": "Success", "Data": {"Data": rows}}
        else:
            asset = params.get("categories", "")
            rows = self.payloads.get("news", {}).get(asset, [])
            to_ts = int(params.get("to_ts", 2**62))
            body = {"Data": [r for r in rows if int(r["PUBLISHED_ON"]) <= to_ts]}
        return HttpResponse(200, json.dumps(body))


_RETRYABLE = frozenset({408, 429, 500, 502, 503, 504})


def _request_json(
    transport: Transport,
    url: str,
    params: Mapping[str, str],
    headers: Mapping[str, str],
    api: ApiConfig,
    sleep: Callable[[float], None],
) -> tuple[Any, int]:
    """GET with exponential backoff. Returns (payload, retries used)."""
    attempt = 0
    while True:
        try:
            resp = transport.get(url, params, headers)
        except (ConnectionError, TimeoutError, OSError) as exc:
            reason = f"network error: {exc}"
        else:
            if resp.status == 200:
                try:
                    return json.loads(resp.body), attempt
                except json.JSONDecodeError as exc:
                    raise FetchError(f"{url}: response is not JSON ({exc})") from None
            if resp.status not in _RETRYABLE:
                raise FetchError(f"{url}: HTTP {resp.status}")
            reason = f"HTTP {resp.status}"
        if attempt >= api.max_retries:
            raise FetchError(f"{url}: giving up after {attempt} retries ({reason})")
        delay = api.backoff * 2**attempt
        attempt += 1
        log.warning("%s: %s, retry %d/%d in %.2fs", url, reason, attempt, api.max_retries, delay)
        sleep(delay)


def _utc_day(ts: int | float) -> date:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).date()


def _day_end_ts(d: date) -> int:
    return int(datetime(d.year, d.month, d.day, tzinfo=timezone.utc).timestamp()) + _SECONDS_PER_DAY - 1


def _cache_path(cache_dir: Path, asset: str, kind: str, start: date, end: date, key: dict) -> Path:
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]
    return cache_dir / f"{asset}_{kind}_{start.isoformat()}_{end.isoformat()}_{digest}.json"


def _candles_from_pages(asset: str, pages: list, start: date, end: date) -> PriceSeries:
    by_day: dict[date, Candle] = {}
    for page in pages:
        try:
            if page.get("Response") == "Error":
                raise FetchError(f"{asset}: API error: {page.get('Message', '')}")
            rows = page["Data"]["Data"]
        except (KeyError, TypeError, AttributeError):
            raise FetchError(f"{asset}: schema mismatch in candle payload") from None
        for r in rows:
            try:
                day = _utc_day(r["time"])
                values = [float(r[k]) for k in ("open", "high", "low", "close", "volumefrom")]
            except (KeyError, TypeError, ValueError):
                raise FetchError(f"{asset}: schema mismatch in candle row {r!r}") from None
            if not (start <= day <= end):
                continue
            if all(v == 0 for v in values[:4]):
                # pre-listing padding rows are all zeros
                continue
            try:
                by_day[day] = Candle(day, *values)
            except DataError as exc:
                raise FetchError(f"{asset}: invalid candle from API: {exc}") from None
    return PriceSeries(asset, tuple(by_day[d] for d in sorted(by_day)))


def _news_from_pages(asset: str, pages: list, start: date, end: date) -> list[NewsItem]:
    seen: dict[tuple, NewsItem] = {}
    for page in pages:
        try:
            rows = page["Data"]
            iter(rows)
        except (KeyError, TypeError):
            raise FetchError(f"{asset}: schema mismatch in news payload") from None
        for r in rows:
            try:
                ts = int(r.get("PUBLISHED_ON", r.get("published_on")))
                title = r.get("TITLE", r.get("title")) or ""
                body = r.get("BODY", r.get("body")) or ""
            except (TypeError, ValueError, AttributeError):
                raise FetchError(f"{asset}: schema mismatch in news row") from None
            day = _utc_day(ts)
            if not (start <= day <= end) or not title.strip():
                continue
            seen.setdefault((ts, title), NewsItem(day, asset, title, body))
    return [seen[k] for k in sorted(seen, key=lambda k: (k[0], k[1]))]


def fetch_remote(
    api: ApiConfig,
    asset: str,
    start: date,
    end: date,
    kind: str,
    *,
    transport: Transport | None = None,
    cache_dir: str | os.PathLike | None = None,
    sleep: Callable[[float], None] = time.sleep,
    environ: Mapping[str, str] = os.environ,
) -> PriceSeries | list[NewsItem]:
    """Fetch daily candles or news for one asset over ``[start, end]``.

    Raw response pages are written to ``cache_dir`` (one file per request
    fingerprint) and reused on later calls, so reruns need no network. Without
    an explicit ``transport`` the live HTTP client is used and the API key must
    be present in the environment.
    """
    if kind not in ("candles", "news"):
        raise ValueError(f"kind must be 'candles' or 'news', got {kind!r}")
    if end < start:
        raise ValueError("empty date range")
    url = api.candles_url if kind == "candles" else api.news_url
    key = {"url": url, "asset": asset, "kind": kind, "start": start.isoformat(),
           "end": end.isoformat(), "quote": api.quote}
    cache_file = None
    if cache_dir is not None:
        cache_file = _cache_path(Path(cache_dir), asset, kind, start, end, key)
        if cache_file.is_file():
            log.info("cache hit %s", cache_file.name)
            pages = json.loads(cache_file.read_text(encoding="utf-8"))
            return _parse_pages(asset, kind, pages, start, end)

    headers: dict[str, str] = {}
    if transport is None:
        api_key = environ.get(api.api_key_env)
        if not api_key:
            raise ConfigError(f"live fetch needs an API key in ${api.api_key_env}")
        transport = UrllibTransport(api.timeout)
        headers[api.api_key_header] = f"{api.api_key_prefix}{api_key}"

    pages: list = []
    retries = 0
    to_ts = _day_end_ts(end)
    if kind == "candles":
        remaining = (end - start).days + 1
        while remaining > 0 and len(pages) < api.max_pages:
            limit = min(api.page_limit, remaining)
            params = {"fsym": asset, "tsym": api.quote, "limit": str(limit - 1), "toTs": str(to_ts)}
            if pages:
                sleep(api.rate_limit_delay)
            payload, r = _request_json(transport, url, params, headers, api, sleep)
            retries += r
            pages.append(payload)
            remaining -= limit
            to_ts -= limit * _SECONDS_PER_DAY
    else:
        start_ts = _day_end_ts(start) - _SECONDS_PER_DAY + 1
        while len(pages) < api.max_pages:
            params = {"lang": "EN", "categories": asset, "limit": str(api.news_page_limit),
                      "to_ts": str(to_ts)}
            if pages:
                sleep(api.rate_limit_delay)
            payload, r = _request_json(transport, url, params, headers, api, sleep)
            retries += r
            pages.append(payload)
            try:
                stamps = [int(row.get("PUBLISHED_ON", row.get("published_on"))) for row in payload["Data"]]
            except (KeyError, TypeError, ValueError, AttributeError):
                raise FetchError(f"{asset}: schema mismatch in news payload") from None
            if not stamps or min(stamps) < start_ts:
                break
            next_ts = min(stamps) - 1
            if next_ts >= to_ts:
                break
            to_ts = next_ts
    log.info("fetched %s %s: %d page(s), %d retries", asset, kind, len(pages), retries)
    result = _parse_pages(asset, kind, pages, start, end)
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        cache_file.write_text(json.dumps(pages, sort_keys=True), encoding="utf-8")
    return result


def _parse_pages(asset: str, kind: str, pages: list, start: date, end: date):
    if kind == "candles":
        return _candles_from_pages(asset, pages, start, end)
    return _news_from_pages(asset, pages, start, end)


def date_span(start: date, n_days: int) -> list[date]:
    return [start + timedelta(days=k) for k in range(n_days)]
