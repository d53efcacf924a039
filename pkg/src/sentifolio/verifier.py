"""Second-opinion check of VADER scores by a chat model.

Each news item is rendered into a fixed prompt, sent through a pluggable
transport, and the free-text answer is reduced to a recommendation
(Increase/Decrease/Hold) and an agreement verdict. Records are written as JSON
lines and never feed back into portfolio weights.
"""
from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from .errors import ConfigError, TransportError
from .market_data import NewsItem

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gemini-1.5-flash-latest"
PROMPT_VERSION = "v1"
RECOMMENDATIONS = ("Increase", "Decrease", "Hold", "Unclear")
AGREEMENTS = ("Agree", "Partial", "Disagree", "Unclear")


def prompt_template(version: str = PROMPT_VERSION) -> str:
    text = (resources.files("sentifolio") / "data" / f"verification_prompt_{version}.txt").read_text(encoding="utf-8")
    return text.removesuffix("\n")


def build_prompt(news_text: str, vader_score: float, template: str | None = None) -> str:
    """Fill the verification prompt; the score is rendered with two decimals."""
    if not news_text or not news_text.strip():
        raise ValueError("news_text is empty")
    return (template or prompt_template()).format(news_text=news_text, vader_score=vader_score)


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_ITEM = r"^[ \t>*_#]*(?:\*\*)?\s*{n}\s*[.)]"
_RECOMMENDATION_WORDS = [
    ("Increase", re.compile(r"\bincreas(?:e|es|ed|ing)\b", re.I)),
    ("Decrease", re.compile(r"\bdecreas(?:e|es|ed|ing)\b", re.I)),
    ("Hold", re.compile(r"\bhold(?:s|ing)?\b", re.I)),
]
_DISAGREE = re.compile(r"\b(?:disagree[sd]?|do(?:es)?\s+not\s+agree|don'?t\s+agree|can(?:not|'t)\s+agree)\b|^\W*no\b", re.I)
_PARTIAL = re.compile(r"\b(?:partial(?:ly)?|partly|somewhat|to\s+some\s+extent)\b", re.I)
_AGREE = re.compile(r"\b(?:agree[sd]?|yes)\b", re.I)


def _section(text: str, n: int) -> str | None:
    """Body of numbered item ``n`` (up to item ``n + 1``), or None if absent."""
    start = re.search(_ITEM.format(n=n), text, re.M)
    if start is None:
        return None
    rest = text[start.end():]
    stop = re.search(_ITEM.format(n=n + 1), rest, re.M)
    return rest[: stop.start()] if stop else rest


def _drop_echoed_question(section: str) -> str:
    # "1. **Do I agree with ...?**" restates the question; skip that header line
    first, _, rest = section.partition("\n")
    return rest if "?" in first else section


def _first_match(text: str) -> str | None:
    best = None
    for label, pattern in _RECOMMENDATION_WORDS:
        m = pattern.search(text)
        if m and (best is None or m.start() < best[0]):
            best = (m.start(), label)
    return best[1] if best else None


def _agreement(text: str) -> str | None:
    for label, pattern in (("Disagree", _DISAGREE), ("Partial", _PARTIAL), ("Agree", _AGREE)):
        if pattern.search(text):
            return label
    return None


def parse_recommendation(response: str) -> tuple[str, str]:
    """Return ``(recommendation, agreement)``; ``"Unclear"`` when nothing matches."""
    if not response or not response.strip():
        return "Unclear", "Unclear"
    advice = _section(response, 3)
    advice = _drop_echoed_question(advice) if advice is not None else response
    recommendation = _first_match(advice) or "Unclear"

    item1 = _section(response, 1)
    answer = _drop_echoed_question(item1).strip() if item1 is not None else response.strip()
    first_sentence = re.split(r"(?<=[.!])\s", answer, maxsplit=1)[0]
    agreement = _agreement(first_sentence) or _agreement(answer) or "Unclear"
    return recommendation, agreement


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------


class ChatTransport(Protocol):
    def complete(self, prompt: str, model: str) -> str: ...


@dataclass(frozen=True)
class VerifierConfig:
    transport: str = "mock"
    model: str = DEFAULT_MODEL
    endpoint: str = "https://generativelanguage.googleapis.com/v1beta/models/{model}:generateContent"
    api_key_env: str = "GEMINI_API_KEY"
    requests_per_second: float = 1.0
    max_retries: int = 3
    backoff: float = 1.0
    max_in_flight: int = 1
    timeout: float = 60.0
    temperature: float | None = None
    max_output_tokens: int | None = None
    mock_responses: str | None = None

    def __post_init__(self) -> None:
        if self.transport not in ("mock", "live"):
            raise ValueError("llm transport must be 'mock' or 'live'")
        if not self.requests_per_second > 0:
            raise ValueError("requests_per_second must be positive")
        if self.max_retries < 0 or self.backoff < 0:
            raise ValueError("retry settings must be non-negative")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


class GeminiTransport:
    """Live ``generateContent`` calls; the key is read from the environment."""

    def __init__(self, config: VerifierConfig, environ: Mapping[str, str] = os.environ):
        self.config = config
        self.api_key = environ.get(config.api_key_env, "")

    def validate(self) -> None:
        if not self.api_key:
            raise ConfigError(
                f"live verification needs an API key: set ${self.config.api_key_env} or use the mock transport"
            )

    def complete(self, prompt: str, model: str) -> str:
        body: dict = {"contents": [{"parts": [{"text": prompt}]}]}
        generation = {}
        if self.config.temperature is not None:
            generation["temperature"] = self.config.temperature
        if self.config.max_output_tokens is not None:
            generation["maxOutputTokens"] = self.config.max_output_tokens
        if generation:
            body["generationConfig"] = generation
        req = urllib.request.Request(
            self.config.endpoint.format(model=model),
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json", "x-goog-api-key": self.api_key},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            raise TransportError(f"HTTP {exc.code}", status=exc.code) from exc
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise TransportError(f"network error: {exc}") from exc
        try:
            return "".join(p.get("text", "") for p in payload["candidates"][0]["content"]["parts"])
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response schema: {exc}") from exc


class MockChatTransport:
    """Deterministic offline transport.

    ``responses`` maps a substring of the prompt to a canned reply; the first
    matching key wins, else ``default`` is returned. ``faults`` maps a prompt
    substring to an HTTP status that is raised on every attempt.
    """

    def __init__(self, default: str = "", responses: Mapping[str, str] | None = None,
                 faults: Mapping[str, int] | None = None):
        self.default = default
        self.responses = dict(responses or {})
        self.faults = dict(faults or {})
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "MockChatTransport":
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
        unknown = set(spec) - {"default", "responses", "faults"}
        if unknown:
            raise ConfigError(f"{path}: unknown mock keys {sorted(unknown)}")
        return cls(spec.get("default", ""), spec.get("responses"), spec.get("faults"))

    def complete(self, prompt: str, model: str) -> str:
        with self._lock:
            self.calls += 1
        for needle, status in self.faults.items():
            if needle in prompt:
                raise TransportError(f"HTTP {status}", status=status)
        for needle, reply in self.responses.items():
            if needle in prompt:
                return reply
        return self.default


def make_transport(config: VerifierConfig, base_dir: str | Path = ".",
                   environ: Mapping[str, str] = os.environ) -> ChatTransport:
    if config.transport == "live":
        transport = GeminiTransport(config, environ)
        transport.validate()
        return transport
    if config.mock_responses:
        return MockChatTransport.from_file(Path(base_dir) / config.mock_responses)
    return MockChatTransport()


# ---------------------------------------------------------------------------
# Batch verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationRequest:
    news_text: str
    vader_score: float
    model_name: str = DEFAULT_MODEL

    def __post_init__(self) -> None:
        if not self.news_text.strip():
            raise ValueError("news_text is empty")
        if not -1.0 <= self.vader_score <= 1.0:
            raise ValueError("vader_score outside [-1, 1]")


@dataclass(frozen=True)
class VerificationRecord:
    request: VerificationRequest
    raw_response: str
    recommendation: str
    agreement: str
    timestamp: str
    asset: str | None = None
    date: str | None = None
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


class _RateLimiter:
    def __init__(self, per_second: float, clock: Callable[[], float], sleep: Callable[[float], None]):
        self.interval = 1.0 / per_second
        self.clock, self.sleep = clock, sleep
        self._next = None
        self._lock = threading.Lock()

    def wait(self) -> None:
        with self._lock:
            now = self.clock()
            if self._next is not None and now < self._next:
                self.sleep(self._next - now)
                now = self._next
            self._next = now + self.interval


_RETRYABLE = frozenset({408, 429, 500, 502, 503, 504})


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def verify_batch(
    items: Iterable[tuple[NewsItem, float]],
    transport: ChatTransport | None,
    config: VerifierConfig = VerifierConfig(),
    *,
    out_path: str | Path | None = None,
    sleep: Callable[[float], None] = time.sleep,
    clock: Callable[[], float] = time.monotonic,
    now: Callable[[], str] = _utc_now,
) -> list[VerificationRecord]:
    """Verify each ``(news item, compound)`` pair; one record per item, in input order.

    Failed requests become ``Unclear`` records carrying the error text. The
    transport is validated before the first request.
    """
    if transport is None or not callable(getattr(transport, "complete", None)):
        raise ConfigError("no chat transport configured")
    validate = getattr(transport, "validate", None)
    if callable(validate):
        validate()
    items = list(items)
    limiter = _RateLimiter(config.requests_per_second, clock, sleep)

    def one(pair: tuple[NewsItem, float]) -> VerificationRecord:
        item, score = pair
        request = VerificationRequest(item.text, score, config.model)
        prompt = build_prompt(request.news_text, request.vader_score)
        error = None
        for attempt in range(config.max_retries + 1):
            limiter.wait()
            try:
                raw = transport.complete(prompt, config.model)
                break
            except TransportError as exc:
                retryable = exc.status is None or exc.status in _RETRYABLE
                if not retryable or attempt == config.max_retries:
                    error = f"{exc} after {attempt} retries" if retryable else str(exc)
                    break
                delay = config.backoff * 2**attempt
                log.warning("verify %s %s: %s, retry %d/%d in %.1fs",
                            item.asset, item.date, exc, attempt + 1, config.max_retries, delay)
                sleep(delay)
        if error is not None:
            return VerificationRecord(request, "", "Unclear", "Unclear", now(),
                                      item.asset, item.date.isoformat(), error)
        recommendation, agreement = parse_recommendation(raw)
        return VerificationRecord(request, raw, recommendation, agreement, now(),
                                  item.asset, item.date.isoformat())

    if config.max_in_flight > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            records = list(pool.map(one, items))
    else:
        records = [one(pair) for pair in items]

    if out_path is not None:
        write_records(records, out_path)
    return records


def write_records(records: Sequence[VerificationRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
