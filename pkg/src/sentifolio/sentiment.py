"""Lexicon and rule based sentiment scoring, VADER compatible, plus daily aggregation.

The valence ratings come from the distributed VADER lexicon file (shipped in
``sentifolio/data``); the rules below reproduce the reference scorer's
behaviour, including its quirks, so compound scores line up with it.
"""
from __future__ import annotations

import math
import string
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .market_data import NewsItem

# empirically derived increments from the original VADER study
BOOST_INCREMENT = 0.293
CAPS_INCREMENT = 0.733
NEGATION_SCALAR = -0.74
EXCLAMATION_INCREMENT = 0.292
MAX_EXCLAMATIONS = 4
QUESTION_INCREMENT = 0.18
QUESTION_CEILING = 0.96
BUT_BEFORE, BUT_AFTER = 0.5, 1.5
DEFAULT_ALPHA = 15.0

NEGATIONS = frozenset({
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt",
    "ain't", "aren't", "can't", "couldn't", "daren't", "didn't", "doesn't",
    "dont", "hadnt", "hasnt", "havent", "isnt", "mightnt", "mustnt", "neither",
    "don't", "hadn't", "hasn't", "haven't", "isn't", "mightn't", "mustn't",
    "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing", "nowhere",
    "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent",
    "oughtn't", "shan't", "shouldn't", "uh-uh", "wasn't", "weren't",
    "without", "wont", "wouldnt", "won't", "wouldn't", "rarely", "seldom", "despite",
})

_UP = BOOST_INCREMENT
_DOWN = -BOOST_INCREMENT
BOOSTERS: Mapping[str, float] = {
    **dict.fromkeys((
        "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
        "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
        "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping",
        "flippin", "frackin", "fracking", "fricking", "frickin", "frigging", "friggin",
        "fully", "fuckin", "fucking", "fuggin", "fugging", "greatly", "hella", "highly",
        "hugely", "incredible", "incredibly", "intensely", "major", "majorly", "more",
        "most", "particularly", "purely", "quite", "really", "remarkably", "so",
        "substantially", "thoroughly", "total", "totally", "tremendous", "tremendously",
        "uber", "unbelievably", "unusually", "utter", "utterly", "very",
    ), _UP),
    **dict.fromkeys((
        "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof",
        "kind-of", "less", "little", "marginal", "marginally", "occasional",
        "occasionally", "partly", "scarce", "scarcely", "slight", "slightly", "somewhat",
        "sort of", "sorta", "sortof", "sort-of",
    ), _DOWN),
}

SPECIAL_CASES: Mapping[str, float] = {
    "the shit": 3, "the bomb": 3, "bad ass": 1.5, "badass": 1.5, "bus stop": 0.0,
    "yeah right": -2, "kiss of death": -1.5, "to die for": 3, "beating heart": 3.5,
}


@dataclass(frozen=True)
class SentimentScores:
    neg: float
    neu: float
    pos: float
    compound: float


@dataclass(frozen=True)
class Lexicon:
    valence: Mapping[str, float]
    boosters: Mapping[str, float] = field(default_factory=lambda: dict(BOOSTERS))
    negations: frozenset = NEGATIONS
    special_cases: Mapping[str, float] = field(default_factory=lambda: dict(SPECIAL_CASES))
    emojis: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.valence:
            raise ValueError("lexicon is empty")
        bad = [w for w, v in self.valence.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite ratings for {bad[:5]}")


@dataclass(frozen=True)
class DailySentiment:
    asset: str
    date: date
    mean_compound: float
    article_count: int


def _read_pairs(text: str) -> dict[str, str]:
    pairs = {}
    for line in text.rstrip("\n").split("\n"):
        if not line:
            continue
        key, value = line.strip().split("\t")[:2]
        pairs[key] = value
    return pairs


def load_lexicon(path: str | Path | None = None, emoji_path: str | Path | None = None) -> Lexicon:
    """Load a tab-separated ``token<TAB>rating<TAB>...`` lexicon.

    Without arguments the bundled VADER lexicon and emoji table are used.
    """
    data = resources.files("sentifolio") / "data"
    lex_text = (Path(path) if path else data / "vader_lexicon.txt").read_text(encoding="utf-8")
    emo_text = (Path(emoji_path) if emoji_path else data / "emoji_utf8_lexicon.txt").read_text(encoding="utf-8")
    valence = {w: float(v) for w, v in _read_pairs(lex_text).items()}
    return Lexicon(valence=valence, emojis=_read_pairs(emo_text))


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return load_lexicon()


def normalize_compound(raw_sum: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Map a summed valence onto (-1, 1) via ``x / sqrt(x^2 + alpha)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    score = raw_sum / math.hypot(raw_sum, math.sqrt(alpha))
    return max(-1.0, min(1.0, score))


def _replace_emojis(text: str, emojis: Mapping[str, str]) -> str:
    if not emojis:
        return text
    out = []
    prev_space = True
    for ch in text:
        if ch in emojis:
            if not prev_space:
                out.append(" ")
            out.append(emojis[ch])
            prev_space = False
        else:
            out.append(ch)
            prev_space = ch == " "
    return "".join(out)


def _tokenize(text: str) -> list[str]:
    # strip edge punctuation unless that leaves <= 2 chars (keeps emoticons like ":)")
    tokens = []
    for tok in text.split():
        stripped = tok.strip(string.punctuation)
        tokens.append(tok if len(stripped) <= 2 else stripped)
    return tokens


def _is_negation(word: str, lex: Lexicon) -> bool:
    return word in lex.negations or "n't" in word


def _booster_scalar(word: str, valence: float, cap_diff: bool, lex: Lexicon) -> float:
    scalar = lex.boosters.get(word.lower(), 0.0)
    if scalar == 0.0:
        return 0.0
    if valence < 0:
        scalar = -scalar
    if word.isupper() and cap_diff:
        scalar += CAPS_INCREMENT if valence > 0 else -CAPS_INCREMENT
    return scalar


def _negation_check(valence: float, low: list[str], dist: int, i: int, lex: Lexicon) -> float:
    if dist == 0:
        if _is_negation(low[i - 1], lex):
            valence *= NEGATION_SCALAR
    elif dist == 1:
        if low[i - 2] == "never" and low[i - 1] in ("so", "this"):
            valence *= 1.25
        elif low[i - 2] == "without" and low[i - 1] == "doubt":
            pass
        elif _is_negation(low[i - 2], lex):
            valence *= NEGATION_SCALAR
    else:
        # operator precedence mirrors the reference scorer
        if (low[i - 3] == "never" and low[i - 2] in ("so", "this")) or low[i - 1] in ("so", "this"):
            valence *= 1.25
        elif low[i - 3] == "without" and "doubt" in (low[i - 2], low[i - 1]):
            pass
        elif _is_negation(low[i - 3], lex):
            valence *= NEGATION_SCALAR
    return valence


def _special_idioms(valence: float, low: list[str], i: int, lex: Lexicon) -> float:
    one_zero = f"{low[i - 1]} {low[i]}"
    two_one_zero = f"{low[i - 2]} {low[i - 1]} {low[i]}"
    two_one = f"{low[i - 2]} {low[i - 1]}"
    three_two_one = f"{low[i - 3]} {low[i - 2]} {low[i - 1]}"
    three_two = f"{low[i - 3]} {low[i - 2]}"
    for seq in (one_zero, two_one_zero, two_one, three_two_one, three_two):
        if seq in lex.special_cases:
            valence = lex.special_cases[seq]
            break
    if len(low) - 1 > i:
        seq = f"{low[i]} {low[i + 1]}"
        if seq in lex.special_cases:
            valence = lex.special_cases[seq]
    if len(low) - 1 > i + 1:
        seq = f"{low[i]} {low[i + 1]} {low[i + 2]}"
        if seq in lex.special_cases:
            valence = lex.special_cases[seq]
    for ngram in (three_two_one, three_two, two_one):
        if ngram in lex.boosters:
            valence += lex.boosters[ngram]
    return valence


def _least_check(valence: float, low: list[str], i: int, lex: Lexicon) -> float:
    if i > 1 and low[i - 1] not in lex.valence and low[i - 1] == "least":
        if low[i - 2] not in ("at", "very"):
            valence *= NEGATION_SCALAR
    elif i > 0 and low[i - 1] not in lex.valence and low[i - 1] == "least":
        valence *= NEGATION_SCALAR
    return valence


def _token_valence(i: int, tokens: list[str], low: list[str], cap_diff: bool, lex: Lexicon) -> float:
    word = low[i]
    if word not in lex.valence:
        return 0.0
    valence = lex.valence[word]
    if word == "no" and i != len(tokens) - 1 and low[i + 1] in lex.valence:
        valence = 0.0
    if (i > 0 and low[i - 1] == "no") or (i > 1 and low[i - 2] == "no") or (
        i > 2 and low[i - 3] == "no" and low[i - 1] in ("or", "nor")
    ):
        valence = lex.valence[word] * NEGATION_SCALAR
    if tokens[i].isupper() and cap_diff:
        valence += CAPS_INCREMENT if valence > 0 else -CAPS_INCREMENT
    for dist in range(3):
        if i > dist and low[i - dist - 1] not in lex.valence:
            s = _booster_scalar(tokens[i - dist - 1], valence, cap_diff, lex)
            if dist == 1 and s != 0:
                s *= 0.95
            elif dist == 2 and s != 0:
                s *= 0.9
            valence += s
            valence = _negation_check(valence, low, dist, i, lex)
            if dist == 2:
                valence = _special_idioms(valence, low, i, lex)
    return _least_check(valence, low, i, lex)


def _but_reweight(low: list[str], valences: list[float]) -> list[float]:
    if "but" not in low:
        return valences
    bi = low.index("but")
    out = list(valences)
    # The reference locates each value with list.index(), i.e. the first equal
    # value in the partially updated list; reproduced for score parity.
    for k in range(len(out)):
        v = out[k]
        si = out.index(v)
        if si < bi:
            out[si] = v * BUT_BEFORE
        elif si > bi:
            out[si] = v * BUT_AFTER
    return out


def _punctuation_amplifier(text: str) -> float:
    amp = min(text.count("!"), MAX_EXCLAMATIONS) * EXCLAMATION_INCREMENT
    q = text.count("?")
    if q > 1:
        amp += q * QUESTION_INCREMENT if q <= 3 else QUESTION_CEILING
    return amp


def score_text(text: str, lexicon: Lexicon | None = None) -> SentimentScores:
    """Score one text. Proportions are unrounded and sum to 1."""
    lex = lexicon if lexicon is not None else default_lexicon()
    text = _replace_emojis(text, lex.emojis).strip()
    tokens = _tokenize(text)
    if not tokens:
        return SentimentScores(0.0, 1.0, 0.0, 0.0)
    low = [t.lower() for t in tokens]
    n_caps = sum(t.isupper() for t in tokens)
    cap_diff = 0 < len(tokens) - n_caps < len(tokens)

    valences: list[float] = []
    for i in range(len(tokens)):
        if low[i] in lex.boosters or (low[i] == "kind" and i + 1 < len(tokens) and low[i + 1] == "of"):
            valences.append(0.0)
            continue
        valences.append(_token_valence(i, tokens, low, cap_diff, lex))
    valences = _but_reweight(low, valences)

    amp = _punctuation_amplifier(text)
    total = float(sum(valences))
    if total > 0:
        total += amp
    elif total < 0:
        total -= amp
    compound = normalize_compound(total)

    pos_sum = sum(v + 1 for v in valences if v > 0)
    neg_sum = sum(v - 1 for v in valences if v < 0)
    neu_count = sum(1 for v in valences if v == 0)
    if pos_sum > abs(neg_sum):
        pos_sum += amp
    elif pos_sum < abs(neg_sum):
        neg_sum -= amp
    denom = pos_sum + abs(neg_sum) + neu_count
    return SentimentScores(
        neg=abs(neg_sum / denom), neu=abs(neu_count / denom), pos=abs(pos_sum / denom), compound=compound
    )


def score_news(items: Iterable[NewsItem], lexicon: Lexicon | None = None) -> list[tuple[NewsItem, SentimentScores]]:
    return [(item, score_text(item.text, lexicon)) for item in items]


def aggregate_daily(scored: Iterable[tuple[NewsItem, SentimentScores]]) -> list[DailySentiment]:
    """Unweighted mean compound per (asset, date), sorted by asset then date.

    ``math.fsum`` makes the mean independent of article order.
    """
    groups: dict[tuple[str, date], list[float]] = defaultdict(list)
    for item, scores in scored:
        groups[(item.asset, item.date)].append(scores.compound)
    return [
        DailySentiment(asset, day, math.fsum(vals) / len(vals), len(vals))
        for (asset, day), vals in sorted(groups.items())
    ]
