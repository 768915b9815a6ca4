"""Lexicon-driven sentiment scoring of financial news headlines.

Scores individual titles with a valence lexicon plus negation and booster
heuristics, then aggregates a mean compound score per trading day for each
of the four news sources the forecasting pipeline consumes.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import re
from bisect import bisect_left
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime
from importlib import resources
from pathlib import Path

__all__ = [
    "COMPOUND_SCALE",
    "NEGATION_FACTOR",
    "Source",
    "SOURCE_COLUMNS",
    "Lexicon",
    "LexiconFormatError",
    "CorpusFormatError",
    "SentimentScore",
    "NewsItem",
    "DailySourceScores",
    "load_lexicon",
    "default_lexicon",
    "tokenize",
    "score_text",
    "aggregate_daily",
    "word_frequency",
    "load_news",
    "source_from_site",
    "write_word_frequency_csv",
    "write_daily_scores_csv",
    "read_daily_scores_csv",
]

# Compound normalization: raw valence sum x maps to x / sqrt(x^2 + COMPOUND_SCALE).
COMPOUND_SCALE = 15.0
# A negator within NEGATION_LOOKBACK tokens before a hit multiplies its valence.
NEGATION_FACTOR = -0.74
NEGATION_LOOKBACK = 3
# Booster strength at distance 1, 2, 3 before the hit.
BOOSTER_DAMPING = (1.0, 0.95, 0.9)

_BOOST = 0.293

DEFAULT_BOOSTERS: dict[str, float] = {
    "very": _BOOST,
    "really": _BOOST,
    "extremely": _BOOST,
    "absolutely": _BOOST,
    "completely": _BOOST,
    "highly": _BOOST,
    "hugely": _BOOST,
    "incredibly": _BOOST,
    "remarkably": _BOOST,
    "sharply": _BOOST,
    "significantly": _BOOST,
    "substantially": _BOOST,
    "strongly": _BOOST,
    "deeply": _BOOST,
    "greatly": _BOOST,
    "slightly": -_BOOST,
    "somewhat": -_BOOST,
    "marginally": -_BOOST,
    "mildly": -_BOOST,
    "moderately": -_BOOST,
    "partly": -_BOOST,
    "nearly": -_BOOST,
    "almost": -_BOOST,
    "fairly": -_BOOST,
}

DEFAULT_NEGATORS: frozenset[str] = frozenset(
    {
        "not", "no", "never", "neither", "nor", "none", "nobody", "nothing",
        "nowhere", "hardly", "scarcely", "seldom", "rarely", "without",
        "cannot", "can't", "won't", "don't", "doesn't", "didn't", "isn't",
        "wasn't", "aren't", "weren't", "haven't", "hasn't", "hadn't",
        "shouldn't", "wouldn't", "couldn't", "ain't",
    }
)

DEFAULT_STOP_WORDS: frozenset[str] = frozenset(
    {
        "a", "an", "the", "and", "or", "but", "of", "to", "in", "on", "for",
        "as", "at", "by", "with", "from", "up", "down", "is", "are", "was",
        "were", "be", "been", "it", "its", "this", "that", "these", "those",
        "after", "before", "over", "under", "amid", "into", "out", "about",
        "than", "more", "most", "less", "least", "new", "will", "could",
        "would", "should", "may", "might", "has", "have", "had", "not", "no",
        "say", "says", "said",
    }
)


class Source(enum.IntEnum):
    """The four news publishers, in the fixed channel order used everywhere."""

    WSJ = 0
    CNBC = 1
    FORTUNE = 2
    REUTERS = 3

    @property
    def label(self) -> str:
        return _SOURCE_LABELS[self]


_SOURCE_LABELS = {
    Source.WSJ: "WSJ",
    Source.CNBC: "CNBC",
    Source.FORTUNE: "Fortune",
    Source.REUTERS: "Reuters",
}

# Canonical CSV column names for the per-source compound scores.
SOURCE_COLUMNS = ("s_wsj", "s_cnbc", "s_fortune", "s_reuters")
_COUNT_COLUMNS = ("n_wsj", "n_cnbc", "n_fortune", "n_reuters")

_SITE_KEYS = {
    "wsj": Source.WSJ,
    "cnbc": Source.CNBC,
    "fortune": Source.FORTUNE,
    "reuters": Source.REUTERS,
}


def source_from_site(site: str) -> Source | None:
    """Map a publisher domain string (e.g. ``"WSJ.com"``) to a Source, or None."""
    normalized = site.strip().lower()
    for key, src in _SITE_KEYS.items():
        if key in normalized:
            return src
    return None


class LexiconFormatError(ValueError):
    """A lexicon file line could not be parsed."""


class CorpusFormatError(ValueError):
    """A news corpus record could not be parsed."""


@dataclass(frozen=True)
class Lexicon:
    """Valence lexicon plus the negator/booster word lists used when scoring.

    ``entries`` maps lowercase tokens to mean valence (typically in [-4, 4]).
    ``boosters`` maps intensity modifiers to a signed increment applied to a
    following hit's valence magnitude. ``negators`` flip the valence sign of
    a hit they precede.
    """

    entries: dict[str, float]
    boosters: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BOOSTERS))
    negators: frozenset[str] = DEFAULT_NEGATORS

    def __post_init__(self) -> None:
        for name, mapping in (("entries", self.entries), ("boosters", self.boosters)):
            for token, valence in mapping.items():
                if not token or token != token.lower():
                    raise ValueError(f"{name} token {token!r} must be non-empty lowercase")
                if not math.isfinite(valence):
                    raise ValueError(f"{name} token {token!r} has non-finite valence")
        for token in self.negators:
            if not token or token != token.lower():
                raise ValueError(f"negator {token!r} must be non-empty lowercase")


def load_lexicon(
    path: str | Path,
    *,
    boosters: dict[str, float] | None = None,
    negators: frozenset[str] | None = None,
) -> Lexicon:
    """Parse a tab-separated ``token<TAB>valence`` lexicon file.

    Extra tab-separated columns are ignored (the public VADER lexicon layout).
    Later duplicate tokens override earlier ones. Raises LexiconFormatError
    with the offending line number on malformed input.
    """
    entries: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise LexiconFormatError(f"{path}:{lineno}: expected 'token<TAB>valence'")
            token = parts[0].strip().lower()
            if not token:
                raise LexiconFormatError(f"{path}:{lineno}: empty token")
            try:
                valence = float(parts[1])
            except ValueError:
                raise LexiconFormatError(
                    f"{path}:{lineno}: valence {parts[1]!r} is not a number"
                ) from None
            if not math.isfinite(valence):
                raise LexiconFormatError(f"{path}:{lineno}: valence must be finite")
            entries[token] = valence
    return Lexicon(
        entries,
        boosters=dict(DEFAULT_BOOSTERS) if boosters is None else dict(boosters),
        negators=DEFAULT_NEGATORS if negators is None else frozenset(negators),
    )


def default_lexicon() -> Lexicon:
    """The small finance-headline lexicon shipped with the package."""
    ref = resources.files("newsflow.data").joinpath("default_lexicon.tsv")
    with resources.as_file(ref) as path:
        return load_lexicon(path)


_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens, punctuation stripped except intra-word apostrophes."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class SentimentScore:
    """Polarity proportions plus the normalized compound score of one text."""

    pos: float
    neg: float
    neu: float
    compound: float

    def __post_init__(self) -> None:
        if abs(self.pos + self.neg + self.neu - 1.0) > 1e-6:
            raise ValueError("pos + neg + neu must sum to 1")
        if not -1.0 <= self.compound <= 1.0:
            raise ValueError("compound must lie in [-1, 1]")


@dataclass(frozen=True)
class NewsItem:
    """One headline: publication date, publisher, and title text."""

    published: date
    source: Source
    title: str

    def __post_init__(self) -> None:
        if not isinstance(self.published, date) or isinstance(self.published, datetime):
            raise ValueError("published must be a calendar date")
        if not isinstance(self.source, Source):
            raise ValueError("source must be a Source")
        if not self.title.strip():
            raise ValueError("title must be non-empty")


@dataclass(frozen=True)
class DailySourceScores:
    """Mean compound per source for one trading date, with article counts."""

    date: date
    scores: tuple[float, float, float, float]
    counts: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.scores) != 4 or len(self.counts) != 4:
            raise ValueError("scores and counts must have one slot per source")
        for s in self.scores:
            if not -1.0 <= s <= 1.0:
                raise ValueError("per-source scores must lie in [-1, 1]")
        for n in self.counts:
            if n < 0:
                raise ValueError("counts must be non-negative")


def _adjusted_valence(tokens: list[str], idx: int, base: float, lexicon: Lexicon) -> float:
    """Apply booster increments and negation flips from the preceding tokens."""
    valence = base
    for dist in range(1, NEGATION_LOOKBACK + 1):
        j = idx - dist
        if j < 0:
            break
        prev = tokens[j]
        if prev in lexicon.entries:
            # A scored word does not double as a modifier.
            continue
        inc = lexicon.boosters.get(prev)
        if inc is not None and base != 0.0:
            step = inc * BOOSTER_DAMPING[dist - 1]
            valence += step if base > 0 else -step
    for dist in range(1, NEGATION_LOOKBACK + 1):
        j = idx - dist
        if j < 0:
            break
        prev = tokens[j]
        if prev in lexicon.negators and prev not in lexicon.entries:
            valence *= NEGATION_FACTOR
    return valence


def score_text(lexicon: Lexicon, text: str) -> SentimentScore:
    """Score one text.

    Lexicon hits contribute their (negation/booster adjusted) valence to a
    running sum; the compound score is sum / sqrt(sum^2 + COMPOUND_SCALE).
    The pos/neg/neu proportions weight each hit by |valence| + 1 and each
    neutral token by 1, then normalize so they always sum to one.
    """
    tokens = tokenize(text)
    pos_mass = 0.0
    neg_mass = 0.0
    neu_mass = 0.0
    total = 0.0
    for idx, token in enumerate(tokens):
        base = lexicon.entries.get(token)
        if base is None:
            neu_mass += 1.0
            continue
        valence = _adjusted_valence(tokens, idx, base, lexicon)
        total += valence
        if valence > 0:
            pos_mass += valence + 1.0
        elif valence < 0:
            neg_mass += -valence + 1.0
        else:
            neu_mass += 1.0
    compound = total / math.sqrt(total * total + COMPOUND_SCALE)
    compound = max(-1.0, min(1.0, compound))
    mass = pos_mass + neg_mass + neu_mass
    if mass == 0.0:
        return SentimentScore(0.0, 0.0, 1.0, compound)
    return SentimentScore(pos_mass / mass, neg_mass / mass, neu_mass / mass, compound)


def aggregate_daily(
    items: list[NewsItem],
    lexicon: Lexicon,
    calendar: list[date],
    *,
    neutral_fill: float = 0.0,
) -> list[DailySourceScores]:
    """Mean compound per (trading date, source) over the calendar.

    Items published on non-trading days count toward the next trading date;
    items after the final trading date are dropped. Cells with no articles
    get ``neutral_fill`` and count 0. Output length always equals the
    calendar length. Pure and order-invariant (per-cell sums use fsum).
    """
    if any(b <= a for a, b in zip(calendar, calendar[1:])):
        raise ValueError("calendar must be sorted ascending with unique dates")
    cells: dict[tuple[date, Source], list[float]] = defaultdict(list)
    for item in items:
        idx = bisect_left(calendar, item.published)
        if idx == len(calendar):
            continue
        compound = score_text(lexicon, item.title).compound
        cells[(calendar[idx], item.source)].append(compound)
    out = []
    for day in calendar:
        scores = []
        counts = []
        for src in Source:
            values = cells.get((day, src))
            if values:
                scores.append(math.fsum(values) / len(values))
                counts.append(len(values))
            else:
                scores.append(neutral_fill)
                counts.append(0)
        out.append(DailySourceScores(day, tuple(scores), tuple(counts)))
    return out


def word_frequency(
    items: list[NewsItem],
    lexicon: Lexicon,
    polarity: str,
    *,
    stop_words: frozenset[str] = DEFAULT_STOP_WORDS,
) -> list[tuple[str, int]]:
    """Ranked (token, count) list over titles of the requested polarity.

    Titles are partitioned by the sign of their compound score (zero-compound
    titles belong to neither side). Stop words are excluded. Sorted by count
    descending, then token ascending.
    """
    if polarity not in ("positive", "negative"):
        raise ValueError("polarity must be 'positive' or 'negative'")
    counter: Counter[str] = Counter()
    for item in items:
        compound = score_text(lexicon, item.title).compound
        if polarity == "positive" and compound <= 0:
            continue
        if polarity == "negative" and compound >= 0:
            continue
        counter.update(t for t in tokenize(item.title) if t not in stop_words)
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))


def _parse_iso_date(value: str, context: str) -> date:
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        return date.fromisoformat(text[:10]) if "T" not in text and " " not in text else datetime.fromisoformat(text).date()
    except ValueError:
        raise CorpusFormatError(f"{context}: bad ISO date {value!r}") from None


def load_news(path: str | Path) -> tuple[list[NewsItem], dict[str, int]]:
    """Read a newline-delimited JSON corpus of ``{title, published, site}`` records.

    Returns the parsed items plus a map of unrecognized ``site`` values to the
    number of records skipped for each. Structural problems (bad JSON, missing
    fields, unparsable dates) raise CorpusFormatError naming the line.
    """
    items: list[NewsItem] = []
    skipped: Counter[str] = Counter()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            for key in ("title", "published", "site"):
                if key not in record:
                    raise CorpusFormatError(f"{path}:{lineno}: missing field {key!r}")
            title = str(record["title"])
            if not title.strip():
                raise CorpusFormatError(f"{path}:{lineno}: empty title")
            source = source_from_site(str(record["site"]))
            if source is None:
                skipped[str(record["site"])] += 1
                continue
            published = _parse_iso_date(str(record["published"]), f"{path}:{lineno}")
            items.append(NewsItem(published, source, title))
    return items, dict(skipped)


def write_word_frequency_csv(rows: list[tuple[str, int]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["token", "count"])
        writer.writerows(rows)


def write_daily_scores_csv(rows: list[DailySourceScores], path: str | Path) -> None:
    """Write the per-day source scores in the documented CSV layout."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *SOURCE_COLUMNS, *_COUNT_COLUMNS])
        for row in rows:
            writer.writerow(
                [row.date.isoformat(), *[repr(s) for s in row.scores], *row.counts]
            )


def read_daily_scores_csv(path: str | Path) -> list[DailySourceScores]:
    """Read the CSV written by :func:`write_daily_scores_csv` (counts optional)."""
    out: list[DailySourceScores] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("date", *SOURCE_COLUMNS) if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for lineno, record in enumerate(reader, start=2):
            try:
                day = date.fromisoformat(record["date"])
                scores = tuple(float(record[c]) for c in SOURCE_COLUMNS)
                counts = tuple(
                    int(record[c]) if record.get(c) not in (None, "") else 0
                    for c in _COUNT_COLUMNS
                )
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            out.append(DailySourceScores(day, scores, counts))
    return out
