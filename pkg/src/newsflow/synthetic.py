"""Synthetic corpus generator with recorded ground truth.

Produces a deterministic market: one latent market-wide sentiment signal
observed through four noisy source channels, and per-ticker mean-reverting
prices whose next-day move is partly driven by today's sentiment. An
optional adversarial mode corrupts one source with saturated spikes in the
final stretch of the training span, signed against the next-day price move
so that a model trusting that source is actively misled.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .dataprep import JointSeries, PriceSeries
from .sentiment import SOURCE_COLUMNS, DailySourceScores

__all__ = ["FixtureSpec", "Fixture", "generate_fixture", "write_fixture", "derive_seed"]


def derive_seed(seed: int, label: str) -> int:
    """Stable per-label sub-seed (Python's hash() is salted, so digest instead)."""
    digest = hashlib.sha256(f"{seed}|{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class FixtureSpec:
    """Shape and dynamics of the generated corpus."""

    days: int = 121
    tickers: tuple[str, ...] = ("AAA", "BBB", "CCC")
    seed: int = 0
    start: date = date(2020, 1, 2)
    base_price: float = 100.0
    price_persistence: float = 0.99
    sentiment_coupling: float = 2.0
    price_noise: float = 0.10
    sentiment_persistence: float = 0.9
    sentiment_shock: float = 0.12
    source_noise: float = 0.05
    split_hint: float = 0.85
    spike_source: int | None = None
    spike_count: int = 0
    spike_span: int = 12
    spike_magnitude: float = 1.0

    def __post_init__(self) -> None:
        if self.days < 3:
            raise ValueError("need at least 3 days")
        if not self.tickers:
            raise ValueError("need at least one ticker")
        if self.spike_count > 0 and self.spike_source is None:
            raise ValueError("spike_count > 0 requires a spike_source")
        if self.spike_source is not None and not 0 <= self.spike_source < 4:
            raise ValueError("spike_source must be 0..3")

    @property
    def adversarial(self) -> bool:
        return self.spike_count > 0 and self.spike_source is not None


@dataclass(frozen=True)
class Fixture:
    """Generated prices, scores, and the sidecar ground-truth description."""

    spec: FixtureSpec
    calendar: tuple[date, ...]
    prices: dict[str, PriceSeries]
    scores: list[DailySourceScores]
    meta: dict

    def joint(self, ticker: str) -> JointSeries:
        series = self.prices[ticker]
        by_date = {s.date: s.scores for s in self.scores}
        rows = np.empty((len(series), 5))
        rows[:, 0] = series.prices
        for k, day in enumerate(series.dates):
            rows[k, 1:] = by_date[day]
        return JointSeries(series.dates, rows)


def _weekday_calendar(start: date, days: int) -> tuple[date, ...]:
    out = []
    day = start
    while len(out) < days:
        if day.weekday() < 5:
            out.append(day)
        day += timedelta(days=1)
    return tuple(out)


def generate_fixture(spec: FixtureSpec) -> Fixture:
    """Deterministically generate the corpus described by ``spec``."""
    calendar = _weekday_calendar(spec.start, spec.days)
    market_rng = np.random.default_rng(derive_seed(spec.seed, "market"))

    latent = np.zeros(spec.days)
    for t in range(1, spec.days):
        latent[t] = (
            spec.sentiment_persistence * latent[t - 1]
            + market_rng.normal(0.0, spec.sentiment_shock)
        )
    latent = np.tanh(latent)

    sources = np.clip(
        latent[:, None] + market_rng.normal(0.0, spec.source_noise, size=(spec.days, 4)),
        -1.0,
        1.0,
    )

    prices: dict[str, PriceSeries] = {}
    returns_for_spikes: np.ndarray | None = None
    for ticker in spec.tickers:
        rng = np.random.default_rng(derive_seed(spec.seed, f"ticker:{ticker}"))
        level = spec.base_price * (1.0 + 0.5 * rng.random())
        x = np.empty(spec.days)
        x[0] = level
        for t in range(1, spec.days):
            drift = spec.sentiment_coupling * latent[t - 1]
            x[t] = (
                level
                + spec.price_persistence * (x[t - 1] - level)
                + drift
                + rng.normal(0.0, spec.price_noise)
            )
            x[t] = max(x[t], 1.0)
        prices[ticker] = PriceSeries(ticker, calendar, x)
        if returns_for_spikes is None:
            returns_for_spikes = np.diff(x)

    spike_days: list[int] = []
    if spec.adversarial:
        n_train = math.floor(spec.split_hint * spec.days)
        lo = max(1, n_train - spec.spike_span)
        candidates = list(range(lo, n_train))
        spike_rng = np.random.default_rng(derive_seed(spec.seed, "spikes"))
        count = min(spec.spike_count, len(candidates))
        spike_days = sorted(spike_rng.choice(candidates, size=count, replace=False).tolist())
        mag = min(abs(spec.spike_magnitude), 1.0)
        for t in spike_days:
            # Signed against the first ticker's next-day move: a model leaning
            # on this source learns an inverted relationship.
            move = returns_for_spikes[t] if t < len(returns_for_spikes) else 0.0
            sources[t, spec.spike_source] = -mag if move > 0 else mag

    scores = [
        DailySourceScores(
            calendar[t],
            tuple(float(v) for v in sources[t]),
            (1, 1, 1, 1),
        )
        for t in range(spec.days)
    ]
    meta = {
        "generator": "newsflow.synthetic",
        "seed": spec.seed,
        "days": spec.days,
        "tickers": list(spec.tickers),
        "start": spec.start.isoformat(),
        "base_price": spec.base_price,
        "price_persistence": spec.price_persistence,
        "sentiment_coupling": spec.sentiment_coupling,
        "price_noise": spec.price_noise,
        "sentiment_persistence": spec.sentiment_persistence,
        "sentiment_shock": spec.sentiment_shock,
        "source_noise": spec.source_noise,
        "split_hint": spec.split_hint,
        "adversarial": spec.adversarial,
        "spikes": None
        if not spec.adversarial
        else {
            "source": spec.spike_source,
            "source_column": SOURCE_COLUMNS[spec.spike_source],
            "magnitude": min(abs(spec.spike_magnitude), 1.0),
            "day_indices": spike_days,
            "scheme": "signed against next-day price move",
        },
    }
    return Fixture(spec, calendar, prices, scores, meta)


def write_fixture(fixture: Fixture, out_dir: str | Path) -> dict[str, Path]:
    """Write prices.csv, scores.csv, calendar.txt, and fixture_meta.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "prices": out / "prices.csv",
        "scores": out / "scores.csv",
        "calendar": out / "calendar.txt",
        "meta": out / "fixture_meta.json",
    }
    with open(paths["prices"], "w", encoding="utf-8") as fh:
        fh.write("date,ticker,adj_close\n")
        for ticker in fixture.spec.tickers:
            series = fixture.prices[ticker]
            for day, price in zip(series.dates, series.prices):
                fh.write(f"{day.isoformat()},{ticker},{float(price)!r}\n")
    from .sentiment import write_daily_scores_csv

    write_daily_scores_csv(fixture.scores, paths["scores"])
    paths["calendar"].write_text(
        "".join(f"{d.isoformat()}\n" for d in fixture.calendar), encoding="utf-8"
    )
    with open(paths["meta"], "w", encoding="utf-8") as fh:
        json.dump(fixture.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
