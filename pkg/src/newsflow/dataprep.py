"""Price/sentiment ingestion, rolling windows, min-max scaling, noise augmentation.

The pipeline turns an aligned (price, 4 x compound) series into per-window
normalized training data: stride-1 windows of length p with the next-day
price as target, a chronological train/test split, and optionally four
training copies in which one news source at a time carries added Gaussian
noise scaled by that source's training-span variance.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .sentiment import SOURCE_COLUMNS, DailySourceScores

__all__ = [
    "PriceSeries",
    "JointSeries",
    "Window",
    "WindowedDataset",
    "NoiseConfig",
    "DegenerateWindowError",
    "load_prices",
    "build_joint_series",
    "zero_sentiment",
    "save_joint_csv",
    "load_joint_csv",
    "normalize_window",
    "denormalize",
    "build_windows",
    "estimate_source_variance",
    "add_noise",
    "build_augmented_trainset",
]

log = logging.getLogger(__name__)

JOINT_HEADER = ("date", "price", *SOURCE_COLUMNS)

N_SOURCES = 4
ROW_WIDTH = 1 + N_SOURCES


class DegenerateWindowError(ValueError):
    """A window's price values are constant, so min-max scaling is undefined."""


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Per-ticker dated sequence of adjusted close prices."""

    ticker: str
    dates: tuple[date, ...]
    prices: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "prices", np.asarray(self.prices, dtype=np.float64))
        if len(self.dates) != len(self.prices):
            raise ValueError("dates and prices must be the same length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise ValueError("prices must be positive and finite")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True, eq=False)
class JointSeries:
    """Aligned rows of (price, s_wsj, s_cnbc, s_fortune, s_reuters) per date.

    Noise-added copies produced by :func:`add_noise` deliberately skip
    :meth:`validate`, because injected Gaussian noise may push sentiment
    values outside [-1, 1] and the augmentation must not clamp them.
    """

    dates: tuple[date, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=np.float64))
        if self.rows.ndim != 2 or self.rows.shape[1] != ROW_WIDTH:
            raise ValueError(f"rows must have shape (n, {ROW_WIDTH})")
        if len(self.dates) != len(self.rows):
            raise ValueError("row count must equal date count")

    def validate(self) -> "JointSeries":
        """Check the clean-data invariants (positive prices, scores in [-1, 1])."""
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("rows must be finite")
        if np.any(self.rows[:, 0] <= 0):
            raise ValueError("prices must be positive")
        if np.any(np.abs(self.rows[:, 1:]) > 1.0):
            raise ValueError("sentiment scores must lie in [-1, 1]")
        return self

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def prices(self) -> np.ndarray:
        return self.rows[:, 0]


@dataclass(frozen=True, eq=False)
class Window:
    """One training example: p normalized input rows plus the next-day target.

    ``norm_meta`` is the (min, max) of the price channel used for scaling, and
    is what de-normalization of a prediction for this window must use.
    ``target`` is the normalized next-day price; ``target_price`` is raw.
    """

    input: np.ndarray
    target: float
    norm_meta: tuple[float, float]
    target_date: date
    target_price: float

    def __post_init__(self) -> None:
        if self.norm_meta[1] <= self.norm_meta[0]:
            raise ValueError("window meta must satisfy max > min")


@dataclass(frozen=True)
class WindowedDataset:
    """Chronologically split rolling windows with an augmentation tag."""

    train: tuple[Window, ...]
    test: tuple[Window, ...]
    window_size: int
    tag: str

    def train_inputs(self) -> np.ndarray:
        return np.stack([w.input for w in self.train])

    def train_targets(self) -> np.ndarray:
        return np.array([w.target for w in self.train], dtype=np.float64)

    def test_inputs(self) -> np.ndarray:
        return np.stack([w.input for w in self.test])

    def test_targets(self) -> np.ndarray:
        return np.array([w.target for w in self.test], dtype=np.float64)


@dataclass(frozen=True)
class NoiseConfig:
    """Noise weighting factor, seed, and per-source variance estimates."""

    lambda_n: float = 0.1
    seed: int = 0
    variances: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.lambda_n < 0:
            raise ValueError("lambda_n must be non-negative")
        if self.variances is not None:
            if len(self.variances) != N_SOURCES:
                raise ValueError("variances must have one entry per source")
            if any(v < 0 or not math.isfinite(v) for v in self.variances):
                raise ValueError("variances must be finite and non-negative")


def load_prices(
    path: str | Path, calendar: list[date] | None = None
) -> dict[str, PriceSeries]:
    """Read a ``date,ticker,adj_close`` CSV into one PriceSeries per ticker.

    The trading calendar defaults to the union of all dates in the file; any
    ticker not covering every calendar date is dropped with a warning naming
    it. Raises if the CSV is malformed or nothing survives the filter.
    """
    per_ticker: dict[str, dict[date, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"date", "ticker", "adj_close"}
        if not required.issubset(set(reader.fieldnames or [])):
            raise ValueError(f"{path}: header must contain {sorted(required)}")
        for lineno, record in enumerate(reader, start=2):
            try:
                day = date.fromisoformat(record["date"])
                ticker = record["ticker"].strip()
                price = float(record["adj_close"])
            except (ValueError, AttributeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not ticker:
                raise ValueError(f"{path}:{lineno}: empty ticker")
            slot = per_ticker.setdefault(ticker, {})
            if day in slot:
                raise ValueError(f"{path}:{lineno}: duplicate ({day}, {ticker})")
            slot[day] = price
    if not per_ticker:
        raise ValueError(f"{path}: no price rows")
    if calendar is None:
        all_dates: set[date] = set()
        for slot in per_ticker.values():
            all_dates.update(slot)
        calendar = sorted(all_dates)
    out: dict[str, PriceSeries] = {}
    for ticker in sorted(per_ticker):
        slot = per_ticker[ticker]
        missing = [d for d in calendar if d not in slot]
        if missing:
            log.warning(
                "dropping %s: missing %d of %d trading dates (first: %s)",
                ticker, len(missing), len(calendar), missing[0],
            )
            continue
        out[ticker] = PriceSeries(
            ticker, tuple(calendar), np.array([slot[d] for d in calendar])
        )
    if not out:
        raise ValueError("no ticker covers the full trading calendar")
    return out


def build_joint_series(
    series: PriceSeries,
    scores: list[DailySourceScores] | None,
    *,
    neutral_fill: float = 0.0,
) -> JointSeries:
    """Align a price series with daily source scores into one joint series.

    Dates come from the price series; dates missing from ``scores`` (or all
    dates, when ``scores`` is None) get the neutral fill in every channel.
    """
    by_date = {s.date: s.scores for s in scores} if scores else {}
    rows = np.empty((len(series), ROW_WIDTH), dtype=np.float64)
    rows[:, 0] = series.prices
    fill = (neutral_fill,) * N_SOURCES
    for i, day in enumerate(series.dates):
        rows[i, 1:] = by_date.get(day, fill)
    return JointSeries(series.dates, rows).validate()


def zero_sentiment(joint: JointSeries) -> JointSeries:
    """Copy of the series with all sentiment channels zeroed (price-only runs)."""
    rows = joint.rows.copy()
    rows[:, 1:] = 0.0
    return JointSeries(joint.dates, rows)


def save_joint_csv(joint: JointSeries, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(JOINT_HEADER)
        for day, row in zip(joint.dates, joint.rows):
            writer.writerow([day.isoformat(), *[repr(float(v)) for v in row]])


def load_joint_csv(path: str | Path) -> JointSeries:
    dates: list[date] = []
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if list(reader.fieldnames or []) != list(JOINT_HEADER):
            raise ValueError(f"{path}: expected header {','.join(JOINT_HEADER)}")
        for lineno, record in enumerate(reader, start=2):
            try:
                dates.append(date.fromisoformat(record["date"]))
                rows.append([float(record[c]) for c in JOINT_HEADER[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return JointSeries(tuple(dates), np.array(rows)).validate()


def normalize_window(
    values, input_span: int | None = None
) -> tuple[np.ndarray, tuple[float, float]]:
    """Min-max scale a window's price values, returning (scaled, (min, max)).

    ``input_span`` restricts the min/max to the first that many values (the
    window's input rows) while still scaling everything passed, so a target
    appended after the span may land slightly outside [0, 1]. By default the
    span is the whole array.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("need a 1-D window of at least 2 values")
    span = len(arr) if input_span is None else int(input_span)
    if not 2 <= span <= len(arr):
        raise ValueError("input_span must cover at least 2 values")
    lo = float(np.min(arr[:span]))
    hi = float(np.max(arr[:span]))
    if hi <= lo:
        raise DegenerateWindowError(f"window is constant at {lo}; min-max scale undefined")
    return (arr - lo) / (hi - lo), (lo, hi)


def denormalize(value, meta: tuple[float, float]):
    """Invert min-max scaling: value * (max - min) + min."""
    lo, hi = float(meta[0]), float(meta[1])
    if hi <= lo:
        raise ValueError("meta must satisfy max > min")
    return value * (hi - lo) + lo


def _windows_over(dates: tuple[date, ...], rows: np.ndarray, p: int) -> list[Window]:
    """All stride-1 windows over a span: exactly len(rows) - p of them."""
    out: list[Window] = []
    for j in range(len(rows) - p):
        chunk = rows[j : j + p + 1]
        scaled, meta = normalize_window(chunk[:, 0], input_span=p)
        block = chunk[:p].copy()
        block[:, 0] = scaled[:p]
        out.append(
            Window(
                input=block,
                target=float(scaled[p]),
                norm_meta=meta,
                target_date=dates[j + p],
                target_price=float(chunk[p, 0]),
            )
        )
    return out


def build_windows(joint: JointSeries, p: int, split: float) -> WindowedDataset:
    """Rolling windows with a chronological train/test split.

    The date series is cut at floor(split * n); each span is windowed
    separately, so no test window overlaps training dates. The price channel
    is min-max scaled per window over its p input prices; sentiment channels
    pass through unscaled.
    """
    n = len(joint)
    if p < 1:
        raise ValueError("window size must be at least 1")
    if n < p + 2:
        raise ValueError(f"series of length {n} is too short for windows of size {p}")
    if not 0.0 < split < 1.0:
        raise ValueError("split fraction must lie in (0, 1)")
    n_train = math.floor(split * n)
    train = _windows_over(joint.dates[:n_train], joint.rows[:n_train], p) if n_train > p else []
    test_dates = joint.dates[n_train:]
    test_rows = joint.rows[n_train:]
    test = _windows_over(test_dates, test_rows, p) if len(test_rows) > p else []
    return WindowedDataset(tuple(train), tuple(test), p, "clean")


def estimate_source_variance(joint: JointSeries, source: int, n_train: int) -> float:
    """Population variance of one source's scores over the first n_train dates."""
    if not 0 <= source < N_SOURCES:
        raise ValueError("source index must be 0..3")
    if n_train < 2:
        raise ValueError("training span must hold at least 2 dates")
    if n_train > len(joint):
        raise ValueError("training span exceeds series length")
    values = joint.rows[:n_train, 1 + source]
    if np.all(values == values[0]):
        # Exactly zero so the noise mechanism degenerates bitwise, not almost.
        return 0.0
    return float(np.var(values))


def add_noise(joint: JointSeries, source: int, config: NoiseConfig) -> JointSeries:
    """Copy of the series with Gaussian noise added to one sentiment channel.

    The noise is N(0, lambda_n * var(S_source)), drawn i.i.d. per date from a
    generator seeded by (config.seed, source), so the draw is reproducible and
    independent across sources. The result is intentionally not clamped to
    [-1, 1]. With lambda_n = 0 the rows are bitwise identical to the input.
    """
    if not 0 <= source < N_SOURCES:
        raise ValueError("source index must be 0..3")
    if config.variances is None:
        raise ValueError("config.variances must be estimated before adding noise")
    rows = joint.rows.copy()
    std = math.sqrt(config.lambda_n * config.variances[source])
    if std > 0.0:
        rng = np.random.default_rng([config.seed, source])
        rows[:, 1 + source] += rng.normal(0.0, std, size=len(rows))
    return JointSeries(joint.dates, rows)


def build_augmented_trainset(
    joint: JointSeries, p: int, split: float, config: NoiseConfig
) -> WindowedDataset:
    """Training set made of four noise-added copies, one per perturbed source.

    Copy i carries noise only in sentiment channel i over the training span;
    each copy is windowed like the clean data and the four window lists are
    concatenated in source order (copy boundaries fall at multiples of the
    clean train count). The test set is built once from clean data.
    """
    clean = build_windows(joint, p, split)
    n_train = math.floor(split * len(joint))
    if config.variances is None:
        config = replace(
            config,
            variances=tuple(
                estimate_source_variance(joint, i, n_train) for i in range(N_SOURCES)
            ),
        )
    span = JointSeries(joint.dates[:n_train], joint.rows[:n_train].copy())
    train: list[Window] = []
    for source in range(N_SOURCES):
        noised = add_noise(span, source, config)
        train.extend(_windows_over(noised.dates, noised.rows, p))
    return WindowedDataset(tuple(train), clean.test, p, "dp-augmented")
