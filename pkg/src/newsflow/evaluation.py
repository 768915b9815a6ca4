"""Backtest metrics and report emission.

Per-day mean prediction accuracy (one minus the average relative absolute
error across stocks), price-unit MSE, accuracy as the complement of the mean
error percent, cross-method comparison tables, and plot-ready CSV/SVG output.
All computation happens on de-normalized prices.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .sentiment import DailySourceScores

__all__ = [
    "METHOD_LABELS",
    "TrackPoint",
    "PredictionTrack",
    "EvalReport",
    "Comparison",
    "mpa",
    "mean_mpa",
    "report_from_track",
    "index_metrics",
    "compare",
    "write_report_json",
    "load_report_json",
    "write_track_csv",
    "load_track_csv",
    "emit_plot_data",
    "render_line_chart",
]

log = logging.getLogger(__name__)

METHOD_LABELS = ("arma", "lstm-no-news", "lstm-news", "dp-lstm")

# Metrics where a larger value wins; the rest win by being smaller.
_HIGHER_BETTER = {"mean_mpa": True, "mse": False, "accuracy": True, "mean_error_percent": False}
_METRIC_ORDER = ("mean_mpa", "mse", "accuracy", "mean_error_percent")


@dataclass(frozen=True)
class TrackPoint:
    """Real and predicted price for one (ticker, date) pair."""

    ticker: str
    date: date
    real: float
    predicted: float


@dataclass(frozen=True)
class PredictionTrack:
    """De-normalized predictions of one method over the test span."""

    method: str
    points: tuple[TrackPoint, ...]

    def __post_init__(self) -> None:
        if self.method not in METHOD_LABELS:
            raise ValueError(f"method must be one of {METHOD_LABELS}")
        seen = set()
        for pt in self.points:
            if not (math.isfinite(pt.real) and pt.real > 0):
                raise ValueError(f"real price must be positive and finite, got {pt.real}")
            if not math.isfinite(pt.predicted):
                raise ValueError("predicted price must be finite")
            key = (pt.ticker, pt.date)
            if key in seen:
                raise ValueError(f"duplicate (ticker, date) pair {key}")
            seen.add(key)
        object.__setattr__(
            self, "points", tuple(sorted(self.points, key=lambda p: (p.ticker, p.date)))
        )

    def dates(self) -> list[date]:
        return sorted({pt.date for pt in self.points})

    def tickers(self) -> list[str]:
        return sorted({pt.ticker for pt in self.points})

    def on_date(self, day: date) -> list[TrackPoint]:
        return [pt for pt in self.points if pt.date == day]


@dataclass(frozen=True)
class EvalReport:
    """Summary metrics for one method over its evaluable days."""

    method: str
    per_day_mpa: tuple[float, ...]
    mean_mpa: float
    mse: float
    accuracy: float
    mean_error_percent: float

    def __post_init__(self) -> None:
        if any(v > 1.0 for v in self.per_day_mpa):
            raise ValueError("per-day MPA cannot exceed 1")
        if abs(self.accuracy + self.mean_error_percent - 1.0) > 1e-12:
            raise ValueError("accuracy must complement the mean error percent")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "mean_mpa": self.mean_mpa,
            "per_day_mpa": list(self.per_day_mpa),
            "mse": self.mse,
            "accuracy": self.accuracy,
            "mean_error_percent": self.mean_error_percent,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            method=str(data["method"]),
            per_day_mpa=tuple(float(v) for v in data["per_day_mpa"]),
            mean_mpa=float(data["mean_mpa"]),
            mse=float(data["mse"]),
            accuracy=float(data["accuracy"]),
            mean_error_percent=float(data["mean_error_percent"]),
        )


def mpa(track: PredictionTrack, day: date) -> float:
    """1 - (1/L) * sum over stocks of |real - predicted| / real on one day."""
    points = track.on_date(day)
    if not points:
        raise ValueError(f"no predictions on {day}")
    rel = [abs(pt.real - pt.predicted) / pt.real for pt in points]
    return 1.0 - math.fsum(rel) / len(rel)


def mean_mpa(track: PredictionTrack) -> float:
    """Arithmetic mean of the per-day MPA over the track's dates."""
    days = track.dates()
    if not days:
        raise ValueError("track is empty")
    values = [mpa(track, d) for d in days]
    return math.fsum(values) / len(values)


def report_from_track(track: PredictionTrack) -> EvalReport:
    """Full metric set: per-day MPA plus MSE / accuracy over all points."""
    days = track.dates()
    if not days:
        raise ValueError("track is empty")
    per_day = tuple(mpa(track, d) for d in days)
    sq = [(pt.real - pt.predicted) ** 2 for pt in track.points]
    rel = [abs(pt.real - pt.predicted) / pt.real for pt in track.points]
    mep = math.fsum(rel) / len(rel)
    return EvalReport(
        method=track.method,
        per_day_mpa=per_day,
        mean_mpa=math.fsum(per_day) / len(per_day),
        mse=math.fsum(sq) / len(sq),
        accuracy=1.0 - mep,
        mean_error_percent=mep,
    )


def index_metrics(track: PredictionTrack) -> EvalReport:
    """Metrics for a single-series track (e.g. a market index)."""
    tickers = track.tickers()
    if len(tickers) != 1:
        raise ValueError(f"expected a single-series track, got tickers {tickers}")
    return report_from_track(track)


@dataclass(frozen=True)
class Comparison:
    """Aligned metric table across methods with the best value flagged."""

    labels: tuple[str, ...]
    rows: dict
    best: dict

    def text(self) -> str:
        headers = ["method", *_METRIC_ORDER]
        lines = []
        table = [headers]
        for label in self.labels:
            row = [label]
            for metric in _METRIC_ORDER:
                mark = "*" if label in self.best[metric] else ""
                row.append(f"{self.rows[label][metric]:.9f}{mark}")
            table.append(row)
        widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
        for r in table:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip())
        note = "* best per metric"
        ties = [m for m in _METRIC_ORDER if len(self.best[m]) > 1]
        if ties:
            note += f"; tie on {', '.join(ties)}"
        lines.append(note)
        return "\n".join(lines) + "\n"

    def csv_text(self) -> str:
        lines = ["method," + ",".join(_METRIC_ORDER) + ",best_on"]
        for label in self.labels:
            won = "+".join(m for m in _METRIC_ORDER if label in self.best[m])
            cells = [repr(self.rows[label][m]) for m in _METRIC_ORDER]
            lines.append(",".join([label, *cells, won]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.csv_text(), encoding="utf-8")


def compare(reports: list[EvalReport]) -> Comparison:
    """Build the cross-method table; ties flag every winner. Pure."""
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    labels = tuple(r.method for r in reports)
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate method labels in {labels}")
    rows = {
        r.method: {
            "mean_mpa": r.mean_mpa,
            "mse": r.mse,
            "accuracy": r.accuracy,
            "mean_error_percent": r.mean_error_percent,
        }
        for r in reports
    }
    best: dict = {}
    for metric, higher in _HIGHER_BETTER.items():
        values = [rows[label][metric] for label in labels]
        target = max(values) if higher else min(values)
        best[metric] = tuple(label for label in labels if rows[label][metric] == target)
    return Comparison(labels, rows, best)


def write_report_json(report: EvalReport, path: str | Path, *, extra: dict | None = None) -> None:
    """Serialize a report (plus reproducibility extras such as seed/config)."""
    blob = report.to_dict()
    if extra:
        overlap = set(blob) & set(extra)
        if overlap:
            raise ValueError(f"extra keys shadow report fields: {sorted(overlap)}")
        blob.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report_json(path: str | Path) -> EvalReport:
    with open(path, encoding="utf-8") as fh:
        return EvalReport.from_dict(json.load(fh))


def write_track_csv(track: PredictionTrack, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "ticker", "date", "real", "predicted"])
        for pt in track.points:
            writer.writerow(
                [
                    track.method,
                    pt.ticker,
                    pt.date.isoformat(),
                    repr(float(pt.real)),
                    repr(float(pt.predicted)),
                ]
            )


def load_track_csv(path: str | Path) -> PredictionTrack:
    points = []
    method = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for lineno, record in enumerate(reader, start=2):
            try:
                method = record["method"]
                points.append(
                    TrackPoint(
                        record["ticker"],
                        date.fromisoformat(record["date"]),
                        float(record["real"]),
                        float(record["predicted"]),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if method is None:
        raise ValueError(f"{path}: empty track file")
    return PredictionTrack(method, tuple(points))


# ---------------------------------------------------------------------------
# Plot data: CSV plus dependency-free SVG line charts.
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def render_line_chart(
    series: list[tuple[str, list[date], list[float]]],
    *,
    title: str = "",
    width: int = 720,
    height: int = 400,
) -> str:
    """Minimal self-contained SVG: polylines, a frame, end labels, a legend.

    A dashed zero gridline is drawn whenever zero falls inside the y-range;
    a series that is constant at zero lies exactly on it.
    """
    left, right, top, bottom = 60.0, 20.0, 36.0, 40.0
    plot_w = width - left - right
    plot_h = height - top - bottom
    xs_all = [d.toordinal() for _, ds, _ in series for d in ds]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all, ys_all = [0, 1], [0.0, 1.0]
    x_min, x_max = min(xs_all), max(xs_all)
    y_min, y_max = min(ys_all), max(ys_all)
    if x_max == x_min:
        x_max = x_min + 1
    if y_max == y_min:
        y_min, y_max = y_min - 1.0, y_max + 1.0

    def px(x: float) -> float:
        return left + (x - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return top + (y_max - y) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left:.2f}" y="{top:.2f}" width="{plot_w:.2f}" height="{plot_h:.2f}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.2f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )
    if y_min <= 0.0 <= y_max:
        zero_y = py(0.0)
        parts.append(
            f'<line class="zero-gridline" x1="{left:.2f}" y1="{zero_y:.2f}" '
            f'x2="{left + plot_w:.2f}" y2="{zero_y:.2f}" stroke="#999999" '
            'stroke-width="1" stroke-dasharray="4 3"/>'
        )
    for axis_y, value in ((py(y_max), y_max), (py(y_min), y_min)):
        parts.append(
            f'<text x="{left - 6:.2f}" y="{axis_y + 4:.2f}" text-anchor="end">{value:.4g}</text>'
        )
    labels = sorted({d for _, ds, _ in series for d in ds})
    if labels:
        parts.append(
            f'<text x="{left:.2f}" y="{height - 12:.2f}">{labels[0].isoformat()}</text>'
        )
        parts.append(
            f'<text x="{left + plot_w:.2f}" y="{height - 12:.2f}" text-anchor="end">'
            f"{labels[-1].isoformat()}</text>"
        )
    for k, (label, ds, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(d.toordinal()):.2f},{py(y):.2f}" for d, y in zip(ds, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = top + 14 + 16 * k
        parts.append(
            f'<line x1="{left + 8:.2f}" y1="{ly - 4:.2f}" x2="{left + 28:.2f}" '
            f'y2="{ly - 4:.2f}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{left + 34:.2f}" y="{ly:.2f}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _prediction_rows(tracks: list[PredictionTrack], ticker: str | None):
    """Per-date rows (date, real, one column per method) for one ticker.

    A method with no prediction on a date gets an empty cell (its own metrics
    already excluded that day); the gap is logged rather than zero-filled.
    """
    per_method: dict[str, dict[date, TrackPoint]] = {}
    for track in tracks:
        per_method[track.method] = {
            pt.date: pt for pt in track.points if ticker is None or pt.ticker == ticker
        }
    days = sorted({d for m in per_method.values() for d in m})
    rows = []
    for day in days:
        real = None
        cells = []
        for track in tracks:
            pt = per_method[track.method].get(day)
            cells.append(pt.predicted if pt else None)
            if pt is None:
                log.warning("%s has no prediction for %s on %s", track.method, ticker, day)
            else:
                real = pt.real
        rows.append((day, real, cells))
    return rows


def emit_plot_data(
    tracks: list[PredictionTrack],
    daily_scores: list[DailySourceScores] | None,
    out_dir: str | Path,
) -> list[Path]:
    """Write prediction and sentiment plot files (CSV + SVG) into out_dir.

    Predictions become one CSV/SVG per ticker, named ``predictions.csv`` when
    there is at most one ticker and ``predictions_<ticker>.csv`` otherwise,
    with a column per method. Daily scores (if given) become a mean-compound
    CSV/SVG. Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    methods = [t.method for t in tracks]
    if len(set(methods)) != len(methods):
        raise ValueError("duplicate method labels in tracks")
    tickers = sorted({pt.ticker for t in tracks for pt in t.points})
    targets = tickers if tickers else [None]
    for ticker in targets:
        suffix = f"_{ticker}" if len(tickers) > 1 else ""
        csv_path = out / f"predictions{suffix}.csv"
        rows = _prediction_rows(tracks, ticker)
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", "real", *methods])
            for day, real, cells in rows:
                writer.writerow(
                    [
                        day.isoformat(),
                        "" if real is None else repr(float(real)),
                        *["" if c is None else repr(float(c)) for c in cells],
                    ]
                )
        written.append(csv_path)
        if rows:
            real_days = [r[0] for r in rows if r[1] is not None]
            real_vals = [r[1] for r in rows if r[1] is not None]
            series = [("real", real_days, real_vals)]
            for k, method in enumerate(methods):
                ds = [r[0] for r in rows if r[2][k] is not None]
                ys = [r[2][k] for r in rows if r[2][k] is not None]
                series.append((method, ds, ys))
            svg_path = out / f"predictions{suffix}.svg"
            svg_path.write_text(
                render_line_chart(series, title=f"test-span predictions{suffix.replace('_', ' ')}"),
                encoding="utf-8",
            )
            written.append(svg_path)
    if daily_scores is not None:
        sent_csv = out / "sentiment.csv"
        with open(sent_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", "mean_compound"])
            for row in daily_scores:
                writer.writerow([row.date.isoformat(), repr(math.fsum(row.scores) / 4.0)])
        written.append(sent_csv)
        if daily_scores:
            ds = [r.date for r in daily_scores]
            ys = [math.fsum(r.scores) / 4.0 for r in daily_scores]
            sent_svg = out / "sentiment.svg"
            sent_svg.write_text(
                render_line_chart([("mean compound", ds, ys)], title="daily mean compound score"),
                encoding="utf-8",
            )
            written.append(sent_svg)
    return written
