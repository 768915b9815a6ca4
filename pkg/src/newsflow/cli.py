"""Command-line pipeline: score news, generate fixtures, run methods, compare, plot.

Subcommands: ``score``, ``fixture``, ``run``, ``compare``, ``plot``. Option
precedence is CLI flag over config-file value over built-in default, and the
effective configuration (seed included) is echoed into every report so any
run can be reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from . import baseline, dataprep, evaluation, neural, sentiment
from .synthetic import FixtureSpec, derive_seed, generate_fixture, write_fixture

__all__ = ["RunConfig", "DEFAULTS", "main", "entrypoint"]

METHODS = evaluation.METHOD_LABELS

DEFAULTS = {
    "window": 10,
    "split": 0.85,
    "lambda_noise": 0.1,
    "epochs": 200,
    "lr": 1e-3,
    "hidden": 32,
    "dropout": 0.2,
    "arma_q": 0,
    "seed": 0,
    "workers": 1,
    "method": "dp-lstm",
}

_CONFIG_KEYS = set(DEFAULTS) | {"prices", "scores", "out"}


class StageError(RuntimeError):
    """Wraps a pipeline failure with the stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"error[{stage}]: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunConfig:
    """Effective settings for one ``run`` invocation."""

    window: int
    split: float
    lambda_noise: float
    epochs: int
    lr: float
    hidden: int
    dropout: float
    arma_q: int
    seed: int
    workers: int
    methods: tuple[str, ...]
    prices: str
    scores: str | None
    out: str

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must lie in (0, 1)")
        if self.lambda_noise < 0:
            raise ValueError("lambda-noise must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        if not self.methods:
            raise ValueError("no method selected")

    def echo(self) -> dict:
        return {
            "window": self.window,
            "split": self.split,
            "lambda_noise": self.lambda_noise,
            "epochs": self.epochs,
            "lr": self.lr,
            "hidden": self.hidden,
            "dropout": self.dropout,
            "arma_q": self.arma_q,
            "seed": self.seed,
            "workers": self.workers,
            "methods": list(self.methods),
            "prices": self.prices,
            "scores": self.scores,
            "out": self.out,
        }


def _read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; '#' starts a comment; unknown keys are errors."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _default_seed() -> int:
    env = os.environ.get("NEWSFLOW_SEED")
    if env is None:
        return DEFAULTS["seed"]
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"NEWSFLOW_SEED must be an integer, got {env!r}") from None


def _coerce(key: str, value):
    kind = type(DEFAULTS.get(key, ""))
    if key in ("prices", "scores", "out", "method"):
        return str(value)
    return kind(value) if not isinstance(value, kind) else value


def _merge_run_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    merged["seed"] = _default_seed()
    merged["prices"] = None
    merged["scores"] = None
    merged["out"] = None
    if args.config:
        for key, value in _read_config_file(args.config).items():
            merged[key] = _coerce(key, value)
    for key in (
        "window", "split", "lambda_noise", "epochs", "lr", "hidden",
        "seed", "workers", "method", "prices", "scores", "out",
    ):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["prices"] is None:
        raise ValueError("a prices CSV is required (--prices or config file)")
    if merged["out"] is None:
        raise ValueError("an output directory is required (--out or config file)")
    methods = tuple(m.strip() for m in str(merged["method"]).split(",") if m.strip())
    return RunConfig(
        window=int(merged["window"]),
        split=float(merged["split"]),
        lambda_noise=float(merged["lambda_noise"]),
        epochs=int(merged["epochs"]),
        lr=float(merged["lr"]),
        hidden=int(merged["hidden"]),
        dropout=float(merged["dropout"]),
        arma_q=int(merged["arma_q"]),
        seed=int(merged["seed"]),
        workers=int(merged["workers"]),
        methods=methods,
        prices=str(merged["prices"]),
        scores=None if merged["scores"] in (None, "") else str(merged["scores"]),
        out=str(merged["out"]),
    )


def _read_calendar(path: str) -> list[date]:
    days = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.lower() == "date":
            continue
        try:
            days.append(date.fromisoformat(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad date {line!r}") from None
    if not days:
        raise ValueError(f"{path}: no dates")
    return sorted(set(days))


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


def cmd_score(args: argparse.Namespace) -> int:
    stage = "load-lexicon"
    try:
        lexicon = sentiment.load_lexicon(args.lexicon)
        stage = "load-news"
        items, skipped = sentiment.load_news(args.news)
        stage = "load-calendar"
        calendar = _read_calendar(args.calendar)
        stage = "score"
        daily = sentiment.aggregate_daily(items, lexicon, calendar)
        stage = "write-output"
        sentiment.write_daily_scores_csv(daily, args.out)
        if args.freq_out:
            freq_dir = Path(args.freq_out)
            freq_dir.mkdir(parents=True, exist_ok=True)
            for polarity in ("positive", "negative"):
                rows = sentiment.word_frequency(items, lexicon, polarity)
                sentiment.write_word_frequency_csv(
                    rows, freq_dir / f"wordfreq_{polarity}.csv"
                )
    except Exception as exc:
        raise StageError(stage, exc) from exc
    counts = {src.label: 0 for src in sentiment.Source}
    for item in items:
        counts[item.source.label] += 1
    print(f"scored {len(items)} articles over {len(calendar)} trading dates")
    for label, n in counts.items():
        print(f"  {label}: {n}")
    for site, n in sorted(skipped.items()):
        print(f"  skipped {n} articles from unknown site {site!r}")
    if not items:
        print("warning: empty corpus; wrote all-neutral scores", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# fixture
# ---------------------------------------------------------------------------


_SPIKE_SOURCES = {name: idx for idx, name in enumerate(("wsj", "cnbc", "fortune", "reuters"))}


def cmd_fixture(args: argparse.Namespace) -> int:
    stage = "generate"
    try:
        spec = FixtureSpec(
            days=args.days,
            tickers=tuple(t.strip() for t in args.tickers.split(",") if t.strip()),
            seed=args.seed if args.seed is not None else _default_seed(),
            spike_source=_SPIKE_SOURCES[args.spike_source] if args.spike_source else None,
            spike_count=args.spike_count,
            spike_magnitude=args.spike_magnitude,
        )
        fixture = generate_fixture(spec)
        stage = "write-output"
        paths = write_fixture(fixture, args.out)
    except Exception as exc:
        raise StageError(stage, exc) from exc
    print(
        f"fixture: {spec.days} dates x {len(spec.tickers)} tickers "
        f"(seed {spec.seed}, adversarial={fixture.meta['adversarial']})"
    )
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _network_config(cfg: RunConfig) -> neural.NetworkConfig:
    return neural.NetworkConfig(
        hidden_sizes=(cfg.hidden,) * 3,
        dropout_rate=cfg.dropout,
    )


def _arma_points(ticker: str, joint: dataprep.JointSeries, cfg: RunConfig):
    """One-step test-span forecasts aligned with the LSTM target dates."""
    x = joint.prices
    n = len(x)
    n_train = math.floor(cfg.split * n)
    params = baseline.arma_fit(x[:n_train], cfg.window, cfg.arma_q)
    eps = baseline.residual_trajectory(params, x)
    points = []
    for t in range(n_train + cfg.window, n):
        history = x[t - cfg.window : t]
        residuals = baseline.ResidualState(eps[t - cfg.arma_q : t]) if cfg.arma_q else None
        pred = baseline.arma_predict(params, history, residuals)
        points.append(
            evaluation.TrackPoint(ticker, joint.dates[t], float(x[t]), float(pred))
        )
    return points, params


def _lstm_points(ticker: str, dataset: dataprep.WindowedDataset, cfg: RunConfig, method: str):
    config = _network_config(cfg)
    settings = neural.TrainSettings(
        epochs=cfg.epochs,
        learning_rate=cfg.lr,
        seed=derive_seed(cfg.seed, f"{method}:{ticker}"),
    )
    report = neural.train(config, dataset, settings)
    preds = neural.predict(config, report.params, dataset.test)
    points = []
    for window, pred in zip(dataset.test, preds):
        price = dataprep.denormalize(float(pred), window.norm_meta)
        points.append(
            evaluation.TrackPoint(ticker, window.target_date, window.target_price, price)
        )
    return points, config, report


def _run_ticker(ticker, series, daily, cfg: RunConfig, out: Path):
    """All selected methods for one ticker. Returns per-method track points."""
    joint = dataprep.build_joint_series(series, daily)
    dataprep.save_joint_csv(joint, out / f"joint_{ticker}.csv")
    result: dict = {}
    for method in cfg.methods:
        if method == "arma":
            points, params = _arma_points(ticker, joint, cfg)
            result[method] = (points, ("arma_params", params))
            continue
        if method == "lstm-no-news":
            dataset = dataprep.build_windows(dataprep.zero_sentiment(joint), cfg.window, cfg.split)
        elif method == "lstm-news":
            dataset = dataprep.build_windows(joint, cfg.window, cfg.split)
        else:  # dp-lstm
            noise = dataprep.NoiseConfig(
                lambda_n=cfg.lambda_noise, seed=derive_seed(cfg.seed, f"noise:{ticker}")
            )
            dataset = dataprep.build_augmented_trainset(joint, cfg.window, cfg.split, noise)
        points, config, report = _lstm_points(ticker, dataset, cfg, method)
        result[method] = (points, ("checkpoint", (config, report)))
    return result


def cmd_run(args: argparse.Namespace) -> int:
    stage = "configure"
    try:
        cfg = _merge_run_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stage = "load-prices"
        series_by_ticker = dataprep.load_prices(cfg.prices)
        stage = "load-scores"
        daily = sentiment.read_daily_scores_csv(cfg.scores) if cfg.scores else None
        needs_scores = [m for m in cfg.methods if m in ("lstm-news", "dp-lstm")]
        if needs_scores and daily is None:
            raise ValueError(f"methods {needs_scores} need --scores")
        stage = "train-predict"
        tickers = sorted(series_by_ticker)
        if cfg.workers > 1 and len(tickers) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                futures = {
                    t: pool.submit(_run_ticker, t, series_by_ticker[t], daily, cfg, out)
                    for t in tickers
                }
                per_ticker = {t: futures[t].result() for t in tickers}
        else:
            per_ticker = {
                t: _run_ticker(t, series_by_ticker[t], daily, cfg, out) for t in tickers
            }
        stage = "evaluate"
        tracks = []
        reports = []
        echo = {"seed": cfg.seed, "config": cfg.echo()}
        for method in cfg.methods:
            points = []
            for ticker in tickers:
                method_points, artifact = per_ticker[ticker][method]
                points.extend(method_points)
                kind, payload = artifact
                if kind == "checkpoint":
                    config, train_report = payload
                    neural.save_checkpoint(
                        out / f"checkpoint_{method}_{ticker}.json",
                        config,
                        train_report.params,
                        seed=train_report.seed,
                    )
                else:
                    params = payload
                    (out / f"arma_params_{ticker}.json").write_text(
                        _arma_params_json(params), encoding="utf-8"
                    )
            track = evaluation.PredictionTrack(method, tuple(points))
            tracks.append(track)
            evaluation.write_track_csv(track, out / f"track_{method}.csv")
            report = evaluation.report_from_track(track)
            reports.append(report)
            evaluation.write_report_json(report, out / f"report_{method}.json", extra=echo)
        stage = "emit-plots"
        evaluation.emit_plot_data(tracks, daily, out)
        if len(reports) > 1:
            comparison = evaluation.compare(reports)
            (out / "comparison.txt").write_text(comparison.text(), encoding="utf-8")
            comparison.write_csv(out / "comparison.csv")
            print(comparison.text(), end="")
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc
    for report in reports:
        print(
            f"{report.method}: mean_mpa={report.mean_mpa:.6f} mse={report.mse:.6f} "
            f"accuracy={report.accuracy:.6f} (seed {cfg.seed})"
        )
    return 0


def _arma_params_json(params) -> str:
    blob = {
        "mu": params.mu,
        "phi": params.phi.tolist(),
        "psi": params.psi.tolist(),
        "alpha": 1.0,
        "lambda_s": 0.0,
        "c": 0.0,
    }
    return json.dumps(blob, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# compare / plot
# ---------------------------------------------------------------------------


def cmd_compare(args: argparse.Namespace) -> int:
    stage = "load-reports"
    try:
        reports = [evaluation.load_report_json(p) for p in args.reports]
        stage = "compare"
        comparison = evaluation.compare(reports)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "comparison.txt").write_text(comparison.text(), encoding="utf-8")
            comparison.write_csv(out / "comparison.csv")
    except Exception as exc:
        raise StageError(stage, exc) from exc
    print(comparison.text(), end="")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    stage = "load-tracks"
    try:
        tracks = [evaluation.load_track_csv(p.strip()) for p in args.tracks.split(",") if p.strip()]
        stage = "load-scores"
        daily = sentiment.read_daily_scores_csv(args.scores) if args.scores else None
        stage = "emit-plots"
        written = evaluation.emit_plot_data(tracks, daily, args.out)
    except Exception as exc:
        raise StageError(stage, exc) from exc
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsflow",
        description="News-sentiment-aware stock forecasting pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score a news corpus into daily per-source compounds")
    p_score.add_argument("--news", required=True, help="newline-delimited JSON corpus")
    p_score.add_argument("--lexicon", required=True, help="tab-separated token/valence lexicon")
    p_score.add_argument("--calendar", required=True, help="trading dates, one ISO date per line")
    p_score.add_argument("--out", required=True, help="output CSV of daily source scores")
    p_score.add_argument("--freq-out", help="also write word-frequency CSVs into this directory")
    p_score.set_defaults(func=cmd_score)

    p_fix = sub.add_parser("fixture", help="generate a synthetic corpus with recorded ground truth")
    p_fix.add_argument("--out", required=True, help="output directory")
    p_fix.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (default: NEWSFLOW_SEED or {DEFAULTS['seed']})")
    p_fix.add_argument("--days", type=int, default=121, help="trading dates (default: 121)")
    p_fix.add_argument("--tickers", default="AAA,BBB,CCC",
                       help="comma-separated tickers (default: AAA,BBB,CCC)")
    p_fix.add_argument("--spike-source", choices=sorted(_SPIKE_SOURCES),
                       help="corrupt this source with adversarial spikes")
    p_fix.add_argument("--spike-count", type=int, default=0,
                       help="number of spike days (default: 0 = clean)")
    p_fix.add_argument("--spike-magnitude", type=float, default=1.0,
                       help="spike magnitude, clipped to 1.0 (default: 1.0)")
    p_fix.set_defaults(func=cmd_fixture)

    p_run = sub.add_parser("run", help="train, predict, and evaluate the selected methods")
    p_run.add_argument("--prices", help="price CSV: date,ticker,adj_close")
    p_run.add_argument("--scores", help="daily source-score CSV from 'score'")
    p_run.add_argument("--method", help="comma-separated subset of "
                       f"{', '.join(METHODS)} (default: {DEFAULTS['method']})")
    p_run.add_argument("--window", type=int, help=f"rolling window size (default: {DEFAULTS['window']})")
    p_run.add_argument("--split", type=float, help=f"train fraction (default: {DEFAULTS['split']})")
    p_run.add_argument("--lambda-noise", dest="lambda_noise", type=float,
                       help=f"noise weighting factor (default: {DEFAULTS['lambda_noise']})")
    p_run.add_argument("--epochs", type=int, help=f"training epochs (default: {DEFAULTS['epochs']})")
    p_run.add_argument("--lr", type=float, help=f"learning rate (default: {DEFAULTS['lr']})")
    p_run.add_argument("--hidden", type=int, help=f"LSTM units per layer (default: {DEFAULTS['hidden']})")
    p_run.add_argument("--seed", type=int,
                       help=f"RNG seed (default: NEWSFLOW_SEED or {DEFAULTS['seed']})")
    p_run.add_argument("--out", help="output directory for reports and artifacts")
    p_run.add_argument("--workers", type=int,
                       help=f"per-ticker worker threads (default: {DEFAULTS['workers']})")
    p_run.add_argument("--config", help="flat key=value config file (flags override it)")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="compare previously written report JSON files")
    p_cmp.add_argument("reports", nargs="+", help="two or more report_<method>.json paths")
    p_cmp.add_argument("--out", help="directory for comparison.txt/csv")
    p_cmp.set_defaults(func=cmd_compare)

    p_plot = sub.add_parser("plot", help="emit plot CSV/SVG from track files")
    p_plot.add_argument("--tracks", required=True, help="comma-separated track_<method>.csv paths")
    p_plot.add_argument("--scores", help="daily source-score CSV for the sentiment chart")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:  # config/argument problems before any stage
        print(f"error[configure]: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
