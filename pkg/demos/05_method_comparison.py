#!/usr/bin/env python3
# All four methods on one adversarial market: an ARMA baseline, the LSTM with
# zeroed news, the LSTM with clean news, and the noise-augmented variant.
# One source is corrupted late in the training span, which is exactly the
# situation the augmentation is meant to survive.

import numpy as np

from newsflow.baseline import arma_fit, arma_predict, sentiment_arma_fit, sentiment_arma_predict
from newsflow.dataprep import (
    NoiseConfig,
    build_augmented_trainset,
    build_windows,
    denormalize,
    zero_sentiment,
)
from newsflow.evaluation import PredictionTrack, TrackPoint, compare, report_from_track
from newsflow.neural import NetworkConfig, TrainSettings, predict, train
from newsflow.synthetic import FixtureSpec, generate_fixture

fixture = generate_fixture(
    FixtureSpec(days=121, tickers=("DEMO",), seed=11,
                spike_source=1, spike_count=15, spike_span=15)
)
joint = fixture.joint("DEMO")
print(f"adversarial fixture: spikes on {fixture.meta['spikes']['source_column']} "
      f"at day indices {fixture.meta['spikes']['day_indices']}\n")

p, split, seed = 10, 0.85, 0
config = NetworkConfig(hidden_sizes=(16, 16, 16), dropout_rate=0.2)
settings = TrainSettings(epochs=150, learning_rate=4e-3, seed=seed)


def lstm_track(method, dataset):
    report = train(config, dataset, settings)
    points = []
    for window, raw in zip(dataset.test, predict(config, report.params, dataset.test)):
        price = denormalize(float(raw), window.norm_meta)
        points.append(TrackPoint("DEMO", window.target_date, window.target_price, price))
    return PredictionTrack(method, tuple(points))


# 1. ARMA: fit on the training span, one-step forecasts over the test targets.

x = joint.prices
n_train = int(split * len(x))
params = arma_fit(x[:n_train], p, 0)
arma_points = [
    TrackPoint("DEMO", joint.dates[t], float(x[t]), arma_predict(params, x[t - p : t]))
    for t in range(n_train + p, len(x))
]
tracks = [PredictionTrack("arma", tuple(arma_points))]

# 2. The three LSTM variants share one architecture and differ only in data.

tracks.append(lstm_track("lstm-no-news", build_windows(zero_sentiment(joint), p, split)))
tracks.append(lstm_track("lstm-news", build_windows(joint, p, split)))
tracks.append(
    lstm_track(
        "dp-lstm",
        build_augmented_trainset(joint, p, split, NoiseConfig(lambda_n=2.0, seed=seed)),
    )
)

# 3. Side-by-side metrics; the best value per metric is starred.

print(compare([report_from_track(t) for t in tracks]).text())

# 4. The explicit linear price-plus-sentiment predictor, as a reference point.

mean_scores = joint.rows[:, 1:].mean(axis=1)
combo = sentiment_arma_fit(x[:n_train], mean_scores[:n_train], p=1, q=0)
preds = [
    sentiment_arma_predict(combo, x[t - 1 : t], mean_scores[t - 1 : t])
    for t in range(n_train, len(x))
]
err = np.array(preds) - x[n_train:]
print(f"linear price+sentiment reference, test MSE: {float(np.mean(err ** 2)):.4f}")
