#!/usr/bin/env python3
# From a synthetic market to training windows: joint (price, scores) rows,
# per-window min-max scaling with an exact inverse, and the chronological
# train/test split.

import numpy as np

from newsflow.dataprep import build_windows, denormalize, normalize_window
from newsflow.synthetic import FixtureSpec, generate_fixture

# 1. A deterministic market: 121 trading days, one latent sentiment signal
#    observed by four sources, prices drifting with yesterday's sentiment.

fixture = generate_fixture(FixtureSpec(days=121, tickers=("DEMO",), seed=42))
joint = fixture.joint("DEMO")
print(f"{len(joint)} dates from {joint.dates[0]} to {joint.dates[-1]}")
print(f"first row: price {joint.rows[0, 0]:.2f}, scores {np.round(joint.rows[0, 1:], 3)}\n")

# 2. Min-max scaling of one window, and the inverse that predictions go
#    through before any metric is computed.

window_prices = joint.rows[:11, 0]
scaled, meta = normalize_window(window_prices, input_span=10)
print(f"window meta (min, max): ({meta[0]:.3f}, {meta[1]:.3f})")
print(f"scaled inputs : {np.round(scaled[:10], 3)}")
print(f"scaled target : {scaled[10]:.4f} (may leave [0, 1]; the meta is input-only)")
round_trip = denormalize(scaled, meta)
print(f"round-trip error: {np.max(np.abs(round_trip - window_prices)):.2e}\n")

# 3. Stride-1 windows with the date axis cut at 85%: the same 92/9 train/test
#    arithmetic as a 121-day span always gives at window size 10.

dataset = build_windows(joint, 10, 0.85)
print(f"train windows: {len(dataset.train)}")
print(f"test windows : {len(dataset.test)}")
print(f"last train target date: {max(w.target_date for w in dataset.train)}")
print(f"first test target date: {min(w.target_date for w in dataset.test)}")

w = dataset.train[0]
print(f"\nwindow shape {w.input.shape}, target {w.target:.4f}, "
      f"raw target price {w.target_price:.2f} on {w.target_date}")
print("price channel stays in [0, 1]:",
      bool(np.all((w.input[:, 0] >= 0) & (w.input[:, 0] <= 1))))
print("sentiment channels pass through unscaled:",
      bool(np.array_equal(w.input[:, 1:], joint.rows[:10, 1:])))
