import json
import math

import numpy as np
import pytest

from newsflow.dataprep import build_windows
from newsflow.synthetic import FixtureSpec, derive_seed, generate_fixture, write_fixture


class TestGenerateFixture:
    def test_default_shape_matches_target_span(self):
        fixture = generate_fixture(FixtureSpec(seed=1))
        assert len(fixture.calendar) == 121
        assert set(fixture.prices) == {"AAA", "BBB", "CCC"}
        assert len(fixture.scores) == 121

    def test_weekday_calendar(self):
        fixture = generate_fixture(FixtureSpec(days=30, seed=0))
        assert all(d.weekday() < 5 for d in fixture.calendar)

    def test_deterministic_for_fixed_seed(self):
        a = generate_fixture(FixtureSpec(seed=5))
        b = generate_fixture(FixtureSpec(seed=5))
        for ticker in a.prices:
            assert np.array_equal(a.prices[ticker].prices, b.prices[ticker].prices)
        assert a.scores == b.scores

    def test_different_seeds_differ(self):
        a = generate_fixture(FixtureSpec(seed=5, tickers=("X",)))
        b = generate_fixture(FixtureSpec(seed=6, tickers=("X",)))
        assert not np.array_equal(a.prices["X"].prices, b.prices["X"].prices)

    def test_scores_within_bounds(self):
        fixture = generate_fixture(FixtureSpec(seed=2))
        for row in fixture.scores:
            assert all(-1.0 <= s <= 1.0 for s in row.scores)

    def test_clean_sidecar_flags_not_adversarial(self):
        fixture = generate_fixture(FixtureSpec(seed=3, spike_count=0))
        assert fixture.meta["adversarial"] is False
        assert fixture.meta["spikes"] is None

    def test_adversarial_spikes_confined_to_training_tail(self):
        spec = FixtureSpec(seed=4, spike_source=1, spike_count=10, spike_span=12)
        fixture = generate_fixture(spec)
        assert fixture.meta["adversarial"] is True
        days = fixture.meta["spikes"]["day_indices"]
        n_train = math.floor(spec.split_hint * spec.days)
        assert all(n_train - 12 <= t < n_train for t in days)
        for t in days:
            assert abs(fixture.scores[t].scores[1]) == 1.0

    def test_spike_requires_source(self):
        with pytest.raises(ValueError, match="spike_source"):
            FixtureSpec(spike_count=3)

    def test_joint_feeds_window_builder(self):
        fixture = generate_fixture(FixtureSpec(seed=7, tickers=("X",)))
        ds = build_windows(fixture.joint("X"), 10, 0.85)
        assert len(ds.train) == 92 and len(ds.test) == 9

    def test_sentiment_predicts_next_day_move(self):
        # The planted coupling should show up as positive correlation between
        # today's latent-driven scores and tomorrow's price change.
        fixture = generate_fixture(FixtureSpec(seed=8, tickers=("X",)))
        joint = fixture.joint("X")
        mean_scores = joint.rows[:-1, 1:].mean(axis=1)
        moves = np.diff(joint.rows[:, 0])
        corr = np.corrcoef(mean_scores, moves)[0, 1]
        assert corr > 0.5


class TestWriteFixture:
    def test_files_written_and_loadable(self, tmp_path):
        fixture = generate_fixture(FixtureSpec(seed=9, days=40, tickers=("AA", "BB")))
        paths = write_fixture(fixture, tmp_path)
        assert paths["prices"].read_text().startswith("date,ticker,adj_close")
        meta = json.loads(paths["meta"].read_text())
        assert meta["seed"] == 9 and meta["adversarial"] is False
        calendar_lines = paths["calendar"].read_text().strip().splitlines()
        assert len(calendar_lines) == 40

    def test_byte_identical_for_fixed_seed(self, tmp_path):
        spec = FixtureSpec(seed=10, days=25, tickers=("AA",))
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        pa = write_fixture(generate_fixture(spec), a_dir)
        pb = write_fixture(generate_fixture(spec), b_dir)
        for key in pa:
            assert pa[key].read_bytes() == pb[key].read_bytes()


class TestDeriveSeed:
    def test_stable_across_calls(self):
        assert derive_seed(3, "x") == derive_seed(3, "x")

    def test_distinguishes_labels_and_seeds(self):
        assert derive_seed(3, "x") != derive_seed(3, "y")
        assert derive_seed(3, "x") != derive_seed(4, "x")
