import numpy as np
import pytest

from outage_sentinel import (
    EvenWindowError,
    LengthMismatchError,
    MovingMeanFilter,
    MovingMedianFilter,
    StreamingMean,
    StreamingMedian,
    detrend,
    moving_mean,
    moving_median,
)


def naive_centered(series, window, reducer):
    """Per-window oracle: explicit slices, symmetric truncation at edges."""
    y = np.asarray(series, dtype=float)
    half = window // 2
    out = np.empty(y.size)
    for i in range(y.size):
        r = min(half, i, y.size - 1 - i)
        out[i] = reducer(y[i - r : i + r + 1])
    return out


def exact_median(values):
    return sorted(values)[len(values) // 2]


class TestMovingMedian:
    @pytest.mark.parametrize("window", [1, 3, 7, 31])
    @pytest.mark.parametrize("n", [1, 2, 3, 6, 7, 8, 30, 31, 32, 100])
    def test_matches_naive_oracle(self, window, n):
        rng = np.random.default_rng(window * 1000 + n)
        y = rng.normal(size=n)
        got = moving_median(y, window)
        want = naive_centered(y, window, exact_median)
        assert np.array_equal(got, want)

    def test_constant_series_unchanged(self):
        y = np.full(50, 59.98)
        assert np.array_equal(moving_median(y, 7), y)

    def test_single_spike_removed(self):
        y = np.array([0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0])
        assert moving_median(y, 7)[3] == 0.0

    @pytest.mark.parametrize("run", [1, 2, 3])
    def test_spike_runs_up_to_three_removed(self, run):
        y = np.zeros(40)
        y[20 : 20 + run] = 9.0
        assert np.array_equal(moving_median(y, 7), np.zeros(40))

    def test_spike_run_of_four_survives(self):
        y = np.zeros(40)
        y[20:24] = 9.0
        assert moving_median(y, 7).max() == 9.0

    def test_noisy_ramp_stays_near_the_clean_ramp(self):
        rng = np.random.default_rng(0)
        clean = np.linspace(0.0, 10.0, 10_000)
        noisy = clean + rng.normal(0.0, 0.05, clean.size)
        filtered = moving_median(noisy, 7)
        window_span = clean[7] - clean[0]
        assert np.max(np.abs(filtered - clean)) <= window_span + 3 * 0.05

    def test_even_or_bad_window_rejected(self):
        for bad in (0, -3, 4, 2.5):
            with pytest.raises(EvenWindowError):
                moving_median(np.zeros(10), bad)


class TestMovingMean:
    @pytest.mark.parametrize("window", [1, 3, 7, 31])
    @pytest.mark.parametrize("n", [1, 2, 7, 30, 31, 32, 100])
    def test_matches_naive_oracle(self, window, n):
        rng = np.random.default_rng(window * 1000 + n)
        y = rng.normal(size=n)
        got = moving_mean(y, window)
        want = naive_centered(y, window, np.mean)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-15)

    def test_constant_series_unchanged(self):
        y = np.full(64, 60.0)
        assert np.array_equal(moving_mean(y, 31), y)

    def test_linear_ramp_fixed_in_the_interior(self):
        y = np.arange(100, dtype=float)
        out = moving_mean(y, 31)
        assert np.array_equal(out[15:-15], y[15:-15])

    def test_alternating_signal_shrinks_by_window(self):
        a = 0.25
        y = a * (-1.0) ** np.arange(101)
        out = moving_mean(y, 31)
        interior = out[15:-15]
        assert np.max(np.abs(interior)) <= a / 31 + 1e-15

    def test_even_window_rejected(self):
        with pytest.raises(EvenWindowError):
            moving_mean(np.zeros(10), 8)


class TestEdgeSymmetry:
    @pytest.mark.parametrize("fn,window", [(moving_median, 7), (moving_mean, 31)])
    @pytest.mark.parametrize("n", [1, 5, 16, 31, 33, 200])
    def test_reversing_input_reverses_output_exactly(self, fn, window, n):
        rng = np.random.default_rng(n)
        y = rng.normal(size=n)
        assert np.array_equal(fn(y[::-1], window), fn(y, window)[::-1])

    @pytest.mark.parametrize("fn", [moving_median, moving_mean])
    def test_length_preserved(self, fn):
        for n in (1, 2, 10, 77):
            assert fn(np.random.default_rng(n).normal(size=n), 7).size == n


class TestStreaming:
    @pytest.mark.parametrize("cls,fn,window", [
        (StreamingMedian, moving_median, 7),
        (StreamingMean, moving_mean, 31),
    ])
    @pytest.mark.parametrize("n", [1, 3, 7, 15, 31, 32, 250])
    def test_sample_at_a_time_equals_batch(self, cls, fn, window, n):
        rng = np.random.default_rng(9000 + n)
        y = rng.normal(size=n)
        state = cls(window)
        streamed = []
        for sample in y:
            streamed.extend(state.push(sample))
        streamed.extend(state.flush())
        assert np.array_equal(np.array(streamed), fn(y, window))

    def test_outputs_are_emitted_only_once_final(self):
        state = StreamingMedian(7)
        emitted = []
        y = np.arange(10.0)
        for i, sample in enumerate(y):
            out = state.push(sample)
            emitted.extend(out)
            # left-edge output k (radius k) is final at sample 2k, interior
            # output k (radius 3) at sample k + 3
            assert len(emitted) == (i // 2 + 1 if i < 6 else i - 2)
        emitted.extend(state.flush())
        assert np.array_equal(np.array(emitted), moving_median(y, 7))

    def test_reset_clears_state(self):
        state = StreamingMean(31)
        state.push(1.0)
        state.reset()
        out = []
        for v in (2.0, 2.0, 2.0):
            out.extend(state.push(v))
        out.extend(state.flush())
        assert np.array_equal(np.array(out), np.full(3, 2.0))

    def test_even_window_rejected(self):
        with pytest.raises(EvenWindowError):
            StreamingMedian(4)


class TestDetrend:
    def test_equal_series_give_zero(self):
        y = np.random.default_rng(1).normal(size=40)
        assert np.array_equal(detrend(y, y), np.zeros(40))

    def test_constant_offset_preserved(self):
        y = np.random.default_rng(2).normal(size=40)
        assert detrend(y + 0.005, y) == pytest.approx(np.full(40, 0.005), abs=1e-15)

    def test_length_mismatch_rejected(self):
        with pytest.raises(LengthMismatchError):
            detrend(np.zeros(5), np.zeros(6))


class TestEstimatorAdapters:
    def test_median_transformer_applies_columnwise(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        out = MovingMedianFilter(window=7).fit_transform(X)
        for col in range(3):
            assert np.array_equal(out[:, col], moving_median(X[:, col], 7))

    def test_mean_transformer_applies_columnwise(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 2))
        out = MovingMeanFilter(window=31).fit_transform(X)
        for col in range(2):
            assert np.array_equal(out[:, col], moving_mean(X[:, col], 31))

    def test_get_set_params_round_trip(self):
        est = MovingMedianFilter(window=9)
        assert est.get_params() == {"window": 9}
        est.set_params(window=11)
        assert est.get_params() == {"window": 11}
