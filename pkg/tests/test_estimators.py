import numpy as np
import pytest

from src.config.config import DENSITY_FLOOR
from src.errors import CurrentStatusError, EmptySampleError, GridMismatchError
from src.estimation.estimators import (
    TwoSampleSmoothing,
    combined_msle,
    jump_count,
    mle,
    mle_values,
    msle,
    msle_with_density,
    trapezoid_node_weights,
)
from src.estimation.kernel import KernelSmoother
from src.estimation.schema import CurrentStatusSample, GridFunction, GridSpec, KernelSpec


GRID = GridSpec(stop=2.0, n_points=101)


class TestMLE:
    def test_pools_the_single_violator(self):
        sample = CurrentStatusSample(times=[1.0, 2.0, 3.0, 4.0], deltas=[1, 0, 1, 1])
        times, values = mle_values(sample)
        np.testing.assert_allclose(values, [0.5, 0.5, 1.0, 1.0])

        f_hat = mle(sample)
        np.testing.assert_allclose(f_hat.jump_locations, [1.0, 3.0])
        np.testing.assert_allclose(f_hat([0.5, 1.0, 2.5, 3.0, 10.0]), [0.0, 0.5, 0.5, 1.0, 1.0])

    def test_ties_are_merged(self):
        sample = CurrentStatusSample(times=[1.0, 1.0, 2.0], deltas=[1, 0, 1])
        times, values = mle_values(sample)
        np.testing.assert_allclose(times, [1.0, 2.0])
        np.testing.assert_allclose(values, [0.5, 1.0])

    def test_unsorted_input_is_sorted_with_its_indicators(self):
        sample = CurrentStatusSample(times=[3.0, 1.0, 2.0], deltas=[1, 0, 0])
        np.testing.assert_allclose(sample.times, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(sample.deltas, [0, 0, 1])
        np.testing.assert_allclose(mle_values(sample)[1], [0.0, 0.0, 1.0])

    def test_all_zero_indicators_give_no_jumps(self):
        sample = CurrentStatusSample(times=[0.2, 0.4, 0.9], deltas=[0, 0, 0])
        f_hat = mle(sample)
        assert f_hat.jump_locations.size == 0
        np.testing.assert_array_equal(f_hat([0.0, 1.0, 5.0]), 0.0)

    def test_values_stay_in_unit_interval(self, make_samples):
        first, _ = make_samples(m=200, n=1)
        _, values = mle_values(first)
        assert values.min() >= 0.0 and values.max() <= 1.0
        assert np.all(np.diff(values) >= 0)

    def test_empty_sample(self):
        with pytest.raises(EmptySampleError):
            mle_values(None)
        with pytest.raises(ValueError):
            CurrentStatusSample(times=[], deltas=[])


class TestJumpCount:
    def test_counts_jumps_inside_the_window(self):
        f_hat = mle(CurrentStatusSample(times=[0.05, 0.5, 1.0, 1.95], deltas=[1, 0, 1, 1]))
        # values 0.5, 0.5, 1, 1: jumps at 0.05 and 1.0
        assert jump_count(f_hat, 0.1, 1.9) == 1
        assert jump_count(f_hat, 0.0, 2.0) == 2

    def test_window_order(self):
        f_hat = mle(CurrentStatusSample(times=[0.5], deltas=[1]))
        with pytest.raises(ValueError):
            jump_count(f_hat, 1.0, 1.0)


class TestMSLE:
    def test_node_weights_sum_to_length(self):
        w = trapezoid_node_weights(GRID.points)
        assert w.sum() == pytest.approx(2.0)
        assert w[0] == pytest.approx(0.01)

    def test_equals_ratio_where_monotone(self):
        t = GRID.points
        g = GridFunction(grid=GRID, values=0.5 + 0.1 * t)
        F = 1.0 - np.exp(-1.6 * t)
        h = GridFunction(grid=GRID, values=F * g.values)
        estimate = msle(g, h, bandwidth=0.4)
        np.testing.assert_allclose(estimate.F_tilde.values, F, atol=1e-12)
        assert estimate.source_bandwidth == 0.4

    def test_non_monotone_ratio_is_regularized(self):
        t = GRID.points
        ratio = 0.5 + 0.3 * np.sin(4.0 * t)
        g = GridFunction(grid=GRID, values=np.ones_like(t))
        estimate = msle(g, g.with_values(ratio), bandwidth=0.4)
        values = estimate.F_tilde.values
        assert np.all(np.diff(values) >= -1e-14)
        assert values.min() >= 0.0 and values.max() <= 1.0

    @pytest.mark.parametrize("c", [0.0, 0.3, 1.0])
    def test_proportional_sub_density_gives_a_constant(self, c):
        t = GRID.points
        g = GridFunction(grid=GRID, values=0.2 + 0.6 * t * (2.0 - t))
        estimate = msle(g, g.with_values(c * g.values), bandwidth=0.4)
        np.testing.assert_allclose(estimate.F_tilde.values, c, atol=1e-12)

    def test_zero_sub_density_gives_zero(self):
        g = GridFunction(grid=GRID, values=np.full(GRID.n_points, 0.5))
        estimate = msle(g, g.with_values(np.zeros(GRID.n_points)), bandwidth=0.4)
        np.testing.assert_array_equal(estimate.F_tilde.values, 0.0)

    def test_grid_mismatch(self):
        g = GridFunction(grid=GRID, values=np.ones(GRID.n_points))
        other = GridFunction(grid=GridSpec(stop=2.0, n_points=51), values=np.ones(51))
        with pytest.raises(GridMismatchError):
            msle(g, other, bandwidth=0.4)

    def test_negative_density_mass_without_floor(self):
        g = GridFunction(grid=GRID, values=np.full(GRID.n_points, -0.1))
        with pytest.raises(CurrentStatusError):
            msle(g, g.with_values(np.zeros(GRID.n_points)), bandwidth=0.4, floor=None)


class TestTwoSampleSmoothing:
    def test_mixture_of_the_sample_densities(self, make_samples):
        first, second = make_samples(m=60, n=40)
        smoother = KernelSmoother(KernelSpec(bandwidth=0.5), GridSpec.for_bandwidth(2.0, 0.5))
        smoothing = TwoSampleSmoothing(first, second, smoother)
        assert smoothing.alpha_N == pytest.approx(0.6)
        np.testing.assert_allclose(smoothing.g, 0.6 * smoothing.g1 + 0.4 * smoothing.g2)

        fit = smoothing.fit()
        np.testing.assert_allclose(fit.h, 0.6 * fit.h1 + 0.4 * fit.h2)
        assert fit.g is smoothing.g

    def test_identical_samples_share_their_estimate(self, make_samples):
        first, _ = make_samples(m=80, n=1)
        second = CurrentStatusSample(times=first.times, deltas=first.deltas, label="sample-2")
        smoother = KernelSmoother(KernelSpec(bandwidth=0.5), GridSpec.for_bandwidth(2.0, 0.5))
        fit = TwoSampleSmoothing(first, second, smoother).fit()
        np.testing.assert_allclose(fit.est1.F_tilde.values, fit.est.F_tilde.values, atol=1e-12)
        np.testing.assert_allclose(fit.est2.F_tilde.values, fit.est.F_tilde.values, atol=1e-12)

    def test_new_indicators_reuse_the_weights(self, make_samples):
        first, second = make_samples(m=30, n=30)
        smoother = KernelSmoother(KernelSpec(bandwidth=0.5), GridSpec.for_bandwidth(2.0, 0.5))
        smoothing = TwoSampleSmoothing(first, second, smoother)
        fit = smoothing.fit(np.zeros(30), np.zeros(30))
        np.testing.assert_array_equal(fit.est.F_tilde.values, 0.0)
        np.testing.assert_array_equal(fit.est1.F_tilde.values, 0.0)

    def test_single_sample(self, make_samples):
        first, _ = make_samples(m=50, n=1)
        smoother = KernelSmoother(KernelSpec(bandwidth=0.5), GridSpec.for_bandwidth(2.0, 0.5))
        smoothing = TwoSampleSmoothing(first, None, smoother)
        assert smoothing.alpha_N == 1.0
        fit = smoothing.fit()
        np.testing.assert_allclose(fit.est.F_tilde.values, fit.est1.F_tilde.values)

    def test_combined_msle_is_monotone(self, make_samples):
        first, second = make_samples(m=100, n=100)
        estimate = combined_msle(first, second, KernelSpec(bandwidth=0.5), GridSpec.for_bandwidth(2.0, 0.5))
        values = estimate.F_tilde.values
        assert np.all(np.diff(values) >= -1e-14)
        assert estimate(np.array([-1.0, 3.0])).tolist() == [values[0], values[-1]]


class TestMSLEWithDensity:
    def test_tracks_the_exponential_law(self, make_samples):
        first, second = make_samples(m=1000, n=1000)
        pooled = CurrentStatusSample.pooled(first, second)
        grid = GridSpec.for_bandwidth(2.0, 0.44)
        estimate = msle_with_density(pooled, 0.44, grid, (0.1, 1.9))

        t = np.linspace(0.5, 1.5, 11)
        truth = 1.0 - np.exp(-1.6 * t)
        assert np.max(np.abs(estimate(t) - truth)) < 0.12

        outside = ~grid.window_mask(0.1, 1.9)
        np.testing.assert_array_equal(estimate.f_tilde.values[outside], 0.0)
        assert np.median(estimate.f_tilde.values[grid.window_mask(0.3, 1.7)]) > 0.0

    def test_density_floor(self):
        sample = CurrentStatusSample(times=np.linspace(0.0, 0.5, 50), deltas=np.ones(50))
        grid = GridSpec.for_bandwidth(2.0, 0.2)
        with pytest.raises(CurrentStatusError):
            msle_with_density(sample, 0.2, grid, (0.1, 1.9))

    def test_no_events_give_a_zero_density(self, make_samples):
        first, _ = make_samples(m=200, n=1)
        sample = CurrentStatusSample(times=first.times, deltas=np.zeros(200, dtype=int))
        grid = GridSpec.for_bandwidth(2.0, 0.6)
        estimate = msle_with_density(sample, 0.6, grid, (0.1, 1.9))
        np.testing.assert_array_equal(estimate.F_tilde.values, 0.0)
        np.testing.assert_array_equal(estimate.f_tilde.values, 0.0)


def record_points(ratio: np.ndarray) -> np.ndarray:
    """Points at least as large as every earlier value and at most every later one."""
    prefix_max = np.maximum.accumulate(ratio)
    suffix_min = np.minimum.accumulate(ratio[::-1])[::-1]
    return (ratio >= prefix_max) & (ratio <= suffix_min)


class TestRatioRepresentation:
    """The MSLE reproduces h~/g~ wherever the isotonic fit leaves the ratio alone."""

    @staticmethod
    def _null_fit(make_samples, N):
        first, second = make_samples(m=N // 2, n=N // 2)
        b = 2.0 * N ** (-0.25)
        smoother = KernelSmoother(KernelSpec(bandwidth=b), GridSpec.for_bandwidth(2.0, b))
        smoothing = TwoSampleSmoothing(first, second, smoother)
        fit = smoothing.fit()
        ratio = fit.h / np.maximum(smoothing.g, DENSITY_FLOOR)
        return smoothing.grid, ratio, fit.est.F_tilde.values

    def test_equal_to_the_ratio_where_it_is_nondecreasing(self, make_samples):
        for _ in range(5):
            grid, ratio, F = self._null_fit(make_samples, 2000)
            window = grid.window_mask(0.3, 1.7)
            kept = window & record_points(ratio)
            assert np.count_nonzero(kept) > 0
            np.testing.assert_allclose(F[kept], ratio[kept], atol=1e-6)

    @pytest.mark.slow
    def test_monotonicity_violations_are_rare(self, make_samples):
        kept = violations = total = 0
        for _ in range(200):
            grid, ratio, F = self._null_fit(make_samples, 2000)
            window = grid.window_mask(0.3, 1.7)
            on_record = window & record_points(ratio)
            assert np.all(np.abs(F[on_record] - ratio[on_record]) <= 1e-6)
            kept += np.count_nonzero(on_record)
            violations += np.count_nonzero(np.diff(ratio[window]) < 0.0)
            total += np.count_nonzero(window)
        assert kept > 0
        assert violations / total < 0.05


@pytest.mark.slow
class TestConsistency:
    def test_sup_error_shrinks_with_the_sample_size(self):
        window = (0.1, 1.9)
        medians = []
        for N in (500, 2000, 8000):
            b = 2.0 * N ** (-0.2)
            grid = GridSpec.for_bandwidth(2.0, b)
            mask = grid.window_mask(*window)
            truth = 1.0 - np.exp(-1.6 * grid.points[mask])
            errors = []
            for seed in range(50):
                rng = np.random.default_rng([N, seed])
                t = 2.0 * rng.random(N)
                x = rng.exponential(1.0 / 1.6, N)
                sample = CurrentStatusSample(times=t, deltas=(x <= t).astype(int))
                estimate = combined_msle(sample, None, KernelSpec(bandwidth=b), grid)
                errors.append(np.max(np.abs(estimate.F_tilde.values[mask] - truth)))
            medians.append(np.median(errors))
        assert medians[0] > medians[1] > medians[2]
