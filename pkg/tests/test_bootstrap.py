import numpy as np
import pytest

from src.errors import EmptySampleError
from src.estimation.schema import CurrentStatusSample, GridFunction, GridSpec, SmoothEstimate
from src.testing.bootstrap import BootstrapTest, critical_value, fit_resampling_distribution, resample_deltas
from src.testing.schema import BootstrapDistribution, BootstrapPlan
from src.testing.statistics import lr_statistic, smoothed_lr
from src.testing.streams import substream


def constant_estimate(value: float) -> SmoothEstimate:
    grid = GridSpec(stop=2.0, n_points=11)
    return SmoothEstimate(F_tilde=GridFunction(grid=grid, values=np.full(11, value)), source_bandwidth=0.5)


class TestPlan:
    @pytest.mark.parametrize("B, level, rank", [(1000, 0.05, 950), (1000, 0.10, 900), (500, 0.05, 475),
                                                (19, 0.05, 19), (1, 0.05, 1)])
    def test_critical_rank(self, B, level, rank):
        assert BootstrapPlan(n_resamples=B, level=level).critical_rank == rank

    def test_resampling_bandwidth(self):
        assert BootstrapPlan().tilde_bandwidth(500) == pytest.approx(0.57708, abs=1e-5)

    def test_resampling_exponent_is_fixed(self):
        with pytest.raises(ValueError):
            BootstrapPlan(tilde_exponent=0.25)

    def test_invalid_plans(self):
        with pytest.raises(ValueError):
            BootstrapPlan(n_resamples=0)
        with pytest.raises(ValueError):
            BootstrapPlan(level=1.0)


class TestDistribution:
    def test_order_statistic_and_p_value(self):
        plan = BootstrapPlan(n_resamples=4, level=0.5)
        dist = BootstrapDistribution.from_values([3.0, 1.0, 4.0, 2.0], plan)
        np.testing.assert_array_equal(dist.values, [1.0, 2.0, 3.0, 4.0])
        assert dist.critical_value == 2.0
        assert dist.p_value(2.0) == pytest.approx(4.0 / 5.0)
        assert dist.p_value(10.0) == pytest.approx(1.0 / 5.0)

    def test_single_resample(self):
        dist = BootstrapDistribution.from_values([0.3], BootstrapPlan(n_resamples=1))
        assert dist.critical_value == 0.3


class TestResampling:
    def test_extreme_probabilities(self, rng):
        times = np.linspace(0.0, 2.0, 200)
        assert resample_deltas(constant_estimate(1.0), times, rng).sum() == 200
        assert resample_deltas(constant_estimate(0.0), times, rng).sum() == 0

    def test_bernoulli_frequency(self, rng):
        deltas = resample_deltas(constant_estimate(0.3), np.full(20000, 1.0), rng)
        assert deltas.mean() == pytest.approx(0.3, abs=0.015)

    def test_same_substream_same_draws(self):
        times = np.linspace(0.0, 2.0, 50)
        first = resample_deltas(constant_estimate(0.5), times, substream(11, 3, 1, 7))
        second = resample_deltas(constant_estimate(0.5), times, substream(11, 3, 1, 7))
        other = resample_deltas(constant_estimate(0.5), times, substream(11, 3, 1, 8))
        np.testing.assert_array_equal(first, second)
        assert not np.array_equal(first, other)

    def test_resampling_distribution_bandwidth(self, make_samples, config):
        first, second = make_samples(m=250, n=250)
        estimate = fit_resampling_distribution(first, second, BootstrapPlan(), config)
        assert estimate.source_bandwidth == pytest.approx(0.57708, abs=1e-5)
        assert np.all(np.diff(estimate.F_tilde.values) >= -1e-14)


class TestBootstrapTest:
    def test_observed_statistics_match_direct_computation(self, make_samples, config):
        first, second = make_samples(m=40, n=60)
        boot = BootstrapTest(first, second, BootstrapPlan(n_resamples=5), config)
        assert boot.observed("smoothed-lr") == pytest.approx(smoothed_lr(first, second, config)[0], rel=1e-12)
        assert boot.observed("raw-lr") == pytest.approx(lr_statistic(first, second, config), rel=1e-12)

    def test_resample_sizes(self, make_samples, config):
        first, second = make_samples(m=40, n=60)
        d1, d2 = BootstrapTest(first, second, BootstrapPlan(n_resamples=5), config).resample(0)
        assert d1.shape == (40,) and d2.shape == (60,)

    def test_deterministic_for_a_seed(self, make_samples, config):
        first, second = make_samples(m=50, n=50)
        plan = BootstrapPlan(n_resamples=10, rng_seed=123)
        one = BootstrapTest(first, second, plan, config).run()["smoothed-lr"]
        two = BootstrapTest(first, second, plan, config).run()["smoothed-lr"]
        np.testing.assert_array_equal(one.values, two.values)

        moved = BootstrapTest(first, second, plan, config, stream_key=(4, 1)).run()["smoothed-lr"]
        assert not np.array_equal(one.values, moved.values)

    def test_independent_of_worker_count(self, make_samples, config):
        first, second = make_samples(m=50, n=50)
        plan = BootstrapPlan(n_resamples=8, rng_seed=5)
        serial = BootstrapTest(first, second, plan, config).run(["smoothed-lr", "raw-lr"], n_jobs=1)
        parallel = BootstrapTest(first, second, plan, config).run(["smoothed-lr", "raw-lr"], n_jobs=2)
        for kind in ("smoothed-lr", "raw-lr"):
            np.testing.assert_array_equal(serial[kind].values, parallel[kind].values)

    def test_both_statistics_share_the_resamples(self, make_samples, config):
        first, second = make_samples(m=50, n=50)
        plan = BootstrapPlan(n_resamples=10)
        joint = BootstrapTest(first, second, plan, config).run(["smoothed-lr", "raw-lr"])
        alone = BootstrapTest(first, second, plan, config).run(["raw-lr"])
        np.testing.assert_array_equal(joint["raw-lr"].values, alone["raw-lr"].values)

    def test_all_zero_indicators(self, config):
        times = np.linspace(0.05, 1.95, 40)
        first = CurrentStatusSample(times=times[::2], deltas=np.zeros(20), label="sample-1")
        second = CurrentStatusSample(times=times[1::2], deltas=np.zeros(20), label="sample-2")
        boot = BootstrapTest(first, second, BootstrapPlan(n_resamples=20), config)
        dist = boot.run()["smoothed-lr"]
        np.testing.assert_array_equal(dist.values, 0.0)
        assert boot.observed("smoothed-lr") == 0.0
        assert dist.p_value(0.0) == 1.0

    def test_stricter_level_raises_the_critical_value(self, make_samples, config):
        first, second = make_samples(m=50, n=50)
        values = BootstrapTest(first, second, BootstrapPlan(n_resamples=40), config).run()["smoothed-lr"].values
        loose = BootstrapDistribution.from_values(values, BootstrapPlan(n_resamples=40, level=0.10))
        strict = BootstrapDistribution.from_values(values, BootstrapPlan(n_resamples=40, level=0.05))
        assert strict.critical_value >= loose.critical_value

    def test_critical_value_helper(self, make_samples, config):
        first, second = make_samples(m=30, n=30)
        plan = BootstrapPlan(n_resamples=6, statistic_kind="raw-lr")
        dist = critical_value(first, second, plan, config)
        assert dist.statistic_kind == "raw-lr"
        assert dist.size == 6
        assert dist.critical_value == dist.values[plan.critical_rank - 1]

    def test_needs_two_samples(self, make_samples, config):
        first, _ = make_samples(m=30, n=1)
        with pytest.raises(EmptySampleError):
            BootstrapTest(first, None, BootstrapPlan(n_resamples=2), config)
