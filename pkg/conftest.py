# conftest.py
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

ROOT = Path(__file__).parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.estimation.schema import CurrentStatusSample  # noqa: E402
from src.simulation.schema import Scenario  # noqa: E402
from src.testing.schema import BootstrapPlan, TestConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20100501)


@pytest.fixture
def config():
    return TestConfig()


@pytest.fixture
def wide_config():
    """Window containing every observation of the hand-computed examples."""
    return TestConfig(a=0.1, b=1.9)


@pytest.fixture
def four_point_samples():
    first = CurrentStatusSample(times=[0.5, 1.0], deltas=[1, 0], label="sample-1")
    second = CurrentStatusSample(times=[0.75, 1.25], deltas=[0, 1], label="sample-2")
    return first, second


@pytest.fixture
def null_scenario():
    return Scenario(name="null-uniform", lam=1.6, alpha1=1.0, alpha2=1.0, m=50, n=50,
                    replications=4, plan=BootstrapPlan(n_resamples=19))


@pytest.fixture
def shape_scenario():
    return Scenario(name="shapes", lam=1.6, alpha1=0.5, alpha2=2.0, m=50, n=50,
                    replications=4, plan=BootstrapPlan(n_resamples=19))


def weibull_samples(m: int, n: int, rng, lam=1.6, alpha1=1.0, alpha2=1.0):
    """Uniform observation times on [0, 2] and Weibull hidden times for both samples."""
    def draw(size, alpha):
        t = 2.0 * rng.random(size)
        x = (-np.log1p(-rng.random(size)) / lam) ** (1.0 / alpha)
        return t, (x <= t).astype(int)

    t1, d1 = draw(m, alpha1)
    t2, d2 = draw(n, alpha2)
    return (CurrentStatusSample(times=t1, deltas=d1, label="sample-1"),
            CurrentStatusSample(times=t2, deltas=d2, label="sample-2"))


@pytest.fixture
def make_samples(rng):
    def factory(m=50, n=50, **kwargs):
        return weibull_samples(m, n, rng, **kwargs)
    return factory


def samples_to_csv(path, samples):
    """Write samples as `sample,t,delta` rows, the layout `cli test` reads."""
    rows = []
    for label, sample in enumerate(samples, start=1):
        rows += [{"sample": label, "t": t, "delta": d} for t, d in zip(sample.times, sample.deltas)]
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


@pytest.fixture
def write_csv():
    return samples_to_csv
