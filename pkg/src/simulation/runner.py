# src/simulation/runner.py
"""
Monte Carlo engine: replications of a scenario, rejection tables, crossing
functionals, decomposition and jump-count diagnostics, and curve data.

Replication r of a scenario draws its data from substream(master_seed, r, 0)
and its bootstrap resamples from substream(master_seed, r, 1, i); results are
merged by replication index, so tables do not depend on the worker count.
"""
import logging
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.integrate import quad
from tqdm import tqdm

from ..config.config import (
    ANDERSEN_W,
    CURVE_COLUMNS,
    DIAGNOSE_JUMP_SAMPLE_SIZE,
    DIAGNOSE_SAMPLE_SIZES,
    FOUR_EZ_SQUARED,
    NORMAL_CRITICAL_VALUE,
    SUN_U,
)
from ..errors import DegenerateStatisticError, ScenarioError
from ..estimation.estimators import TwoSampleSmoothing, mle
from ..estimation.kernel import kernel_moments
from ..estimation.schema import CurrentStatusSample
from ..testing.bootstrap import BootstrapTest
from ..testing.schema import BOOTSTRAP_KINDS, TestConfig
from ..testing.statistics import (
    chernoff_diagnostic,
    decompose_v_n,
    pooled_mle_variance,
    sun_original_variance,
    u_n_statistic,
    w_n_statistic,
)
from ..testing.streams import substream
from .laws import WeibullLaw, sample_observation, sample_weibull
from .schema import RejectionTable, Scenario, rejection_counts

logger = logging.getLogger(__name__)

CROSSING_ABS_TOL = 1e-12

MOMENT_TESTS: Dict[str, Callable] = {SUN_U: u_n_statistic, ANDERSEN_W: w_n_statistic}


# ------------------ DATA ------------------
def simulate_samples(scenario: Scenario, replication: int,
                     key: Tuple[int, ...] = ()) -> Tuple[CurrentStatusSample, CurrentStatusSample]:
    """Observation times and Delta = 1{X <= T} for both samples of one replication."""
    rng = substream(scenario.master_seed, *key, replication, 0)
    t1 = sample_observation(scenario.g1, scenario.m, rng)
    x1 = sample_weibull(scenario.lam, scenario.alpha1, 1.0, scenario.m, rng)
    t2 = sample_observation(scenario.g2, scenario.n, rng)
    x2 = sample_weibull(scenario.lam, scenario.alpha2, scenario.theta, scenario.n, rng)
    return (
        CurrentStatusSample(times=t1, deltas=(x1 <= t1).astype(np.int64), label="sample-1"),
        CurrentStatusSample(times=t2, deltas=(x2 <= t2).astype(np.int64), label="sample-2"),
    )


# ------------------ REPLICATIONS ------------------
def evaluate_replication(scenario: Scenario, replication: int) -> Dict[str, bool]:
    """Decisions of every requested test on one simulated pair of samples."""
    sample1, sample2 = simulate_samples(scenario, replication)
    decisions: Dict[str, bool] = {}

    kinds = [BOOTSTRAP_KINDS[t] for t in scenario.tests if t in BOOTSTRAP_KINDS]
    if kinds:
        boot = BootstrapTest(sample1, sample2, scenario.plan, scenario.config, stream_key=(replication, 1))
        distributions = boot.run(kinds)
        for test, kind in BOOTSTRAP_KINDS.items():
            if kind in distributions:
                decisions[test] = bool(boot.observed(kind) > distributions[kind].critical_value)

    for test, statistic in MOMENT_TESTS.items():
        if test not in scenario.tests:
            continue
        try:
            decisions[test] = bool(abs(statistic(sample1, sample2, scenario.config)) > NORMAL_CRITICAL_VALUE)
        except DegenerateStatisticError:
            logger.debug(f"{test} degenerate in replication {replication}; counted as no rejection")
            decisions[test] = False
    return decisions


def run_scenario(scenario: Scenario, n_jobs: int = 1, progress: bool = True) -> RejectionTable:
    """Rejection fractions of every requested test over R replications."""
    logger.info(
        f"Running scenario '{scenario.name}': R={scenario.replications}, B={scenario.plan.n_resamples}, "
        f"m={scenario.m}, n={scenario.n}"
    )
    replications = tqdm(range(scenario.replications), desc=scenario.name, disable=not progress, leave=False)
    if n_jobs == 1:
        decisions = [evaluate_replication(scenario, r) for r in replications]
    else:
        decisions = Parallel(n_jobs=n_jobs)(delayed(evaluate_replication)(scenario, r) for r in replications)

    table = RejectionTable()
    for test, count in rejection_counts(decisions, scenario.tests).items():
        table.add(test, scenario, count)
    logger.info(f"Scenario '{scenario.name}' done: " + ", ".join(
        f"{row['test']}={row['reject_rate']:.3f}" for row in table.rows))
    return table


def run_scenarios(scenarios: Iterable[Scenario], n_jobs: int = 1, progress: bool = True) -> RejectionTable:
    table = RejectionTable()
    for scenario in scenarios:
        table.extend(run_scenario(scenario, n_jobs=n_jobs, progress=progress))
    return table


# ------------------ CROSSING FUNCTIONALS ------------------
class CrossingFunctionals(NamedTuple):
    int_diff: float
    int_sq_diff: float
    l2_functional: float


def _uniform_density(t):
    return 1.0


def crossing_functionals(first: WeibullLaw, second: WeibullLaw, a: float, b: float,
                         g1: Optional[Callable] = None, g2: Optional[Callable] = None,
                         alpha_N: float = 0.5) -> CrossingFunctionals:
    """
    int_a^b (F1 - F2) dG, int_a^b (F1^2 - F2^2) dG with G the pooled observation law,
    and the local likelihood-ratio distance
    int (F1 - F)^2 / (F(1 - F)) dG1 + int (F2 - F)^2 / (F(1 - F)) dG2,
    F = (alpha g1 F1 + beta g2 F2) / g_bar. Densities default to 1 (dG = dt).
    """
    if not a < b:
        raise ValueError("crossing functionals need a < b")
    g1 = g1 or _uniform_density
    g2 = g2 or _uniform_density
    beta_N = 1.0 - alpha_N

    def g_bar(t):
        return alpha_N * g1(t) + beta_N * g2(t)

    def pooled(t):
        return (alpha_N * g1(t) * first.cdf(t) + beta_N * g2(t) * second.cdf(t)) / g_bar(t)

    def integrate(f) -> float:
        value, _ = quad(f, a, b, epsabs=CROSSING_ABS_TOL, epsrel=1e-12, limit=200)
        return float(value)

    int_diff = integrate(lambda t: (first.cdf(t) - second.cdf(t)) * g_bar(t))
    int_sq_diff = integrate(lambda t: (first.cdf(t) ** 2 - second.cdf(t) ** 2) * g_bar(t))

    def l2_integrand(t):
        F = pooled(t)
        scale = F * (1.0 - F)
        return ((first.cdf(t) - F) ** 2 * g1(t) + (second.cdf(t) - F) ** 2 * g2(t)) / scale

    return CrossingFunctionals(int_diff, int_sq_diff, integrate(l2_integrand))


# ------------------ DIAGNOSTICS ------------------
def _sized(scenario: Scenario, N: int) -> Scenario:
    return scenario.model_copy(update={"m": N // 2, "n": N - N // 2})


def _decomposition_rows(scenario: Scenario, N: int, replication: int, model, moments) -> Dict[str, float]:
    sized = _sized(scenario, N)
    sample1, sample2 = simulate_samples(sized, replication, key=(N,))
    result = decompose_v_n(sample1, sample2, model, sized.config, moments)
    b_N = sized.config.bandwidth(N)
    return {
        "N": N, "replication": replication, **result.model_dump(),
        "scaled_residual": abs(result.residual) * N * np.sqrt(b_N),
        "pooled_variance": pooled_mle_variance(sample1, sample2),
        "sun_original_variance": sun_original_variance(sample1, sample2),
    }


def diagnose(scenario: Scenario, sizes: Sequence[int] = DIAGNOSE_SAMPLE_SIZES,
             replications: Optional[int] = None, jump_size: int = DIAGNOSE_JUMP_SAMPLE_SIZE,
             jump_replications: int = 20, n_jobs: int = 1,
             progress: bool = True) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Decomposition residuals across N and the jump-count constant under H0.

    Returns:
        detail (pd.DataFrame): one row per (N, replication)
        summary (pd.DataFrame): columns quantity, N, value
    """
    if not scenario.is_null:
        raise ScenarioError(f"diagnostics need a null scenario; '{scenario.name}' is an alternative")
    model = scenario.true_model()
    moments = kernel_moments()
    R = replications or scenario.replications
    tasks = [(N, r) for N in sizes for r in range(R)]
    logger.info(f"Diagnosing '{scenario.name}': N in {list(sizes)}, {R} replications each")

    tasks_iter = tqdm(tasks, desc=f"{scenario.name} decomposition", disable=not progress, leave=False)
    if n_jobs == 1:
        rows = [_decomposition_rows(scenario, N, r, model, moments) for N, r in tasks_iter]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_decomposition_rows)(scenario, N, r, model, moments) for N, r in tasks_iter
        )
    detail = pd.DataFrame(rows)

    summary: List[Dict[str, object]] = []
    for N, group in detail.groupby("N", sort=True):
        summary.append({"quantity": "median_scaled_residual", "N": N, "value": float(group["scaled_residual"].median())})
        summary.append({"quantity": "mean_D_N", "N": N, "value": float(group["D_N"].mean())})
        summary.append({"quantity": "mean_pooled_variance", "N": N, "value": float(group["pooled_variance"].mean())})
        summary.append({"quantity": "mean_sun_original_variance", "N": N,
                        "value": float(group["sun_original_variance"].mean())})

    if jump_size and jump_replications:
        sized = _sized(scenario, jump_size)
        pooled = [
            CurrentStatusSample.pooled(*simulate_samples(sized, r, key=(jump_size, 1)))
            for r in range(jump_replications)
        ]
        constant = chernoff_diagnostic(pooled, model, sized.config, alpha_N=sized.m / jump_size)
        summary.append({"quantity": "jump_count_constant", "N": jump_size, "value": constant})
        summary.append({"quantity": "four_ez_squared", "N": jump_size, "value": FOUR_EZ_SQUARED})
        logger.info(f"Jump-count constant at N={jump_size}: {constant:.3f}")

    return detail, pd.DataFrame(summary, columns=["quantity", "N", "value"])


# ------------------ CURVES ------------------
def curve_table(sample1: CurrentStatusSample, sample2: CurrentStatusSample, config: TestConfig,
                scenario: Optional[Scenario] = None) -> pd.DataFrame:
    """MLEs and MSLEs (per sample and pooled) on the grid points inside [a, b], plus the true F's."""
    N = sample1.size + sample2.size
    smoothing = TwoSampleSmoothing(sample1, sample2, config.smoother(N))
    fit = smoothing.fit()
    grid = smoothing.grid
    t = grid.points[grid.window_mask(config.a, config.b)]

    pooled = CurrentStatusSample.pooled(sample1, sample2)
    frame = {
        "t": t,
        "mle_1": mle(sample1)(t), "mle_2": mle(sample2)(t), "mle_pooled": mle(pooled)(t),
        "msle_1": fit.est1(t), "msle_2": fit.est2(t), "msle_pooled": fit.est(t),
    }
    if scenario is not None:
        law1, law2 = scenario.observation_laws
        F1, F2 = scenario.first_law.cdf(t), scenario.second_law.cdf(t)
        w1, w2 = smoothing.alpha_N * law1.pdf(t), smoothing.beta_N * law2.pdf(t)
        frame.update({"F_true_1": F1, "F_true_2": F2, "F_true_pooled": (w1 * F1 + w2 * F2) / (w1 + w2)})
    else:
        frame.update({"F_true_1": np.nan, "F_true_2": np.nan, "F_true_pooled": np.nan})
    return pd.DataFrame(frame, columns=CURVE_COLUMNS)
