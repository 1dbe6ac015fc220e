# pipeline.py
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import pandas as pd
from scipy.stats import norm

from src.config.config import (
    ALL_TESTS,
    ANDERSEN_W,
    DEFAULT_N_JOBS,
    LOG_LEVEL,
    NORMAL_CRITICAL_VALUE,
    SMOOTHED_LR,
    SUN_U,
)
from src.errors import BandwidthError, CurrentStatusError, DegenerateStatisticError
from src.estimation.kernel import kernel_moments
from src.estimation.schema import CurrentStatusSample
from src.testing.bootstrap import BootstrapTest
from src.testing.ingest import load_samples
from src.testing.report import ReportGenerator
from src.testing.schema import BOOTSTRAP_KINDS, BootstrapPlan, TestConfig, TestOutcome
from src.testing.statistics import estimated_model, pivot_v_n, u_n_statistic, w_n_statistic

# Setup logging
logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s | %(levelname)s | %(message)s",
    datefmt="%H:%M:%S"
)
logger = logging.getLogger(__name__)

MOMENT_STATISTICS = {SUN_U: u_n_statistic, ANDERSEN_W: w_n_statistic}


class TwoSampleTester:
    """
    Runs the two-sample tests on user data:
    SLR and LR against bootstrap critical values, U_N and W_N against +-1.96.
    """

    def __init__(self, config: Optional[TestConfig] = None, plan: Optional[BootstrapPlan] = None,
                 n_jobs: int = DEFAULT_N_JOBS, bias_correct: bool = False):
        logger.info("Initializing TwoSampleTester...")
        self.config = config or TestConfig()
        self.plan = plan or BootstrapPlan()
        self.n_jobs = n_jobs
        self.bias_correct = bias_correct
        self.moments = kernel_moments()
        self.report = ReportGenerator(level=self.plan.level)
        logger.info(
            f"TwoSampleTester initialized: window [{self.config.a}, {self.config.b}], "
            f"B={self.plan.n_resamples}, level={self.plan.level}"
        )

    def _smoothed_lr_outcome(self, boot: BootstrapTest, distribution, sample1, sample2) -> TestOutcome:
        N = sample1.size + sample2.size
        v_n = boot.observed("smoothed-lr")
        bias_inputs = None
        if self.bias_correct:
            try:
                bias_inputs = estimated_model(sample1, sample2, self.config, self.plan.tilde_bandwidth(N))
            except CurrentStatusError as e:
                logger.warning(f"Bias correction skipped: {e}")
        pivot, centering, bias = pivot_v_n(v_n, N, self.config, self.moments, bias_inputs=bias_inputs,
                                           alpha_N=sample1.size / N)
        return TestOutcome.decide(
            SMOOTHED_LR, v_n, distribution.critical_value, pivot=pivot, centering=centering,
            bias_correction=bias, n_bootstrap=distribution.size, p_value=distribution.p_value(v_n),
        )

    def run_tests(self, sample1: CurrentStatusSample, sample2: CurrentStatusSample,
                  tests: Sequence[str] = ALL_TESTS) -> List[TestOutcome]:
        outcomes: List[TestOutcome] = []

        kinds = [BOOTSTRAP_KINDS[t] for t in tests if t in BOOTSTRAP_KINDS]
        distributions = {}
        boot = None
        if kinds:
            # one set of resampled indicators serves both likelihood-ratio statistics
            try:
                boot = BootstrapTest(sample1, sample2, self.plan, self.config)
                distributions = boot.run(kinds, n_jobs=self.n_jobs)
            except BandwidthError as e:
                # both bootstrap statistics resample from a kernel-smoothed MSLE
                skipped = ", ".join(t for t in tests if t in BOOTSTRAP_KINDS)
                logger.warning(f"{skipped} not computed for N = {sample1.size + sample2.size}: {e}")
                boot = None

        for test in tests:
            if test in BOOTSTRAP_KINDS and boot is None:
                continue
            if test == SMOOTHED_LR:
                outcomes.append(self._smoothed_lr_outcome(boot, distributions["smoothed-lr"], sample1, sample2))
            elif test in BOOTSTRAP_KINDS:
                distribution = distributions[BOOTSTRAP_KINDS[test]]
                statistic = boot.observed(BOOTSTRAP_KINDS[test])
                outcomes.append(TestOutcome.decide(
                    test, statistic, distribution.critical_value,
                    n_bootstrap=distribution.size, p_value=distribution.p_value(statistic),
                ))
            else:
                try:
                    statistic = MOMENT_STATISTICS[test](sample1, sample2, self.config)
                except DegenerateStatisticError as e:
                    logger.warning(f"{test} not computed: {e}")
                    continue
                outcomes.append(TestOutcome.decide(
                    test, statistic, NORMAL_CRITICAL_VALUE, two_sided=True,
                    p_value=float(2.0 * norm.sf(abs(statistic))),
                ))
            logger.info(f"{test}: statistic {outcomes[-1].statistic:.6g}, reject={outcomes[-1].reject}")
        return outcomes

    def process_file(self, path: Union[str, Path],
                     tests: Sequence[str] = ALL_TESTS) -> Tuple[str, pd.DataFrame, List[TestOutcome]]:
        """
        Load -> test -> format.
        Returns:
            narrative (str): one line per test
            table (pd.DataFrame): one row per test
            outcomes (List[TestOutcome])
        """
        try:
            sample1, sample2 = load_samples(path, self.config.M)
            outcomes = self.run_tests(sample1, sample2, tests)
            narrative, table = self.report.format_outcomes(outcomes, sample1.size, sample2.size)
            return narrative, table, outcomes
        except (CurrentStatusError, FileNotFoundError) as e:
            logger.error(f"Cannot test {path}: {e}")
            raise
        except Exception as e:
            logger.exception(f"Error testing {path}: {e}")
            raise


if __name__ == "__main__":
    import sys

    tester = TwoSampleTester(plan=BootstrapPlan(n_resamples=200))
    text, table, _ = tester.process_file(sys.argv[1])
    print("\n" + text)
    print(table.to_string(index=False))
