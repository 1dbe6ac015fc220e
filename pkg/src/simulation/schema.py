# src/simulation/schema.py
import math
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator

from ..config.config import ALL_TESTS, DEFAULT_SEED, REJECTION_COLUMNS
from ..errors import ScenarioError
from ..testing.schema import BootstrapPlan, TestConfig, TrueModel
from .laws import ObservationId, ObservationLaw, WeibullLaw, observation_law


class Scenario(BaseModel):
    """One cell of a level/power table: hidden laws, observation laws, sizes and run plan."""
    model_config = ConfigDict(frozen=True)

    name: str = "scenario"
    lam: PositiveFloat = Field(description="Weibull rate lambda shared by both samples")
    alpha1: PositiveFloat
    alpha2: PositiveFloat
    theta: PositiveFloat = 1.0
    g1: ObservationId = "uniform02"
    g2: ObservationId = "uniform02"
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    replications: int = Field(ge=1, description="R")
    plan: BootstrapPlan = BootstrapPlan()
    config: TestConfig = TestConfig()
    master_seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)
    tests: Tuple[str, ...] = ALL_TESTS

    @field_validator("tests")
    @classmethod
    def _known_tests(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [t for t in v if t not in ALL_TESTS]
        if unknown:
            raise ValueError(f"unknown test(s) {unknown}; expected a subset of {list(ALL_TESTS)}")
        return v

    @property
    def is_null(self) -> bool:
        return self.alpha1 == self.alpha2 and self.theta == 1.0

    @property
    def first_law(self) -> WeibullLaw:
        return WeibullLaw(lam=self.lam, alpha=self.alpha1)

    @property
    def second_law(self) -> WeibullLaw:
        return WeibullLaw(lam=self.lam, alpha=self.alpha2, theta=self.theta)

    @property
    def observation_laws(self) -> Tuple[ObservationLaw, ObservationLaw]:
        return observation_law(self.g1), observation_law(self.g2)

    @property
    def key(self) -> Dict[str, object]:
        return {
            "lambda": self.lam, "alpha1": self.alpha1, "alpha2": self.alpha2, "theta": self.theta,
            "g1": self.g1, "g2": self.g2, "m": self.m, "n": self.n,
            "R": self.replications, "B": self.plan.n_resamples,
        }

    def true_model(self) -> TrueModel:
        """Population F, f, g_j, g_j' under H0; diagnostics are undefined otherwise."""
        if not self.is_null:
            raise ScenarioError(f"scenario {self.name!r} is not a null scenario (alpha1 = alpha2, theta = 1)")
        hidden = self.first_law
        law1, law2 = self.observation_laws
        return TrueModel(
            F=hidden.cdf, f=hidden.pdf,
            g1=law1.pdf, dg1=law1.dpdf, g2=law2.pdf, dg2=law2.dpdf,
            same_observation_law=self.g1 == self.g2,
        )


class RejectionTable(BaseModel):
    """Rejection fractions per (test, scenario) with binomial standard errors."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rows: List[Dict[str, object]] = Field(default_factory=list)

    @staticmethod
    def standard_error(rate: float, replications: int) -> float:
        return math.sqrt(rate * (1.0 - rate) / replications)

    def add(self, test: str, scenario: Scenario, rejections: int) -> None:
        rate = rejections / scenario.replications
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"rejection fraction {rate} outside [0, 1]")
        self.rows.append({
            "test": test, **scenario.key,
            "reject_rate": rate, "se": self.standard_error(rate, scenario.replications),
        })

    def extend(self, other: "RejectionTable") -> "RejectionTable":
        self.rows.extend(other.rows)
        return self

    def rate(self, test: str) -> float:
        matches = [r["reject_rate"] for r in self.rows if r["test"] == test]
        if not matches:
            raise KeyError(test)
        return float(matches[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REJECTION_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.6g")
        return path


def rejection_counts(decisions: List[Dict[str, bool]], tests) -> Dict[str, int]:
    """Order-independent tally of per-replication decisions."""
    return {t: int(np.sum([d[t] for d in decisions])) for t in tests}
