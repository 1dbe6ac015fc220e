# src/simulation/laws.py
"""
Hidden-variable and observation-time laws of the simulation study.

Hidden: Weibull with cdf 1 - exp(-lambda theta x^alpha) (theta = 1 for sample 1).
Observation: uniform on [0, 2] or the decreasing density (1/4)(2 - t)^3 on [0, 2].
All draws go through inverse cdfs of uniforms from the caller's generator.
"""
import logging
from typing import Callable, Dict, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat
from scipy import stats

from ..errors import ScenarioError

logger = logging.getLogger(__name__)

ObservationId = Literal["uniform02", "poly_decreasing"]


class WeibullLaw(BaseModel):
    model_config = ConfigDict(frozen=True)

    lam: PositiveFloat
    alpha: PositiveFloat
    theta: PositiveFloat = 1.0

    @property
    def dist(self):
        return stats.weibull_min(c=self.alpha, scale=(self.lam * self.theta) ** (-1.0 / self.alpha))

    def cdf(self, x):
        return self.dist.cdf(x)

    def pdf(self, x):
        return self.dist.pdf(x)

    def quantile(self, u):
        """(-log(1 - u) / (lambda theta))^(1/alpha)."""
        return self.dist.ppf(u)


class ObservationLaw:
    """Frozen scipy law on [0, 2] plus the derivative of its density."""

    def __init__(self, g_id: str, dist, density_derivative: Callable):
        self.g_id = g_id
        self.dist = dist
        self._density_derivative = density_derivative

    def pdf(self, t):
        return self.dist.pdf(t)

    def dpdf(self, t):
        return self._density_derivative(np.asarray(t, dtype=float))

    def cdf(self, t):
        return self.dist.cdf(t)

    def quantile(self, u):
        return self.dist.ppf(u)

    def __repr__(self) -> str:
        return f"ObservationLaw({self.g_id!r})"


def _poly_decreasing_derivative(t: np.ndarray) -> np.ndarray:
    inside = (t >= 0.0) & (t <= 2.0)
    return np.where(inside, -0.75 * (2.0 - t) ** 2, 0.0)


OBSERVATION_LAWS: Dict[str, ObservationLaw] = {
    "uniform02": ObservationLaw("uniform02", stats.uniform(loc=0.0, scale=2.0), np.zeros_like),
    # beta(1, 4) stretched to [0, 2] has density (1/4)(2 - t)^3 and cdf 1 - (2 - t)^4 / 16
    "poly_decreasing": ObservationLaw("poly_decreasing", stats.beta(1.0, 4.0, scale=2.0),
                                      _poly_decreasing_derivative),
}


def observation_law(g_id: str) -> ObservationLaw:
    try:
        return OBSERVATION_LAWS[g_id]
    except KeyError:
        raise ScenarioError(f"unknown observation law {g_id!r}; expected one of {sorted(OBSERVATION_LAWS)}") from None


def weibull_quantile(lam: float, alpha: float, theta: float, u):
    return WeibullLaw(lam=lam, alpha=alpha, theta=theta).quantile(u)


def observation_quantile(g_id: str, u):
    return observation_law(g_id).quantile(u)


def sample_weibull(lam: float, alpha: float, theta: float, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(weibull_quantile(lam, alpha, theta, rng.random(count)), dtype=float)


def sample_observation(g_id: str, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(observation_quantile(g_id, rng.random(count)), dtype=float)
