# src/estimation/estimators.py
"""
Distribution-function estimators for current status data.

MLE: slope of the GCM of the discrete cusum diagram {(i, sum_{j<=i} Delta_(j))}.
MSLE: slope of the GCM of the continuous cusum diagram (G~(t), H~(t)) built from
kernel estimates of the observation density g and the sub-density h = F g.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from ..config.config import DENSITY_FLOOR
from ..errors import CurrentStatusError, EmptySampleError, GridMismatchError
from .isotonic import cusum_slopes
from .kernel import KernelSmoother
from .schema import (
    CurrentStatusSample,
    GridFunction,
    GridSpec,
    KernelSpec,
    MonotoneStepFunction,
    SmoothEstimate,
)

logger = logging.getLogger(__name__)


# ------------------ MLE ------------------
def step_function(times: np.ndarray, values: np.ndarray) -> MonotoneStepFunction:
    """Step function taking `values` at the (distinct, sorted) `times`."""
    previous = np.concatenate([[0.0], values[:-1]])
    jumps = values > previous
    return MonotoneStepFunction(jump_locations=times[jumps], post_jump_values=values[jumps])


def mle_values(sample: CurrentStatusSample) -> Tuple[np.ndarray, np.ndarray]:
    """MLE at the distinct observation times (ties merged before the GCM)."""
    if sample is None or sample.size == 0:
        raise EmptySampleError("the MLE needs at least one observation")
    times, counts, delta_sums = sample.merged()
    values = np.clip(cusum_slopes(counts, delta_sums), 0.0, 1.0)
    return times, values


def mle(sample: CurrentStatusSample) -> MonotoneStepFunction:
    times, values = mle_values(sample)
    return step_function(times, values)


def jump_count(f_hat: MonotoneStepFunction, a: float, b: float) -> int:
    """Number of strict increases of f_hat located in [a, b]."""
    if not a < b:
        raise ValueError("jump_count needs a < b")
    loc = f_hat.jump_locations
    return int(np.count_nonzero((loc >= a) & (loc <= b)))


# ------------------ MSLE ------------------
def trapezoid_node_weights(t: np.ndarray) -> np.ndarray:
    """Node weights of the composite trapezoid rule on the points t."""
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def msle(g_tilde: GridFunction, h_tilde: GridFunction, bandwidth: float,
         floor: Optional[float] = DENSITY_FLOOR) -> SmoothEstimate:
    """
    GCM slope of the cusum diagram {(G~(t_k), H~(t_k))} with G~, H~ accumulated
    by trapezoid node weights, so vertex k carries the increment (g~_k, h~_k) * w_k.
    F~(t_k) is the left slope at vertex k: equal to h~/g~ at every grid point
    where that ratio is nondecreasing, its isotonic regression elsewhere.
    """
    if not g_tilde.same_grid(h_tilde):
        raise GridMismatchError("g~ and h~ must be tabulated on the same grid")
    t = g_tilde.points
    g = g_tilde.values if floor is None else np.maximum(g_tilde.values, floor)
    w = trapezoid_node_weights(t)
    dG, dH = g * w, h_tilde.values * w
    if np.any(dG <= 0):
        raise CurrentStatusError("continuous cusum diagram has non-increasing G~; g~ has negative mass")

    F = cusum_slopes(dG, dH)
    pooled = np.count_nonzero(np.abs(F - dH / dG) > 1e-9)
    if pooled:
        logger.debug(f"MSLE monotonized h~/g~ at {pooled} of {t.shape[0]} grid points")
    return SmoothEstimate(F_tilde=g_tilde.with_values(np.clip(F, 0.0, 1.0)), source_bandwidth=bandwidth)


class TwoSampleSmoothing:
    """
    Kernel estimates g~_Nj, h~_Nj of both samples, their mixtures
    g~_N = alpha_N g~_N1 + beta_N g~_N2 (same for h~) and the three MSLEs.

    The weight matrices of the observation times are kept so that new
    indicators can be smoothed without touching g~_Nj (bootstrap reuse).
    """

    def __init__(self, first: CurrentStatusSample, second: Optional[CurrentStatusSample],
                 smoother: KernelSmoother):
        if first is None or first.size == 0:
            raise EmptySampleError("the first sample is empty")
        self.smoother = smoother
        self.first = first
        self.second = second if second is not None and second.size > 0 else None
        self.m = first.size
        self.n = self.second.size if self.second is not None else 0
        self.N = self.m + self.n
        self.alpha_N = self.m / self.N
        self.beta_N = 1.0 - self.alpha_N

        self.weights1 = smoother.weight_matrix(first.times)
        self.weights2 = smoother.weight_matrix(self.second.times) if self.second is not None else None
        self.g1 = self.weights1.sum(axis=1) / self.m
        self.g2 = self.weights2.sum(axis=1) / self.n if self.weights2 is not None else np.zeros_like(self.g1)
        self.g = self.alpha_N * self.g1 + self.beta_N * self.g2

    @property
    def grid(self) -> GridSpec:
        return self.smoother.grid

    def sub_densities(self, deltas1: np.ndarray, deltas2: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        h1 = self.weights1 @ np.asarray(deltas1, dtype=float) / self.m
        if self.weights2 is None:
            h2 = np.zeros_like(h1)
        else:
            h2 = self.weights2 @ np.asarray(deltas2, dtype=float) / self.n
        return h1, h2, self.alpha_N * h1 + self.beta_N * h2

    def fit(self, deltas1: Optional[np.ndarray] = None,
            deltas2: Optional[np.ndarray] = None) -> "SmoothedFit":
        if deltas1 is None:
            deltas1 = self.first.deltas
        if deltas2 is None and self.second is not None:
            deltas2 = self.second.deltas
        h1, h2, h = self.sub_densities(deltas1, deltas2)
        grid, b = self.grid, self.smoother.bandwidth
        as_grid = lambda v: GridFunction(grid=grid, values=v)
        est1 = msle(as_grid(self.g1), as_grid(h1), b)
        est2 = msle(as_grid(self.g2), as_grid(h2), b) if self.second is not None else est1
        est = msle(as_grid(self.g), as_grid(h), b)
        return SmoothedFit(self, h1, h2, h, est1, est2, est)


class SmoothedFit:
    """Sub-densities and MSLEs of one set of indicators on a TwoSampleSmoothing."""

    def __init__(self, smoothing: TwoSampleSmoothing, h1: np.ndarray, h2: np.ndarray, h: np.ndarray,
                 est1: SmoothEstimate, est2: SmoothEstimate, est: SmoothEstimate):
        self.smoothing = smoothing
        self.h1, self.h2, self.h = h1, h2, h
        self.est1, self.est2, self.est = est1, est2, est

    @property
    def g1(self) -> np.ndarray:
        return self.smoothing.g1

    @property
    def g2(self) -> np.ndarray:
        return self.smoothing.g2

    @property
    def g(self) -> np.ndarray:
        return self.smoothing.g


def combined_msle(sample1: CurrentStatusSample, sample2: Optional[CurrentStatusSample],
                  spec: KernelSpec, grid: GridSpec) -> SmoothEstimate:
    """MSLE of the pooled sample from alpha_N g~_N1 + beta_N g~_N2 and the same mixture of h~."""
    smoothing = TwoSampleSmoothing(sample1, sample2, KernelSmoother(spec, grid))
    return smoothing.fit().est


# ------------------ MSLE WITH DENSITY ------------------
def ratio_density(g: np.ndarray, dg: np.ndarray, h: np.ndarray, dh: np.ndarray) -> np.ndarray:
    """Derivative of h/g by the quotient rule: h'/g - g' h / g^2."""
    return dh / g - dg * h / (g * g)


def msle_with_density(sample: CurrentStatusSample, bandwidth_tilde: float, grid: GridSpec,
                      window: Tuple[float, float],
                      boundary_mode: str = "corrected",
                      floor: float = DENSITY_FLOOR) -> SmoothEstimate:
    """
    MSLE of the (pooled) sample with bandwidth b~ together with the density
    f~ = (h~/g~)' from the derivative kernel K'; f~ is tabulated on [a, b] and
    zero elsewhere.
    """
    if sample is None or sample.size == 0:
        raise EmptySampleError("cannot estimate a density from an empty sample")
    a, b = window
    smoother = KernelSmoother(KernelSpec(bandwidth=bandwidth_tilde, boundary_mode=boundary_mode), grid)
    weights = smoother.weight_matrix(sample.times)
    derivs = smoother.derivative_matrix(sample.times)
    deltas = sample.deltas.astype(float)
    n = sample.size
    g, h = weights.sum(axis=1) / n, weights @ deltas / n
    dg, dh = derivs.sum(axis=1) / n, derivs @ deltas / n

    mask = grid.window_mask(a, b)
    if np.any(g[mask] < floor):
        raise CurrentStatusError(f"g~ falls below {floor:g} on [{a}, {b}]; density ratio undefined")

    estimate = msle(GridFunction(grid=grid, values=g), GridFunction(grid=grid, values=h), bandwidth_tilde, floor)
    f = np.zeros_like(g)
    f[mask] = ratio_density(g[mask], dg[mask], h[mask], dh[mask])
    return SmoothEstimate(
        F_tilde=estimate.F_tilde,
        f_tilde=GridFunction(grid=grid, values=f),
        source_bandwidth=bandwidth_tilde,
    )
