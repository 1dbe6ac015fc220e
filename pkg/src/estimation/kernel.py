# src/estimation/kernel.py
"""
Triweight kernel, boundary-corrected kernels, kernel (sub-)density estimates
and trapezoidal integration on uniform grids.

Near the edges of [0, M] the kernel is replaced by alpha*K(u) + beta*u*K(u),
with (alpha, beta) chosen so that the kernel truncated to the part of its
support inside the window has zeroth moment 1 and first moment 0.
"""
import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..config.config import GAUSS_LEGENDRE_NODES
from ..errors import BandwidthError, EmptySampleError, GridMismatchError
from .schema import CurrentStatusSample, GridFunction, GridSpec, KernelMoments, KernelSpec

logger = logging.getLogger(__name__)

TRIWEIGHT_CONSTANT = 35.0 / 32.0

# (35/32)(1 - u^2)^3 as a polynomial in u
TRIWEIGHT = Polynomial([1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]) * TRIWEIGHT_CONSTANT

_MIN_MOMENT_DET = 1e-12


# ------------------ KERNEL EVALUATION ------------------
def kernel_eval(u):
    """Triweight kernel (35/32)(1-u^2)^3 on [-1, 1], zero outside."""
    u = np.asarray(u, dtype=float)
    w = np.clip(1.0 - u * u, 0.0, None)
    return TRIWEIGHT_CONSTANT * w ** 3


def kernel_derivative(u):
    """Closed-form derivative K'(u) = -(105/16) u (1-u^2)^2 on [-1, 1]."""
    u = np.asarray(u, dtype=float)
    w = np.clip(1.0 - u * u, 0.0, None)
    return -(105.0 / 16.0) * u * w ** 2


@lru_cache(maxsize=None)
def _truncated_moment_polys() -> Tuple[Polynomial, Polynomial, Polynomial]:
    u = Polynomial([0.0, 1.0])
    return tuple((u ** j * TRIWEIGHT).integ(lbnd=-1.0) for j in range(3))


def truncated_moments(rho):
    """mu_j(rho) = int_{-1}^{rho} u^j K(u) du for j = 0, 1, 2."""
    rho = np.clip(np.asarray(rho, dtype=float), -1.0, 1.0)
    m0, m1, m2 = _truncated_moment_polys()
    return m0(rho), m1(rho), m2(rho)


def boundary_coefficients(rho):
    """
    Coefficients (alpha, beta) of alpha*K(u) + beta*u*K(u) with unit zeroth
    and zero first moment over [-1, rho]. rho = 1 gives (1, 0).
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > 1):
        raise BandwidthError(f"support fraction rho must lie in [0, 1], got {rho}")
    mu0, mu1, mu2 = truncated_moments(rho)
    det = mu0 * mu2 - mu1 * mu1
    if np.any(det <= _MIN_MOMENT_DET):
        raise BandwidthError("boundary moment system is singular; bandwidth too large for the domain")
    alpha = mu2 / det
    beta = -mu1 / det
    full = rho >= 1.0
    alpha = np.where(full, 1.0, alpha)
    beta = np.where(full, 0.0, beta)
    return alpha, beta


def boundary_kernel_eval(u, rho):
    """Left-edge boundary kernel with support [-1, rho]."""
    u = np.asarray(u, dtype=float)
    alpha, beta = boundary_coefficients(rho)
    k = kernel_eval(u)
    return np.where(u <= rho, (alpha + beta * u) * k, 0.0)


@lru_cache(maxsize=None)
def _squared_moment_polys() -> Tuple[Polynomial, Polynomial, Polynomial]:
    u = Polynomial([0.0, 1.0])
    return tuple((u ** j * TRIWEIGHT ** 2).integ(lbnd=-1.0) for j in range(3))


def boundary_squared_mass(rho):
    """
    int_{-1}^{rho} (alpha + beta u)^2 K(u)^2 du for the boundary kernel with
    support fraction rho; rho = 1 gives int K^2. The mirrored right-edge
    kernel has the same mass.
    """
    rho = np.asarray(rho, dtype=float)
    alpha, beta = boundary_coefficients(rho)
    s0, s1, s2 = (p(rho) for p in _squared_moment_polys())
    return alpha * alpha * s0 + 2.0 * alpha * beta * s1 + beta * beta * s2


# ------------------ SMOOTHER ------------------
class KernelSmoother:
    """
    Kernel weights K_b(t_k - T_i) on a grid over [0, M], boundary corrected
    within b of either edge. The weight matrix for a set of observation
    times is built once and reused (the bootstrap only changes indicators).
    """

    def __init__(self, spec: KernelSpec, grid: GridSpec):
        self.spec = spec
        self.grid = grid
        b = spec.bandwidth
        M = grid.stop - grid.start
        t = grid.points - grid.start

        self.alpha = np.ones_like(t)
        self.beta = np.zeros_like(t)
        # support fraction of the corrected kernel at each grid point; 1 in the interior
        self.rho = np.ones_like(t)
        if spec.boundary_mode == "corrected":
            left = t < b
            right = (M - t) < b
            if np.any(left & right):
                raise BandwidthError(
                    f"bandwidth {b:.4g} exceeds half the observation window [0, {M:g}]"
                )
            if np.any(left):
                self.rho[left] = np.clip(t[left] / b, 0.0, 1.0)
                a_l, b_l = boundary_coefficients(self.rho[left])
                self.alpha[left], self.beta[left] = a_l, b_l
            if np.any(right):
                # mirror image: support [-rho, 1], odd coefficient changes sign
                self.rho[right] = np.clip((M - t[right]) / b, 0.0, 1.0)
                a_r, b_r = boundary_coefficients(self.rho[right])
                self.alpha[right], self.beta[right] = a_r, -b_r
        logger.debug(f"KernelSmoother ready: b={b:.5f}, {grid.n_points} grid points")

    @property
    def bandwidth(self) -> float:
        return self.spec.bandwidth

    def squared_mass(self, int_K2: float) -> np.ndarray:
        """int K_t(u)^2 du of the kernel applied at each grid point (int_K2 in the interior)."""
        mass = np.full(self.rho.shape, float(int_K2))
        edge = self.rho < 1.0
        if np.any(edge):
            mass[edge] = boundary_squared_mass(self.rho[edge])
        return mass

    def _scaled(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        return (self.grid.points[:, None] - times[None, :]) / self.spec.bandwidth

    def weight_matrix(self, times) -> np.ndarray:
        """W[k, i] = K_b(t_k - T_i) with the boundary coefficients of t_k."""
        u = self._scaled(times)
        k = kernel_eval(u)
        return (self.alpha[:, None] * k + self.beta[:, None] * u * k) / self.spec.bandwidth

    def derivative_matrix(self, times) -> np.ndarray:
        """d/dt of K_b(t_k - T_i), boundary coefficients held fixed."""
        u = self._scaled(times)
        k = kernel_eval(u)
        dk = kernel_derivative(u)
        b = self.spec.bandwidth
        return (self.alpha[:, None] * dk + self.beta[:, None] * (k + u * dk)) / (b * b)

    def estimate(self, sample: CurrentStatusSample,
                 weights: Optional[np.ndarray] = None) -> Tuple[GridFunction, GridFunction]:
        if weights is None:
            weights = self.weight_matrix(sample.times)
        n = sample.size
        g = weights.sum(axis=1) / n
        h = weights @ sample.deltas.astype(float) / n
        return GridFunction(grid=self.grid, values=g), GridFunction(grid=self.grid, values=h)


def estimate_densities(sample: CurrentStatusSample, spec: KernelSpec,
                       grid: GridSpec) -> Tuple[GridFunction, GridFunction]:
    """Kernel estimates g~(t) = mean K_b(t - T_i) and h~(t) = mean Delta_i K_b(t - T_i)."""
    if sample is None or sample.size == 0:
        raise EmptySampleError("cannot smooth an empty sample")
    return KernelSmoother(spec, grid).estimate(sample)


# ------------------ INTEGRATION ------------------
def integrate_grid(f: GridFunction, lower: float, upper: float) -> float:
    """Composite trapezoid of f over [lower, upper]; partial end cells use interpolated values."""
    t = f.points
    tol = 1e-12 * max(1.0, abs(t[-1]))
    if lower < t[0] - tol or upper > t[-1] + tol or lower > upper:
        raise GridMismatchError(
            f"integration range [{lower}, {upper}] outside grid [{t[0]}, {t[-1]}]"
        )
    lower, upper = max(lower, t[0]), min(upper, t[-1])
    inner = (t > lower) & (t < upper)
    x = np.concatenate([[lower], t[inner], [upper]])
    y = np.concatenate([[f(lower)], f.values[inner], [f(upper)]])
    return float(trapezoid(y, x))


def cumulative(f: GridFunction) -> GridFunction:
    """F(t_k) = integral of f from the grid start to t_k (trapezoid)."""
    return f.with_values(cumulative_trapezoid(f.values, f.points, initial=0.0))


@lru_cache(maxsize=64)
def window_weights(grid: GridSpec, a: float, b: float) -> np.ndarray:
    """Weights w with w @ values == integrate_grid(values, a, b)."""
    t = grid.points
    n = t.shape[0]
    tol = 1e-12 * max(1.0, abs(t[-1]))
    if a < t[0] - tol or b > t[-1] + tol or a > b:
        raise GridMismatchError(f"window [{a}, {b}] outside grid [{t[0]}, {t[-1]}]")
    a, b = max(a, t[0]), min(b, t[-1])
    inner = np.nonzero((t > a) & (t < b))[0]
    x = np.concatenate([[a], t[inner], [b]])
    dx = np.diff(x)
    tw = np.zeros_like(x)
    tw[:-1] += 0.5 * dx
    tw[1:] += 0.5 * dx

    w = np.zeros(n)
    w[inner] += tw[1:-1]
    for end, weight in ((a, tw[0]), (b, tw[-1])):
        j = int(np.clip(np.searchsorted(t, end, side="right") - 1, 0, n - 2))
        theta = (end - t[j]) / (t[j + 1] - t[j])
        w[j] += weight * (1.0 - theta)
        w[j + 1] += weight * theta
    w.setflags(write=False)
    return w


def window_integral(values: np.ndarray, grid: GridSpec, a: float, b: float) -> float:
    """Trapezoid over [a, b] of an integrand tabulated on the grid."""
    return float(window_weights(grid, a, b) @ np.asarray(values, dtype=float))


# ------------------ MOMENTS ------------------
def _gauss_legendre(lo: float, hi: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(nodes)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def kernel_autocorrelation(v, nodes: int = GAUSS_LEGENDRE_NODES):
    """rho(v) = int K(u + v) K(u) du (exact: the integrand is polynomial on its support)."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    out = np.zeros_like(v)
    for i, vi in enumerate(v):
        lo, hi = max(-1.0, -1.0 - vi), min(1.0, 1.0 - vi)
        if hi <= lo:
            continue
        x, w = _gauss_legendre(lo, hi, nodes)
        out[i] = np.sum(w * kernel_eval(x + vi) * kernel_eval(x))
    return out


def _moments_at(nodes: int) -> Tuple[float, float, float]:
    x, w = _gauss_legendre(-1.0, 1.0, nodes)
    k = kernel_eval(x)
    int_K2 = float(np.sum(w * k * k))
    int_u2K = float(np.sum(w * x * x * k))
    # rho is even and piecewise polynomial on [0, 2]
    v, wv = _gauss_legendre(0.0, 2.0, nodes)
    rho = kernel_autocorrelation(v, nodes=nodes)
    return int_K2, int_u2K, float(4.0 * np.sum(wv * rho * rho))


def kernel_moments(spec: Optional[KernelSpec] = None,
                   quad_tol: float = 1e-12,
                   nodes_per_unit: int = GAUSS_LEGENDRE_NODES) -> KernelMoments:
    """int K^2, int u^2 K and sigma_K^2 = 2 int rho(v)^2 dv by Gauss-Legendre quadrature."""
    if spec is not None and spec.kernel_id != "triweight":
        raise ValueError(f"unsupported kernel '{spec.kernel_id}'")
    coarse = _moments_at(2 * nodes_per_unit)
    fine = _moments_at(4 * nodes_per_unit)
    error = max(abs(c - f) for c, f in zip(coarse, fine))
    if error > quad_tol:
        logger.warning(f"Kernel moment quadrature changed by {error:.2e} on refinement")
    int_K2, int_u2K, sigma_K2 = fine
    return KernelMoments(int_K2=int_K2, int_u2K=int_u2K, sigma_K2=sigma_K2)
