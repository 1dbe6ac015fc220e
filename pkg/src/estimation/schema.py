# src/estimation/schema.py
from typing import Annotated, Literal, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PositiveFloat,
    field_validator,
    model_validator,
)

from ..errors import EmptySampleError, GridMismatchError


def _frozen_float_array(value) -> np.ndarray:
    arr = np.array(value, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _frozen_int_array(value) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.size and not np.all(np.mod(arr, 1) == 0):
        raise ValueError("expected integer values")
    arr = arr.astype(np.int64)
    arr.setflags(write=False)
    return arr


FloatArray = Annotated[np.ndarray, BeforeValidator(_frozen_float_array)]
IntArray = Annotated[np.ndarray, BeforeValidator(_frozen_int_array)]

SampleLabel = Literal["sample-1", "sample-2", "combined"]


class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ------------------ KERNEL ------------------
class KernelSpec(BaseModel):
    """Kernel choice, bandwidth (time units of T) and boundary treatment."""
    model_config = ConfigDict(frozen=True)

    kernel_id: Literal["triweight"] = "triweight"
    bandwidth: PositiveFloat = Field(description="Bandwidth b; support is [-b, b]")
    boundary_mode: Literal["corrected", "uncorrected"] = "corrected"


class KernelMoments(BaseModel):
    model_config = ConfigDict(frozen=True)

    int_K2: PositiveFloat = Field(description="integral of K(u)^2")
    int_u2K: PositiveFloat = Field(description="integral of u^2 K(u)")
    sigma_K2: PositiveFloat = Field(description="2 * integral of (K*K)(v)^2")


# ------------------ GRIDS ------------------
class GridSpec(BaseModel):
    """Uniform grid start, start + step, ..., stop with n_points points."""
    model_config = ConfigDict(frozen=True)

    start: float = 0.0
    stop: float
    n_points: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.stop > self.start:
            raise ValueError("grid stop must exceed start")
        return self

    @classmethod
    def for_bandwidth(cls, M: float, bandwidth: float, fraction: float = 1.0 / 20.0,
                      max_divisor: int = 2000) -> "GridSpec":
        step = min(bandwidth * fraction, M / max_divisor)
        n_intervals = int(np.ceil(M / step - 1e-9))
        return cls(start=0.0, stop=M, n_points=n_intervals + 1)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    def window_mask(self, a: float, b: float) -> np.ndarray:
        t = self.points
        tol = 1e-12 * max(1.0, abs(self.stop))
        return (t >= a - tol) & (t <= b + tol)


class GridFunction(_ArrayModel):
    """Values tabulated on a uniform grid; evaluated by linear interpolation."""

    grid: GridSpec
    values: FloatArray

    @model_validator(mode="after")
    def _check_values(self):
        if self.values.shape[0] != self.grid.n_points:
            raise GridMismatchError(
                f"{self.values.shape[0]} values for a grid of {self.grid.n_points} points"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function values must be finite")
        return self

    @property
    def grid_start(self) -> float:
        return self.grid.start

    @property
    def grid_step(self) -> float:
        return self.grid.step

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    def __call__(self, t):
        return np.interp(t, self.grid.points, self.values)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(grid=self.grid, values=values)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.grid == other.grid


# ------------------ DATA ------------------
class CurrentStatusSample(_ArrayModel):
    """Pairs (T_i, Delta_i), stored sorted by observation time."""

    times: FloatArray
    deltas: IntArray
    label: SampleLabel = "combined"

    @model_validator(mode="before")
    @classmethod
    def _sort_by_time(cls, data):
        if isinstance(data, dict) and "times" in data and "deltas" in data:
            times = np.asarray(data["times"], dtype=float).reshape(-1)
            deltas = np.asarray(data["deltas"]).reshape(-1)
            if times.shape != deltas.shape:
                raise ValueError("times and deltas must have the same length")
            order = np.argsort(times, kind="stable")
            data = {**data, "times": times[order], "deltas": deltas[order]}
        return data

    @field_validator("times")
    @classmethod
    def _check_times(cls, v: np.ndarray) -> np.ndarray:
        if v.size == 0:
            raise EmptySampleError("a current status sample needs at least one observation")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("observation times must be finite and nonnegative")
        return v

    @field_validator("deltas")
    @classmethod
    def _check_deltas(cls, v: np.ndarray) -> np.ndarray:
        if np.any((v != 0) & (v != 1)):
            raise ValueError("status indicators must be 0 or 1")
        return v

    @property
    def size(self) -> int:
        return int(self.times.shape[0])

    def with_deltas(self, deltas) -> "CurrentStatusSample":
        """Same observation times, new indicators (times are already sorted)."""
        return CurrentStatusSample(times=self.times, deltas=deltas, label=self.label)

    def merged(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Distinct times with their multiplicities and indicator sums."""
        unique, start, counts = np.unique(self.times, return_index=True, return_counts=True)
        delta_sums = np.add.reduceat(self.deltas, start) if unique.size else np.array([], dtype=np.int64)
        return unique, counts, delta_sums

    @classmethod
    def pooled(cls, first: "CurrentStatusSample", second: Optional["CurrentStatusSample"]) -> "CurrentStatusSample":
        if second is None:
            return cls(times=first.times, deltas=first.deltas, label="combined")
        return cls(
            times=np.concatenate([first.times, second.times]),
            deltas=np.concatenate([first.deltas, second.deltas]),
            label="combined",
        )


# ------------------ ESTIMATES ------------------
class MonotoneStepFunction(_ArrayModel):
    """Right-continuous nondecreasing step function, 0 before the first jump."""

    jump_locations: FloatArray
    post_jump_values: FloatArray

    @model_validator(mode="after")
    def _check_shape(self):
        if self.jump_locations.shape != self.post_jump_values.shape:
            raise ValueError("one value per jump location is required")
        if np.any(np.diff(self.jump_locations) <= 0):
            raise ValueError("jump locations must be strictly increasing")
        if np.any(np.diff(self.post_jump_values) < 0):
            raise ValueError("step function values must be nondecreasing")
        if self.post_jump_values.size and (self.post_jump_values[0] < 0 or self.post_jump_values[-1] > 1):
            raise ValueError("step function values must lie in [0, 1]")
        return self

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_locations, t, side="right") - 1
        padded = np.concatenate([[0.0], self.post_jump_values])
        return padded[idx + 1]


class SmoothEstimate(_ArrayModel):
    """MSLE on the t-grid, optionally with its density."""

    F_tilde: GridFunction
    f_tilde: Optional[GridFunction] = None
    source_bandwidth: PositiveFloat

    def __call__(self, t):
        return np.clip(self.F_tilde(t), 0.0, 1.0)


# ------------------ CUSUM ------------------
class CusumDiagram(_ArrayModel):
    """Plane points (x_k, y_k), x strictly increasing from x_0."""

    x: FloatArray
    y: FloatArray

    @model_validator(mode="after")
    def _check_points(self):
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same length")
        if self.x.size < 2:
            raise ValueError("a cusum diagram needs at least two points")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("cusum x-coordinates must be strictly increasing")
        return self

    @classmethod
    def from_increments(cls, dx, dy, x0: float = 0.0, y0: float = 0.0) -> "CusumDiagram":
        x = np.concatenate([[x0], x0 + np.cumsum(dx)])
        y = np.concatenate([[y0], y0 + np.cumsum(dy)])
        return cls(x=x, y=y)


class ConvexMinorant(_ArrayModel):
    vertices_x: FloatArray
    vertices_y: FloatArray
    slopes: FloatArray

    @model_validator(mode="after")
    def _check_segments(self):
        if self.slopes.shape[0] != self.vertices_x.shape[0] - 1:
            raise ValueError("one slope per minorant segment is required")
        return self

    def __call__(self, x):
        return np.interp(x, self.vertices_x, self.vertices_y)
