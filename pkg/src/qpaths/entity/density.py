from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qpaths.errors import CapabilityError, ConstructionError, PreconditionError

LogDensityFn: TypeAlias = Callable[[NDArray[np.float64]], Any]
GradientFn: TypeAlias = Callable[[NDArray[np.float64]], NDArray[np.float64]]
SamplerFn: TypeAlias = Callable[..., NDArray[np.float64]]

DEFAULT_FD_REL_STEP = 1e-5


def as_points(z: ArrayLike, dim: int) -> tuple[NDArray[np.float64], tuple[int, ...]]:
    """Return `z` as an `(n, dim)` array together with its batch shape.

    A trailing axis of length `dim` is the point axis. For `dim == 1` a bare
    scalar is one point and a 1-d array of any other length is a batch of
    scalar points, which keeps grids in one dimension convenient.
    """
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim == 0:
        if dim != 1:
            raise PreconditionError(f"A scalar point only fits dimension 1, not {dim}")
        return arr.reshape(1, 1), ()
    if arr.shape[-1] == dim:
        batch_shape = arr.shape[:-1]
    elif dim == 1:
        batch_shape = arr.shape
    else:
        raise PreconditionError(f"Point array of shape {arr.shape} does not match dimension {dim}")
    return arr.reshape(-1, dim), batch_shape


def finite_difference_gradient(
    log_density: LogDensityFn,
    z: ArrayLike,
    dim: int,
    rel_step: float = DEFAULT_FD_REL_STEP,
) -> NDArray[np.float64]:
    """Central finite differences with step `rel_step * (1 + |z_i|)` per coordinate."""
    points, batch_shape = as_points(z, dim)
    grads = np.empty_like(points)
    for i in range(dim):
        h = rel_step * (1.0 + np.abs(points[:, i]))
        forward = points.copy()
        backward = points.copy()
        forward[:, i] += h
        backward[:, i] -= h
        f_plus = np.asarray(log_density(forward), dtype=np.float64).reshape(-1)
        f_minus = np.asarray(log_density(backward), dtype=np.float64).reshape(-1)
        grads[:, i] = (f_plus - f_minus) / (2.0 * h)
    return grads.reshape(*batch_shape, dim)


@dataclass(frozen=True)
class DensityHandle:
    """An unnormalized (or normalized) density on R^dim.

    `log_density` maps a point array `(..., dim)` to log-densities `(...)`
    that are finite or `-inf`. `log_normalizer` is `log Z` of the handle
    when known (0 for a normalized pdf) and `None` otherwise.
    `exact_sampler(rng, size=None)` returns one point `(dim,)` or a batch
    `(size, dim)`.
    """

    dim: int
    log_density: LogDensityFn
    grad_log_density: GradientFn | None = None
    exact_sampler: SamplerFn | None = None
    log_normalizer: float | None = None
    name: str = "density"

    def __post_init__(self) -> None:
        if not isinstance(self.dim, int | np.integer) or self.dim < 1:
            raise ConstructionError(f"Density dimension must be a positive integer, got {self.dim!r}")

    @property
    def is_normalized(self) -> bool:
        return self.log_normalizer is not None

    @property
    def is_samplable(self) -> bool:
        return self.exact_sampler is not None

    def log_prob(self, z: ArrayLike) -> Any:
        """Evaluate the log-density with the batch shape of `z`."""
        points, batch_shape = as_points(z, self.dim)
        values = np.asarray(self.log_density(points), dtype=np.float64).reshape(batch_shape)
        return float(values) if values.ndim == 0 else values

    def gradient(self, z: ArrayLike) -> NDArray[np.float64]:
        """Analytic gradient when available, central finite differences otherwise."""
        points, batch_shape = as_points(z, self.dim)
        if self.grad_log_density is None:
            grads = finite_difference_gradient(self.log_density, points, self.dim)
        else:
            grads = np.asarray(self.grad_log_density(points), dtype=np.float64)
        return grads.reshape(*batch_shape, self.dim)

    def sample(self, rng: np.random.Generator, size: int | None = None) -> NDArray[np.float64]:
        if self.exact_sampler is None:
            raise CapabilityError(f"Density '{self.name}' has no exact sampler")
        return np.asarray(self.exact_sampler(rng, size), dtype=np.float64)


def _as_vector(values: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise ConstructionError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ConstructionError(f"{name} must be finite")
    return arr


def _as_matrix(values: ArrayLike, dim: int, name: str) -> NDArray[np.float64]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim <= 1:
        diagonal = np.broadcast_to(np.atleast_1d(arr), (dim,))
        if (diagonal <= 0).any():
            raise ConstructionError(f"{name} diagonal must be positive")
        arr = np.diag(diagonal)
    if arr.shape != (dim, dim):
        raise ConstructionError(f"{name} must have shape ({dim}, {dim}), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ConstructionError(f"{name} must be finite")
    if not np.allclose(arr, arr.T, rtol=1e-12, atol=0.0):
        raise ConstructionError(f"{name} must be symmetric")
    return arr


@dataclass(frozen=True)
class GaussianSpec:
    """Mean vector and variance (covariance) matrix; a vector means a diagonal."""

    mean: NDArray[np.float64]
    variance: NDArray[np.float64]

    def __init__(self, mean: ArrayLike, variance: ArrayLike):
        mean_arr = _as_vector(mean, "mean")
        object.__setattr__(self, "mean", mean_arr)
        object.__setattr__(self, "variance", _as_matrix(variance, mean_arr.size, "variance"))

    @classmethod
    def from_std(cls, mean: ArrayLike, std: ArrayLike) -> "GaussianSpec":
        std_arr = np.atleast_1d(np.asarray(std, dtype=np.float64))
        if (std_arr <= 0).any():
            raise ConstructionError("std must be positive")
        return cls(mean, std_arr**2)

    @property
    def dim(self) -> int:
        return int(self.mean.size)


@dataclass(frozen=True)
class StudentTSpec:
    """Student-t with the quadratic-form matrix `scale_matrix` and `dof` > 0.

    `scale_matrix` is the matrix inside `1 + (x-mu)^T S^-1 (x-mu) / nu`,
    not the covariance.
    """

    mean: NDArray[np.float64]
    scale_matrix: NDArray[np.float64]
    dof: float

    def __init__(self, mean: ArrayLike, scale_matrix: ArrayLike, dof: float):
        mean_arr = _as_vector(mean, "mean")
        dof = float(dof)
        if not np.isfinite(dof) or dof <= 0:
            raise ConstructionError(f"Student-t dof must be positive and finite, got {dof}")
        object.__setattr__(self, "mean", mean_arr)
        object.__setattr__(self, "scale_matrix", _as_matrix(scale_matrix, mean_arr.size, "scale_matrix"))
        object.__setattr__(self, "dof", dof)

    @property
    def dim(self) -> int:
        return int(self.mean.size)
