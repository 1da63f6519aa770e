"""Density handles for the Gaussian and Student-t endpoints and for user callables.

Every handle evaluates point batches: `log_density(points)` takes `(n, dim)`
and returns `(n,)`. Gaussian and Student-t handles are normalized pdfs, so
their `log_normalizer` is 0.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.special import gammaln

from qpaths.entity.density import (
    DensityHandle,
    GaussianSpec,
    GradientFn,
    LogDensityFn,
    SamplerFn,
    StudentTSpec,
    as_points,
)
from qpaths.errors import ConstructionError, DomainError

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


def _cholesky(matrix: NDArray[np.float64], name: str) -> NDArray[np.float64]:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as exc:
        raise ConstructionError(f"{name} must be positive definite") from exc


def _whiten(points: NDArray[np.float64], mean: NDArray[np.float64], chol: NDArray[np.float64]) -> NDArray[np.float64]:
    """Solve `L y = (x - mean)` for every row; returns `(n, dim)`."""
    centered = points - mean
    return linalg.solve_triangular(chol, centered.T, lower=True).T


def make_gaussian(spec: GaussianSpec) -> DensityHandle:
    dim = spec.dim
    mean = spec.mean.copy()
    chol = _cholesky(spec.variance, "Gaussian variance")
    log_norm_const = -0.5 * dim * LOG_2PI - float(np.sum(np.log(np.diag(chol))))

    def log_density(z: ArrayLike) -> NDArray[np.float64]:
        points, batch_shape = as_points(z, dim)
        white = _whiten(points, mean, chol)
        return (log_norm_const - 0.5 * np.sum(white**2, axis=-1)).reshape(batch_shape)

    def grad_log_density(z: ArrayLike) -> NDArray[np.float64]:
        points, batch_shape = as_points(z, dim)
        solved = linalg.cho_solve((chol, True), (points - mean).T).T
        return (-solved).reshape(*batch_shape, dim)

    def sampler(rng: np.random.Generator, size: int | None = None) -> NDArray[np.float64]:
        eps = rng.standard_normal(dim if size is None else (size, dim))
        return mean + eps @ chol.T

    return DensityHandle(
        dim=dim,
        log_density=log_density,
        grad_log_density=grad_log_density,
        exact_sampler=sampler,
        log_normalizer=0.0,
        name=f"gaussian(mean={mean.tolist()})",
    )


def make_student_t(spec: StudentTSpec) -> DensityHandle:
    """Multivariate Student-t with pdf

        Gamma((nu+d)/2) / (Gamma(nu/2) (nu pi)^(d/2) |S|^(1/2))
            * (1 + (x-mu)^T S^-1 (x-mu) / nu)^(-(nu+d)/2)

    Sampling uses `mu + L eps / sqrt(chi2_nu / nu)`.
    """
    dim = spec.dim
    nu = spec.dof
    mean = spec.mean.copy()
    chol = _cholesky(spec.scale_matrix, "Student-t scale matrix")
    half_power = 0.5 * (nu + dim)
    log_norm_const = (
        gammaln(half_power)
        - gammaln(0.5 * nu)
        - 0.5 * dim * math.log(nu * math.pi)
        - float(np.sum(np.log(np.diag(chol))))
    )

    def log_density(z: ArrayLike) -> NDArray[np.float64]:
        points, batch_shape = as_points(z, dim)
        maha = np.sum(_whiten(points, mean, chol) ** 2, axis=-1)
        return (log_norm_const - half_power * np.log1p(maha / nu)).reshape(batch_shape)

    def grad_log_density(z: ArrayLike) -> NDArray[np.float64]:
        points, batch_shape = as_points(z, dim)
        centered = points - mean
        maha = np.sum(_whiten(points, mean, chol) ** 2, axis=-1)
        solved = linalg.cho_solve((chol, True), centered.T).T
        scale = (nu + dim) / (nu + maha)
        return (-scale[:, None] * solved).reshape(*batch_shape, dim)

    def sampler(rng: np.random.Generator, size: int | None = None) -> NDArray[np.float64]:
        n = 1 if size is None else size
        eps = rng.standard_normal((n, dim))
        chi2 = rng.chisquare(nu, size=n)
        draws = mean + (eps @ chol.T) / np.sqrt(chi2 / nu)[:, None]
        return draws[0] if size is None else draws

    return DensityHandle(
        dim=dim,
        log_density=log_density,
        grad_log_density=grad_log_density,
        exact_sampler=sampler,
        log_normalizer=0.0,
        name=f"student_t(mean={mean.tolist()}, dof={nu:g})",
    )


def make_density(
    dim: int,
    log_density: LogDensityFn,
    grad_log_density: GradientFn | None = None,
    exact_sampler: SamplerFn | None = None,
    log_normalizer: float | None = None,
    name: str = "custom",
) -> DensityHandle:
    """Wrap user callables; a missing gradient falls back to finite differences."""
    if not callable(log_density):
        raise ConstructionError("log_density must be callable")
    if grad_log_density is None:
        logger.debug("Density '%s' has no analytic gradient; using finite differences", name)
    return DensityHandle(
        dim=dim,
        log_density=log_density,
        grad_log_density=grad_log_density,
        exact_sampler=exact_sampler,
        log_normalizer=log_normalizer,
        name=name,
    )


def q_from_nu(nu: float, dim: int) -> float:
    """Order of the q-exponential family holding a Student-t with `nu` dof."""
    nu = float(nu)
    if not nu > 0 or not math.isfinite(nu):
        raise DomainError(f"Student-t dof must be positive and finite, got {nu}")
    _check_dim(dim)
    return (nu + dim + 2.0) / (nu + dim)


def nu_from_q(q: float, dim: int) -> float:
    """Inverse of `q_from_nu`; `q` must lie in the open interval (1, (d+2)/d)."""
    q = float(q)
    _check_dim(dim)
    upper = (dim + 2.0) / dim
    if not 1.0 < q < upper:
        raise DomainError(f"q={q} gives no positive dof in dimension {dim}; need 1 < q < {upper:g}")
    return (dim - dim * q + 2.0) / (q - 1.0)


def _check_dim(dim: int) -> None:
    if isinstance(dim, bool) or not isinstance(dim, int | np.integer) or dim < 1:
        raise DomainError(f"dim must be a positive integer, got {dim!r}")
