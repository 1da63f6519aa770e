"""HMC transition kernel for q-path intermediate densities.

Kernels are vectorised over chains: positions have shape `(n, dim)` and every
chain draws its momentum and acceptance uniform from the same generator in
a fixed order, so a batch is reproducible from its seed alone.
"""

import logging
from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qpaths.entity.density import as_points
from qpaths.entity.path import QPath
from qpaths.entity.sampling import HmcConfig, LeapfrogResult, RngStream
from qpaths.errors import PreconditionError
from qpaths.paths import check_beta, grad_log_density_batch

logger = logging.getLogger(__name__)

GradFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def _rows_finite(values: NDArray[np.float64]) -> NDArray[np.bool_]:
    return np.isfinite(values).reshape(values.shape[0], -1).all(axis=-1)


def leapfrog(
    grad_fn: GradFn,
    z: ArrayLike,
    momentum: ArrayLike,
    step_size: float,
    n_steps: int,
    mass: float = 1.0,
    initial_gradient: NDArray[np.float64] | None = None,
) -> LeapfrogResult:
    """Volume-preserving, time-reversible leapfrog integration of `n_steps` steps.

    `grad_fn` returns the log-density gradient at a batch of positions. A row
    whose position, momentum or gradient stops being finite is reported as
    diverged; its values are meaningless afterwards.
    """
    if n_steps < 1:
        raise PreconditionError(f"n_steps must be at least 1, got {n_steps}")
    position = np.array(z, dtype=np.float64)
    p = np.array(momentum, dtype=np.float64)
    if position.shape != p.shape:
        raise PreconditionError(f"position {position.shape} and momentum {p.shape} must share a shape")
    single = position.ndim <= 1
    position = position.reshape(1, -1) if single else position.reshape(position.shape[0], -1)
    p = p.reshape(position.shape)

    with np.errstate(invalid="ignore", over="ignore"):
        grad = np.asarray(grad_fn(position) if initial_gradient is None else initial_gradient, dtype=np.float64)
        grad = grad.reshape(position.shape)
        diverged = ~_rows_finite(grad)
        p = p + 0.5 * step_size * grad
        for step in range(n_steps):
            position = position + step_size * p / mass
            grad = np.asarray(grad_fn(position), dtype=np.float64).reshape(position.shape)
            if step < n_steps - 1:
                p = p + step_size * grad
            diverged |= ~(_rows_finite(position) & _rows_finite(grad))
        p = p + 0.5 * step_size * grad
        diverged |= ~_rows_finite(p)

    if single:
        return LeapfrogResult(position[0], p[0], diverged[0], grad[0])
    return LeapfrogResult(position, p, diverged, grad)


def _as_generator(rng: np.random.Generator | RngStream) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def hmc_step_batch(
    path: QPath,
    beta: float,
    points: NDArray[np.float64],
    log_density: NDArray[np.float64],
    gradient: NDArray[np.float64],
    cfg: HmcConfig,
    rng: np.random.Generator,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
    """One Metropolis-corrected HMC transition for an `(n, dim)` batch.

    Takes and returns the cached log-density and gradient at the positions so
    consecutive transitions do not re-evaluate them. Rows that start at zero
    density or diverge keep their position and count as rejected.
    """
    n = points.shape[0]
    momentum = rng.standard_normal(points.shape) * np.sqrt(cfg.mass)
    log_u = np.log(rng.random(n))

    cache: dict[str, NDArray[np.float64]] = {}

    def grad_fn(x: NDArray[np.float64]) -> NDArray[np.float64]:
        cache["log_density"], grad = grad_log_density_batch(path, beta, x)
        return grad

    result = leapfrog(
        grad_fn, points, momentum, cfg.step_size, cfg.n_leapfrog, cfg.mass, initial_gradient=gradient
    )
    proposed_log_density = cache["log_density"]

    with np.errstate(invalid="ignore", over="ignore"):
        h_current = -log_density + 0.5 * np.sum(momentum**2, axis=-1) / cfg.mass
        h_proposed = -proposed_log_density + 0.5 * np.sum(result.momentum**2, axis=-1) / cfg.mass
        log_accept = h_current - h_proposed
    usable = np.isfinite(log_density) & ~result.diverged & np.isfinite(proposed_log_density)
    accepted = usable & (log_u < log_accept)

    n_diverged = int(np.count_nonzero(result.diverged))
    if n_diverged:
        logger.debug("%d of %d trajectories diverged at beta=%s", n_diverged, n, beta)

    new_points = np.where(accepted[:, None], result.position, points)
    new_log_density = np.where(accepted, proposed_log_density, log_density)
    new_gradient = np.where(accepted[:, None], result.gradient, gradient)
    return new_points, new_log_density, new_gradient, accepted


def hmc_transition(
    path: QPath,
    beta: float,
    z: ArrayLike,
    cfg: HmcConfig,
    rng: np.random.Generator | RngStream,
) -> tuple[NDArray[np.float64], NDArray[np.bool_] | bool]:
    """One HMC step leaving the normalized path density at `beta` invariant.

    A single point `(dim,)` returns `(point, accepted)`; a batch `(n, dim)`
    returns `(points, accepted_mask)`. Passing an `RngStream` draws from its
    base generator, so repeated calls with the same stream repeat the draws.
    """
    beta = check_beta(beta)
    points, batch_shape = as_points(z, path.dim)
    log_density, gradient = grad_log_density_batch(path, beta, points)
    if not np.isfinite(log_density).all():
        raise PreconditionError("HMC needs a positive path density at every starting point")

    new_points, _, _, accepted = hmc_step_batch(
        path, beta, points, log_density, gradient, cfg, _as_generator(rng)
    )
    if batch_shape == ():
        return new_points[0], bool(accepted[0])
    return new_points.reshape(*batch_shape, path.dim), accepted.reshape(batch_shape)


def discrete_metropolis_kernel(unnorm_target: ArrayLike) -> NDArray[np.float64]:
    """Uniform-proposal Metropolis kernel for a finite state space.

    Satisfies detailed balance with the normalized `unnorm_target`.
    """
    p = np.asarray(unnorm_target, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise PreconditionError("unnorm_target must be a non-empty vector")
    if not np.isfinite(p).all() or (p < 0).any() or not (p > 0).any():
        raise PreconditionError("unnorm_target must be finite, non-negative and not all zero")
    n = p.size
    if n == 1:
        return np.ones((1, 1))

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(p[:, None] > 0, np.minimum(1.0, p[None, :] / p[:, None]), 1.0)
    kernel = ratio / (n - 1)
    np.fill_diagonal(kernel, 0.0)
    np.fill_diagonal(kernel, 1.0 - kernel.sum(axis=1))
    return kernel
