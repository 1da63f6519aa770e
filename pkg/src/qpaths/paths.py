"""q-path intermediate densities, their q-exponential-family form and closure checks.

Intermediate densities are never normalized here: the path density at beta is

    [(1 - beta) pi_0^(1-q) + beta pi_T^(1-q)]^(1/(1-q))

evaluated in the log domain, with the geometric mixture at q = 1.
"""

import logging
import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.special import logsumexp

from qpaths.deformed_math import (
    QOrder,
    check_q,
    is_log_branch,
    log_exp_q,
    reduce_log_power_mean,
)
from qpaths.densities import make_gaussian, make_student_t, q_from_nu
from qpaths.entity.density import GaussianSpec, StudentTSpec, as_points
from qpaths.entity.path import PartitionEstimate, QPath, Schedule
from qpaths.errors import (
    CapabilityError,
    DegenerateInputError,
    DomainError,
    GradientUndefinedError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

FamilyName = Literal["gaussian-geometric", "student-t-q"]
FAMILY_Q_TOL = 1e-12


def check_beta(beta: float) -> float:
    beta = float(beta)
    if math.isnan(beta):
        raise DomainError("beta is NaN")
    if not 0.0 <= beta <= 1.0:
        raise PreconditionError(f"beta must lie in [0, 1], got {beta}")
    return beta


def _scalar_or_array(values: NDArray[np.float64]) -> float | NDArray[np.float64]:
    return float(values) if values.ndim == 0 else values


def mix_log_densities(
    log_base: NDArray[np.float64],
    log_target: NDArray[np.float64],
    beta: float,
    q: float,
) -> NDArray[np.float64]:
    """Log q-path density from endpoint log-densities; NaN propagates.

    `beta` in {0, 1} returns the matching endpoint values untouched.
    """
    weights = np.array([1.0 - beta, beta])
    return reduce_log_power_mean(weights, np.stack([log_base, log_target], axis=-1), q)


def endpoint_log_densities(path: QPath, points: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Base and target log-densities at an `(n, dim)` batch."""
    l0 = np.asarray(path.base.log_density(points), dtype=np.float64).reshape(-1)
    l1 = np.asarray(path.target.log_density(points), dtype=np.float64).reshape(-1)
    return l0, l1


def log_density_at(path: QPath, beta: float, z: ArrayLike) -> float | NDArray[np.float64]:
    """Unnormalized log-density of the path at `beta`; batched over `z`."""
    beta = check_beta(beta)
    points, batch_shape = as_points(z, path.dim)
    if np.isnan(points).any():
        raise DomainError("z contains NaN")
    if beta == 0.0:
        return path.base.log_prob(z)
    if beta == 1.0:
        return path.target.log_prob(z)

    l0, l1 = endpoint_log_densities(path, points)
    if np.isnan(l0).any() or np.isnan(l1).any():
        raise DomainError("An endpoint log-density returned NaN")
    return _scalar_or_array(mix_log_densities(l0, l1, beta, path.q).reshape(batch_shape))


def responsibilities(
    log_base: NDArray[np.float64],
    log_target: NDArray[np.float64],
    beta: float,
    q: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Two-term softmax of `(1-beta) pi_0^(1-q)` and `beta pi_T^(1-q)`."""
    n = log_base.shape[0]
    if is_log_branch(q) or beta in (0.0, 1.0):
        return np.full(n, 1.0 - beta), np.full(n, beta)
    s = 1.0 - q
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = math.log1p(-beta) + s * log_base
        b = math.log(beta) + s * log_target
        total = np.logaddexp(a, b)
        return np.exp(a - total), np.exp(b - total)


def grad_log_density_batch(path: QPath, beta: float, points: NDArray[np.float64]) -> tuple[
    NDArray[np.float64], NDArray[np.float64]
]:
    """Return `(log_density, gradient)` on an `(n, dim)` batch without raising.

    Rows with zero density get a NaN gradient; callers decide what that means.
    """
    l0, l1 = endpoint_log_densities(path, points)
    log_density = mix_log_densities(l0, l1, beta, path.q)
    r0, r1 = responsibilities(l0, l1, beta, path.q)

    grad = np.zeros_like(points)
    with np.errstate(invalid="ignore", over="ignore"):
        if beta < 1.0:
            grad += np.where((r0 > 0)[:, None], r0[:, None] * path.base.gradient(points), 0.0)
        if beta > 0.0:
            grad += np.where((r1 > 0)[:, None], r1[:, None] * path.target.gradient(points), 0.0)
    grad[~np.isfinite(log_density)] = np.nan
    return log_density, grad


def grad_log_density_at(path: QPath, beta: float, z: ArrayLike) -> NDArray[np.float64]:
    beta = check_beta(beta)
    points, batch_shape = as_points(z, path.dim)
    if np.isnan(points).any():
        raise DomainError("z contains NaN")
    log_density, grad = grad_log_density_batch(path, beta, points)
    if np.isnan(log_density).any():
        raise DomainError("An endpoint log-density returned NaN")
    if np.isneginf(log_density).any():
        raise GradientUndefinedError("The path density is zero at z; its log-gradient is undefined")
    return grad.reshape(*batch_shape, path.dim)


def _sufficient_statistic_from_logs(
    log_base: NDArray[np.float64], log_target: NDArray[np.float64], q: float
) -> NDArray[np.float64]:
    diff = log_target - log_base
    if is_log_branch(q):
        return diff
    s = 1.0 - q
    with np.errstate(over="ignore"):
        return np.expm1(s * diff) / s


def _base_positive_logs(path: QPath, z: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64], tuple[int, ...]]:
    points, batch_shape = as_points(z, path.dim)
    l0, l1 = endpoint_log_densities(path, points)
    if np.isnan(l0).any() or np.isnan(l1).any():
        raise DomainError("An endpoint log-density returned NaN")
    if not np.isfinite(l0).all():
        raise DomainError("The base density must be positive at z")
    return l0, l1, batch_shape


def sufficient_statistic(path: QPath, z: ArrayLike) -> float | NDArray[np.float64]:
    """`ln_q(pi_T / pi_0)` evaluated from the log-density difference."""
    l0, l1, batch_shape = _base_positive_logs(path, z)
    return _scalar_or_array(_sufficient_statistic_from_logs(l0, l1, path.q).reshape(batch_shape))


def q_exp_form_check(path: QPath, beta: float, z: ArrayLike) -> float | NDArray[np.float64]:
    """`log[pi_0(z) exp_q(beta phi_q(z))]`, the q-exponential-family form of the path."""
    beta = check_beta(beta)
    l0, l1, batch_shape = _base_positive_logs(path, z)
    phi = _sufficient_statistic_from_logs(l0, l1, path.q)
    value = l0 + np.asarray(log_exp_q(beta * phi, path.q))
    return _scalar_or_array(value.reshape(batch_shape))


def lnq_mixture_log_density(path: QPath, beta: float, z: ArrayLike) -> float | NDArray[np.float64]:
    """`log exp_q((1-beta) ln_q pi_0 + beta ln_q pi_T)`, the deformed log-mixture form."""
    beta = check_beta(beta)
    points, batch_shape = as_points(z, path.dim)
    l0, l1 = endpoint_log_densities(path, points)
    if is_log_branch(path.q):
        value = (1.0 - beta) * l0 + beta * l1
    else:
        s = 1.0 - path.q
        with np.errstate(over="ignore"):
            mixed = (1.0 - beta) * np.expm1(s * l0) / s + beta * np.expm1(s * l1) / s
        value = np.asarray(log_exp_q(mixed, path.q))
    return _scalar_or_array(value.reshape(batch_shape))


def estimate_partition(path: QPath, beta: float, n: int, rng: np.random.Generator) -> PartitionEstimate:
    """Monte Carlo estimate of the normalizer of the path density at `beta`.

    Uses `Z_beta = Z_0 E_{pi_0}[exp_q(beta phi_q(z))]`; the standard error is the
    delta-method error of the log estimate.
    """
    beta = check_beta(beta)
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    base = path.base
    if base.log_normalizer is None or not base.is_samplable:
        raise CapabilityError(f"Base density '{base.name}' must be normalized and exactly samplable")

    points = base.sample(rng, n).reshape(n, path.dim)
    l0, l1 = endpoint_log_densities(path, points)
    phi = _sufficient_statistic_from_logs(l0, l1, path.q)
    log_terms = np.asarray(log_exp_q(beta * phi, path.q)).reshape(-1)

    log_mean = float(logsumexp(log_terms) - math.log(n))
    if n > 1 and np.isfinite(log_mean):
        ratios = np.exp(log_terms - log_mean)
        std_error = float(np.std(ratios, ddof=1) / math.sqrt(n))
    else:
        std_error = 0.0
    logger.debug("Partition estimate at beta=%s q=%s from %d samples: %s", beta, path.q, n, log_mean)
    return PartitionEstimate(log_z=base.log_normalizer + log_mean, std_error=std_error, n_samples=n)


def reparameterize_theta_to_beta(theta: float, psi_q: float, q: QOrder) -> tuple[float, float]:
    """Map natural parameter and q-free energy to `(beta, log Z)`."""
    q = check_q(q)
    if is_log_branch(q):
        return float(theta), float(psi_q)
    denominator = 1.0 + (1.0 - q) * (-psi_q)
    if denominator <= 0.0:
        raise DegenerateInputError(
            f"1 + (1-q)(-psi_q) = {denominator!r} is not positive for q={q}, psi_q={psi_q}"
        )
    return theta / denominator, -float(log_exp_q(-psi_q, q))


def reparameterize_beta_to_theta(beta: float, log_z: float, q: QOrder) -> tuple[float, float]:
    """Inverse of `reparameterize_theta_to_beta`."""
    q = check_q(q)
    if is_log_branch(q):
        return float(beta), float(log_z)
    s = 1.0 - q
    psi_q = -math.expm1(-s * log_z) / s
    return beta * math.exp(-s * log_z), psi_q


def linear_schedule(T: int) -> Schedule:  # noqa: N803
    if isinstance(T, bool) or not isinstance(T, int | np.integer) or T < 1:
        raise PreconditionError(f"T must be a positive integer, got {T!r}")
    return Schedule(np.arange(T + 1, dtype=np.float64) / T)


def _gaussian_member(spec0: GaussianSpec, spec1: GaussianSpec, beta: float) -> GaussianSpec:
    p0 = linalg.inv(spec0.variance)
    p1 = linalg.inv(spec1.variance)
    precision = (1.0 - beta) * p0 + beta * p1
    shift = (1.0 - beta) * p0 @ spec0.mean + beta * p1 @ spec1.mean
    variance = linalg.inv(precision)
    return GaussianSpec(linalg.solve(precision, shift, assume_a="pos"), 0.5 * (variance + variance.T))


def _student_t_member(spec0: StudentTSpec, spec1: StudentTSpec, beta: float, q: float) -> StudentTSpec:
    nu = spec0.dof
    s = 1.0 - q
    a_total = np.zeros_like(spec0.scale_matrix)
    b_total = np.zeros_like(spec0.mean)
    c_total = 0.0
    for weight, spec in ((1.0 - beta, spec0), (beta, spec1)):
        # pi^(1-q) = k (1 + (x-mu)^T P (x-mu)) with P = S^-1 / nu
        log_c = float(make_student_t(spec).log_density(spec.mean[None, :])[0])
        a_i = weight * math.exp(s * log_c)
        p_i = linalg.inv(spec.scale_matrix) / nu
        a_total += a_i * p_i
        b_total += a_i * p_i @ spec.mean
        c_total += a_i * (1.0 + spec.mean @ p_i @ spec.mean)
    mean = linalg.solve(a_total, b_total, assume_a="pos")
    k = c_total - float(b_total @ mean)
    scale = k * linalg.inv(a_total) / nu
    return StudentTSpec(mean, 0.5 * (scale + scale.T), nu)


def interpolated_member_check(
    family: FamilyName,
    spec0: GaussianSpec | StudentTSpec,
    spec1: GaussianSpec | StudentTSpec,
    beta: float,
    grid: Sequence[float] | ArrayLike,
    q: QOrder | None = None,
) -> float:
    """Max deviation between the path density and its closed-form family member.

    The member carries the interpolated natural parameters; one multiplicative
    constant is fitted at the middle grid point before taking the maximum.
    """
    beta = check_beta(beta)
    if family == "gaussian-geometric":
        if not (isinstance(spec0, GaussianSpec) and isinstance(spec1, GaussianSpec)):
            raise PreconditionError("gaussian-geometric needs two GaussianSpec endpoints")
        expected_q = 1.0
        base, target = make_gaussian(spec0), make_gaussian(spec1)
    elif family == "student-t-q":
        if not (isinstance(spec0, StudentTSpec) and isinstance(spec1, StudentTSpec)):
            raise PreconditionError("student-t-q needs two StudentTSpec endpoints")
        if spec0.dof != spec1.dof:
            raise PreconditionError(f"Student-t endpoints must share dof, got {spec0.dof} and {spec1.dof}")
        expected_q = q_from_nu(spec0.dof, spec0.dim)
        base, target = make_student_t(spec0), make_student_t(spec1)
    else:
        raise PreconditionError(f"Unknown family '{family}'")

    if q is not None and abs(check_q(q) - expected_q) > FAMILY_Q_TOL:
        raise PreconditionError(f"family {family} closes only for q={expected_q}, got q={q}")

    if beta == 0.0:
        member_spec = spec0
    elif beta == 1.0:
        member_spec = spec1
    elif isinstance(spec0, GaussianSpec) and isinstance(spec1, GaussianSpec):
        member_spec = _gaussian_member(spec0, spec1, beta)
    else:
        assert isinstance(spec0, StudentTSpec) and isinstance(spec1, StudentTSpec)
        member_spec = _student_t_member(spec0, spec1, beta, expected_q)

    member = make_gaussian(member_spec) if isinstance(member_spec, GaussianSpec) else make_student_t(member_spec)
    path = QPath(base=base, target=target, q=expected_q)
    points, _ = as_points(grid, path.dim)
    deviation = np.asarray(log_density_at(path, beta, points)).reshape(-1) - member.log_density(points)
    offset = deviation[deviation.size // 2]
    return float(np.max(np.abs(deviation - offset)))
