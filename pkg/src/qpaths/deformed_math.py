"""Scalar kernel for the q-deformed logarithm and exponential.

Every function accepts python floats or numpy arrays (elementwise). The order
parameter `q` is a plain finite float; `|q - 1| < EPS_Q` selects the
logarithmic branch because the `q != 1` formulas lose all precision as
`1 - q -> 0`.

Zero densities are first-class: log-domain inputs may be `-inf`.
"""

import math
from collections.abc import Callable, Sequence
from typing import TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from qpaths.errors import DegenerateInputError, DomainError, PreconditionError

QOrder: TypeAlias = float

EPS_Q = 1e-9
WEIGHT_SUM_TOL = 1e-12
VANISHING_DENOMINATOR = 1e-12


def is_log_branch(q: QOrder) -> bool:
    """Return True when `q` is treated as exactly 1."""
    return abs(q - 1.0) < EPS_Q


def check_q(q: QOrder) -> float:
    """Validate the order parameter and return it as a float."""
    q = float(q)
    if not math.isfinite(q):
        raise DomainError(f"Order parameter q must be finite, got {q}")
    return q


def q_to_alpha(q: QOrder) -> float:
    return 2.0 * check_q(q) - 1.0


def alpha_to_q(alpha: float) -> float:
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha}")
    return (1.0 + alpha) / 2.0


def _scalar_or_array(value: NDArray[np.float64]) -> float | NDArray[np.float64]:
    return float(value) if value.ndim == 0 else value


def _reject_nan(values: NDArray[np.float64], name: str) -> None:
    if np.isnan(values).any():
        raise DomainError(f"{name} contains NaN")


def ln_q(u: ArrayLike, q: QOrder) -> float | NDArray[np.float64]:
    """Deformed logarithm `(u^(1-q) - 1) / (1 - q)`, `log u` at q = 1."""
    q = check_q(q)
    u_arr = np.asarray(u, dtype=np.float64)
    _reject_nan(u_arr, "u")
    if (u_arr <= 0).any():
        raise DomainError("ln_q is only defined for u > 0")

    log_u = np.log(u_arr)
    if is_log_branch(q):
        return _scalar_or_array(log_u)

    s = 1.0 - q
    return _scalar_or_array(np.expm1(s * log_u) / s)


def exp_q(u: ArrayLike, q: QOrder) -> float | NDArray[np.float64]:
    """Deformed exponential `[1 + (1-q) u]_+^(1/(1-q))`, `exp u` at q = 1.

    The clamp returns exactly 0 for q < 1. For q > 1 the clamped base is
    raised to a negative power, which yields `inf`.
    """
    q = check_q(q)
    u_arr = np.asarray(u, dtype=np.float64)
    _reject_nan(u_arr, "u")
    if is_log_branch(q):
        return _scalar_or_array(np.exp(u_arr))

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _scalar_or_array(np.exp(_log_exp_q_unchecked(u_arr, q)))


def log_exp_q(u: ArrayLike, q: QOrder) -> float | NDArray[np.float64]:
    """Return `log exp_q(u)` without leaving the log domain.

    Active clamps map to `-inf` for q < 1 and to `inf` for q > 1.
    """
    q = check_q(q)
    u_arr = np.asarray(u, dtype=np.float64)
    _reject_nan(u_arr, "u")
    if is_log_branch(q):
        return _scalar_or_array(u_arr.copy())

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _scalar_or_array(_log_exp_q_unchecked(u_arr, q))


def _log_exp_q_unchecked(u: NDArray[np.float64], q: float) -> NDArray[np.float64]:
    s = 1.0 - q
    base_minus_one = s * u
    clamped = base_minus_one <= -1.0
    safe = np.where(clamped, 0.0, base_minus_one)
    out = np.log1p(safe) / s
    clamp_value = -np.inf if s > 0 else np.inf
    return np.where(clamped, clamp_value, out)


def _validate_weights(weights: ArrayLike) -> NDArray[np.float64]:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise PreconditionError("weights must be a non-empty 1-d sequence")
    _reject_nan(w, "weights")
    if (w < 0).any():
        raise PreconditionError("weights must be non-negative")
    total = math.fsum(w.tolist())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise PreconditionError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}")
    return w


def log_power_mean(
    weights: ArrayLike,
    log_values: ArrayLike,
    q: QOrder,
) -> float | NDArray[np.float64]:
    """Log of the weighted power mean, reduced stably in the (1-q)-log domain.

    `log_values` may carry leading batch axes; the last axis pairs with
    `weights`. Entries equal to `-inf` drop out for q < 1 and force `-inf`
    for q > 1 whenever their weight is positive.
    """
    q = check_q(q)
    w = _validate_weights(weights)
    lv = np.asarray(log_values, dtype=np.float64)
    _reject_nan(lv, "log_values")
    if lv.ndim == 0 or lv.shape[-1] != w.size:
        raise PreconditionError(
            f"log_values last axis must have length {w.size}, got shape {lv.shape}"
        )

    return _scalar_or_array(reduce_log_power_mean(w, lv, q))


def reduce_log_power_mean(
    weights: NDArray[np.float64],
    log_values: NDArray[np.float64],
    q: float,
) -> NDArray[np.float64]:
    """Unchecked core of `log_power_mean`; NaN entries propagate instead of raising.

    Batch samplers use this directly so that one bad chain does not abort the
    whole batch.
    """
    active = weights > 0
    w_active = weights[active]
    lv_active = log_values[..., active]
    if w_active.size == 1:
        return lv_active[..., 0].copy()

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if is_log_branch(q):
            reduced = np.sum(w_active * lv_active, axis=-1)
        else:
            s = 1.0 - q
            scaled = np.log(w_active) + s * lv_active
            reduced = logsumexp(scaled, axis=-1) / s
            if s < 0:
                reduced = np.where(np.isneginf(lv_active).any(axis=-1), -np.inf, reduced)

    # A mean of equal values is that value; skip the rounding of the reduction.
    same = np.all(lv_active == lv_active[..., :1], axis=-1)
    return np.asarray(np.where(same, lv_active[..., 0], reduced), dtype=np.float64)


def power_mean(weights: ArrayLike, values: ArrayLike, q: QOrder) -> float | NDArray[np.float64]:
    """Weighted power mean `(sum w u^(1-q))^(1/(1-q))`, geometric at q = 1."""
    u = np.asarray(values, dtype=np.float64)
    _reject_nan(u, "values")
    if (u <= 0).any():
        raise DomainError("power_mean values must be positive")
    w = np.asarray(weights, dtype=np.float64)
    if u.ndim == 0 or u.shape[-1] != w.size:
        raise PreconditionError("weights and values must have equal length")
    return _scalar_or_array(np.exp(np.asarray(log_power_mean(w, np.log(u), q))))


def abstract_mean(
    weights: ArrayLike,
    values: ArrayLike,
    h: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    h_inv: Callable[[NDArray[np.float64]], NDArray[np.float64]],
) -> float:
    """Quasi-arithmetic mean `h^-1(sum w h(u))` for a monotone generator `h`."""
    w = _validate_weights(weights)
    u = np.asarray(values, dtype=np.float64)
    if u.shape != w.shape:
        raise PreconditionError("weights and values must have equal length")
    return float(h_inv(np.sum(w * h(u))))


def alpha_representation(
    q: QOrder,
    a: float = 1.0,
    b: float = 0.0,
) -> tuple[
    Callable[[NDArray[np.float64]], NDArray[np.float64]],
    Callable[[NDArray[np.float64]], NDArray[np.float64]],
]:
    """Return the generator pair `h(u) = a u^(1-q) + b` and its inverse.

    At q = 1 the pair is `(log, exp)`; `a = -b = 1/(1-q)` gives `ln_q`.
    """
    q = check_q(q)
    if is_log_branch(q):
        return np.log, np.exp
    if a == 0:
        raise DomainError("alpha representation needs a != 0")
    s = 1.0 - q

    def h(u: NDArray[np.float64]) -> NDArray[np.float64]:
        return a * np.power(u, s) + b

    def h_inv(v: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.power((v - b) / a, 1.0 / s)

    return h, h_inv


def verify_q_identities(xs: Sequence[float], q: QOrder, tol: float) -> bool:
    """Check the exp_q sum and product identities on `xs`.

    Sum:     exp_q(sum x_n) = prod exp_q(x_n / (1 + (1-q) sum_{i<n} x_i))
    Product: prod exp_q(x_n) = exp_q(sum x_n prod_{i<n} (1 + (1-q) x_i))
    """
    q = check_q(q)
    x = np.asarray(xs, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise PreconditionError("xs must be a non-empty 1-d sequence")
    _reject_nan(x, "xs")
    s = 0.0 if is_log_branch(q) else 1.0 - q

    def _checked_exp_q(u: float) -> float:
        if s != 0.0 and 1.0 + s * u <= 0.0:
            raise PreconditionError(f"exp_q clamp is active at argument {u!r}; choose xs in a safe range")
        return float(exp_q(u, q))

    prefix_sums = np.concatenate(([0.0], np.cumsum(x)[:-1]))
    sum_denominators = 1.0 + s * prefix_sums
    if (np.abs(sum_denominators) < VANISHING_DENOMINATOR).any():
        raise DegenerateInputError("1 + (1-q) * partial sum vanishes for these xs")

    sum_lhs = _checked_exp_q(float(np.sum(x)))
    sum_rhs = math.prod(_checked_exp_q(float(xn / d)) for xn, d in zip(x, sum_denominators, strict=True))

    prefix_products = np.concatenate(([1.0], np.cumprod(1.0 + s * x)[:-1]))
    prod_lhs = math.prod(_checked_exp_q(float(xn)) for xn in x)
    prod_rhs = _checked_exp_q(float(np.sum(x * prefix_products)))

    return _relative_error(sum_lhs, sum_rhs) <= tol and _relative_error(prod_lhs, prod_rhs) <= tol


def _relative_error(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0.0 else abs(lhs - rhs) / scale
