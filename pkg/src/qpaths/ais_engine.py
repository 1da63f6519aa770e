"""Annealed importance sampling over q-paths, BDMC bounds and an exact discrete oracle."""

import itertools
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from qpaths.deformed_math import QOrder, check_q
from qpaths.entity.path import QPath, Schedule
from qpaths.entity.results import AisResult, BdmcResult
from qpaths.entity.sampling import HmcConfig, RngStream
from qpaths.errors import (
    CapabilityError,
    DomainError,
    KernelNotInvariantError,
    NumericalFailureError,
    PreconditionError,
)
from qpaths.paths import check_beta, endpoint_log_densities, grad_log_density_batch, mix_log_densities
from qpaths.sampler import hmc_step_batch

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 256
INVALID_CHAIN_BUDGET = 0.01
KERNEL_INVARIANCE_TOL = 1e-12
MAX_DISCRETE_STATES = 8
MAX_DISCRETE_TEMPERATURES = 6


def log_mean_exp(xs: ArrayLike) -> float:
    """`log(mean(exp(xs)))` with max-shift stability; exact on constant input."""
    x = np.asarray(xs, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise PreconditionError("log_mean_exp needs at least one value")
    if np.isnan(x).any():
        raise DomainError("log_mean_exp input contains NaN")
    if (x == x[0]).all():
        return float(x[0])
    return float(logsumexp(x) - math.log(x.size))


def effective_sample_size(log_weights: ArrayLike) -> float:
    """`(sum w)^2 / sum w^2` from log-weights."""
    lw = np.asarray(log_weights, dtype=np.float64).reshape(-1)
    if lw.size == 0:
        raise PreconditionError("effective_sample_size needs at least one weight")
    if np.isnan(lw).any():
        raise DomainError("log-weights contain NaN")
    if np.isneginf(lw).all():
        raise DomainError("ESS is undefined when every weight is zero")
    ess = math.exp(2.0 * logsumexp(lw) - logsumexp(2.0 * lw))
    return min(float(lw.size), ess)


@dataclass
class _BlockOutcome:
    log_weights: NDArray[np.float64]
    accepted: NDArray[np.float64]
    increments: NDArray[np.float64] | None


def _run_block(
    path: QPath,
    betas: NDArray[np.float64],
    cfg: HmcConfig,
    size: int,
    rng: np.random.Generator,
    record_increments: bool,
) -> _BlockOutcome:
    T = betas.size - 1  # noqa: N806
    z = path.base.sample(rng, size).reshape(size, path.dim)
    log_weights = np.zeros(size)
    accepted = np.zeros(T)
    increments = np.empty((size, T)) if record_increments else None

    for t in range(1, T + 1):
        l0, l1 = endpoint_log_densities(path, z)
        with np.errstate(invalid="ignore"):
            step = mix_log_densities(l0, l1, betas[t], path.q) - mix_log_densities(l0, l1, betas[t - 1], path.q)
        log_weights += step
        if increments is not None:
            increments[:, t - 1] = step

        if cfg.transitions_per_temperature:
            log_density, gradient = grad_log_density_batch(path, betas[t], z)
            for _ in range(cfg.transitions_per_temperature):
                z, log_density, gradient, ok = hmc_step_batch(path, betas[t], z, log_density, gradient, cfg, rng)
                accepted[t - 1] += np.count_nonzero(ok)
    return _BlockOutcome(log_weights, accepted, increments)


def run_ais(
    path: QPath,
    schedule: Schedule,
    cfg: HmcConfig,
    n_chains: int,
    rng: RngStream,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    max_workers: int | None = 1,
    record_increments: bool = False,
    invalid_budget: float = INVALID_CHAIN_BUDGET,
) -> AisResult:
    """Estimate `log Z_T / Z_0` along `path` with `n_chains` AIS chains.

    Chains run in blocks of `block_size`; block `b` draws every random number
    from `rng.generator(b)`, so the result does not depend on `max_workers`.
    Chains whose log-weight turns NaN are dropped; more than
    `invalid_budget * n_chains` of them raises `NumericalFailureError`.
    """
    if n_chains < 1:
        raise PreconditionError(f"n_chains must be positive, got {n_chains}")
    if block_size < 1:
        raise PreconditionError(f"block_size must be positive, got {block_size}")
    base = path.base
    if base.log_normalizer is None or not base.is_samplable:
        raise CapabilityError(f"AIS needs a normalized, exactly samplable base; '{base.name}' is not")

    betas = schedule.betas
    sizes = [min(block_size, n_chains - start) for start in range(0, n_chains, block_size)]
    logger.info(
        "AIS start: q=%s T=%d chains=%d blocks=%d seed=%d stream=%d",
        path.q, schedule.T, n_chains, len(sizes), rng.seed, rng.stream_id,
    )

    def run(block: int) -> _BlockOutcome:
        return _run_block(path, betas, cfg, sizes[block], rng.generator(block), record_increments)

    if max_workers == 1 or len(sizes) == 1:
        outcomes = [run(block) for block in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(run, range(len(sizes))))

    log_weights = np.concatenate([o.log_weights for o in outcomes])
    invalid = np.isnan(log_weights)
    n_invalid = int(np.count_nonzero(invalid))
    if n_invalid > invalid_budget * n_chains:
        raise NumericalFailureError(n_invalid, n_chains, invalid_budget)
    if n_invalid:
        logger.warning("Excluded %d of %d chains with NaN log-increments", n_invalid, n_chains)

    valid = log_weights[~invalid]
    transitions = cfg.transitions_per_temperature * n_chains
    acceptance = (
        np.sum([o.accepted for o in outcomes], axis=0) / transitions if transitions else np.full(schedule.T, np.nan)
    )
    increments = None
    if record_increments:
        increments = np.concatenate([o.increments for o in outcomes if o.increments is not None])[~invalid]

    result = AisResult(
        log_weights=valid,
        log_ratio_estimate=log_mean_exp(valid),
        ess=effective_sample_size(valid),
        seed=rng,
        n_chains=n_chains,
        n_invalid=n_invalid,
        acceptance_rates=acceptance,
        per_step_log_increments=increments,
    )
    logger.info(
        "AIS done: q=%s T=%d log_ratio=%.6f ess=%.1f invalid=%d",
        path.q, schedule.T, result.log_ratio_estimate, result.ess, n_invalid,
    )
    return result


def run_bdmc(
    path: QPath,
    schedule: Schedule,
    cfg: HmcConfig,
    n_chains: int,
    rng: RngStream,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    max_workers: int | None = 1,
) -> BdmcResult:
    """Stochastic lower and upper bounds on `log Z_T / Z_0`.

    The lower bound is forward AIS; the upper bound negates AIS run from the
    target along the reversed path and reflected schedule.
    """
    target = path.target
    if target.log_normalizer is None or not target.is_samplable:
        raise CapabilityError(f"BDMC needs a normalized, exactly samplable target; '{target.name}' is not")

    forward = run_ais(path, schedule, cfg, n_chains, rng.child(0), block_size=block_size, max_workers=max_workers)
    reverse = run_ais(
        path.reversed(),
        schedule.reflected(),
        cfg,
        n_chains,
        rng.child(1),
        block_size=block_size,
        max_workers=max_workers,
    )
    return BdmcResult(
        lower=forward.log_ratio_estimate,
        upper=-reverse.log_ratio_estimate,
        forward=forward,
        reverse=reverse,
    )


def _as_state_vector(values: ArrayLike, name: str) -> NDArray[np.float64]:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise PreconditionError(f"{name} must be a non-empty vector")
    if not np.isfinite(v).all() or (v < 0).any() or not (v > 0).any():
        raise PreconditionError(f"{name} must be finite, non-negative and not all zero")
    return v


def discrete_qpath(unnorm_base: ArrayLike, unnorm_target: ArrayLike, q: QOrder, beta: float) -> NDArray[np.float64]:
    """Unnormalized q-path over a finite state space."""
    base = _as_state_vector(unnorm_base, "unnorm_base")
    target = _as_state_vector(unnorm_target, "unnorm_target")
    if base.shape != target.shape:
        raise PreconditionError("base and target vectors must have equal length")
    with np.errstate(divide="ignore"):
        log_mix = mix_log_densities(np.log(base), np.log(target), check_beta(beta), check_q(q))
    return np.exp(log_mix)


def enumerate_discrete_ais(
    n_states: int,
    unnorm_base: ArrayLike,
    unnorm_target: ArrayLike,
    q: QOrder,
    schedule: Schedule,
    kernels: Sequence[ArrayLike],
) -> float:
    """Exact expected AIS weight by summing over every state sequence.

    `kernels[t - 1]` is applied after the weight update at temperature t and
    must leave the normalized discrete q-path at `beta_t` invariant. The
    result equals `sum(unnorm_target) / sum(unnorm_base)` for any valid input.
    """
    base = _as_state_vector(unnorm_base, "unnorm_base")
    target = _as_state_vector(unnorm_target, "unnorm_target")
    if not 1 <= n_states <= MAX_DISCRETE_STATES or base.size != n_states or target.size != n_states:
        raise PreconditionError(f"Need 1 <= n_states <= {MAX_DISCRETE_STATES} matching both vectors")
    T = schedule.T  # noqa: N806
    if T > MAX_DISCRETE_TEMPERATURES:
        raise PreconditionError(f"Enumeration supports at most {MAX_DISCRETE_TEMPERATURES} temperatures, got {T}")
    if len(kernels) != T:
        raise PreconditionError(f"Expected {T} kernels, got {len(kernels)}")

    densities = [discrete_qpath(base, target, q, beta) for beta in schedule.betas]
    matrices = []
    for t, kernel in enumerate(kernels, start=1):
        k = np.asarray(kernel, dtype=np.float64)
        if k.shape != (n_states, n_states) or (k < 0).any():
            raise PreconditionError(f"Kernel {t} must be a non-negative {n_states}x{n_states} matrix")
        if np.abs(k.sum(axis=1) - 1.0).max() > KERNEL_INVARIANCE_TOL:
            raise PreconditionError(f"Kernel {t} is not row-stochastic")
        stationary = densities[t] / math.fsum(densities[t].tolist())
        error = float(np.abs(stationary @ k - stationary).max())
        if error > KERNEL_INVARIANCE_TOL:
            raise KernelNotInvariantError(t, error)
        matrices.append(k)

    start = base / math.fsum(base.tolist())
    terms = []
    # z_T never enters a weight, so sequences stop at z_{T-1}.
    for states in itertools.product(range(n_states), repeat=T):
        prob = start[states[0]]
        for t in range(1, T):
            prob *= matrices[t - 1][states[t - 1], states[t]]
        if prob == 0.0:
            continue
        weight = 1.0
        for t in range(1, T + 1):
            z = states[t - 1]
            weight *= densities[t][z] / densities[t - 1][z]
        terms.append(weight * prob)
    return math.fsum(terms)
