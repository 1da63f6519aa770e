"""Fixture-free property checks runnable from the CLI.

Each check is deterministic (fixed seeds) and returns a `SelfTestCheck`; a
check that raises is reported as failed with the exception message.
"""

import logging
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from qpaths.ais_engine import discrete_qpath, enumerate_discrete_ais
from qpaths.deformed_math import (
    abstract_mean,
    alpha_representation,
    exp_q,
    is_log_branch,
    ln_q,
    power_mean,
    verify_q_identities,
)
from qpaths.densities import make_gaussian
from qpaths.entity.density import GaussianSpec, StudentTSpec
from qpaths.entity.path import QPath, Schedule
from qpaths.paths import interpolated_member_check, log_density_at, q_exp_form_check
from qpaths.sampler import discrete_metropolis_kernel

logger = logging.getLogger(__name__)

SELFTEST_SEED = 20_201_206
Q_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)
INVERSE_Q_GRID = (-1.0, 0.0, 0.5, 0.9, 1.0, 1.1, 2.0, 3.0)
ORACLE_Q_GRID = (0.0, 0.5, 1.0, 2.0)


class SelfTestCheck(NamedTuple):
    name: str
    passed: bool
    detail: str


def _inverse_pair() -> tuple[bool, str]:
    rng = np.random.default_rng(SELFTEST_SEED)
    u = np.concatenate(([1e-6, 1e6], np.exp(rng.uniform(np.log(1e-6), np.log(1e6), size=200))))
    worst = 0.0
    for q in INVERSE_Q_GRID:
        log_u = np.asarray(ln_q(u, q))
        if not is_log_branch(q) and not (1.0 + (1.0 - q) * log_u > 0).all():
            return False, f"clamp active at q={q}"
        # exp_q loses digits where u^(1-q) = 1 + (1-q) ln_q(u) is tiny.
        conditioning = np.maximum(1.0, np.abs(log_u) * u ** (q - 1.0))
        error = np.abs(np.asarray(exp_q(log_u, q)) - u) / u / conditioning
        worst = max(worst, float(np.max(error)))
    return worst <= 1e-12, f"max conditioned relative error {worst:.2e}"


def _q_continuity() -> tuple[bool, str]:
    u = np.geomspace(1e-3, 1e3, 101)
    log_u = np.log(u)
    worst = 0.0
    for delta in (1e-7, -1e-7):
        deviation = np.abs(np.asarray(ln_q(u, 1.0 + delta)) - log_u) / (1.0 + log_u**2)
        worst = max(worst, float(np.max(deviation)))
    return worst <= 1e-6, f"max scaled deviation from log {worst:.2e}"


def _sum_product_identities() -> tuple[bool, str]:
    rng = np.random.default_rng(SELFTEST_SEED + 1)
    failures = 0
    for q in Q_GRID:
        for _ in range(20):
            xs = rng.uniform(-0.1, 0.1, size=int(rng.integers(1, 6)))
            failures += not verify_q_identities(xs.tolist(), q, 1e-10)
    return failures == 0, f"{failures} failing draws"


def _homogeneity_and_affine_invariance() -> tuple[bool, str]:
    rng = np.random.default_rng(SELFTEST_SEED + 2)
    worst = 0.0
    for q in Q_GRID:
        for _ in range(20):
            w = rng.dirichlet(np.ones(3))
            u = rng.uniform(0.1, 10.0, size=3)
            mean = float(power_mean(w, u, q))
            scaled = float(power_mean(w, 3.7 * u, q))
            worst = max(worst, abs(scaled - 3.7 * mean) / (3.7 * mean))
            a = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
            h, h_inv = alpha_representation(q, a=a, b=float(rng.normal()))
            worst = max(worst, abs(abstract_mean(w, u, h, h_inv) - mean) / mean)
    return worst <= 1e-12, f"max relative error {worst:.2e}"


def _q_exponential_form() -> tuple[bool, str]:
    base = make_gaussian(GaussianSpec([-4.0], [3.0]))
    target = make_gaussian(GaussianSpec([4.0], [1.0]))
    z = np.linspace(-10.0, 10.0, 101)
    worst = 0.0
    for q in (0.0, 0.5, 0.9, 1.0, 2.0):
        path = QPath(base=base, target=target, q=q)
        for beta in (0.25, 0.5, 0.75):
            direct = np.asarray(log_density_at(path, beta, z))
            form = np.asarray(q_exp_form_check(path, beta, z))
            finite = np.isfinite(direct) & np.isfinite(form)
            if not np.array_equal(np.isfinite(direct), np.isfinite(form)):
                return False, f"support mismatch at q={q}, beta={beta}"
            scale = np.maximum(1.0, np.abs(direct[finite]))
            worst = max(worst, float(np.max(np.abs(direct[finite] - form[finite]) / scale)))
    return worst <= 1e-10, f"max scaled error {worst:.2e}"


def _family_closure() -> tuple[bool, str]:
    grid = np.linspace(-10.0, 10.0, 101)
    g0, g1 = GaussianSpec([-4.0], [3.0]), GaussianSpec([4.0], [1.0])
    t0, t1 = StudentTSpec([-4.0], [[3.0]], 1.0), StudentTSpec([4.0], [[1.0]], 1.0)
    worst = 0.0
    for beta in (0.0, 0.25, 0.5, 0.75, 1.0):
        worst = max(worst, interpolated_member_check("gaussian-geometric", g0, g1, beta, grid))
        worst = max(worst, interpolated_member_check("student-t-q", t0, t1, beta, grid, q=2.0))
    return worst <= 1e-10, f"max log-density deviation {worst:.2e}"


def _discrete_oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(SELFTEST_SEED + 3)
    worst = 0.0
    for _ in range(20):
        n_states = int(rng.integers(1, 6))
        T = int(rng.integers(1, 5))  # noqa: N806
        q = float(rng.choice(ORACLE_Q_GRID))
        base = rng.uniform(0.1, 2.0, size=n_states)
        target = rng.uniform(0.1, 2.0, size=n_states)
        schedule = Schedule(np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, size=T - 1)), [1.0])))
        kernels = [discrete_metropolis_kernel(discrete_qpath(base, target, q, beta)) for beta in schedule.betas[1:]]
        expected = target.sum() / base.sum()
        value = enumerate_discrete_ais(n_states, base, target, q, schedule, kernels)
        worst = max(worst, abs(value - expected) / expected)
    return worst <= 1e-12, f"max relative error {worst:.2e}"


CHECKS: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("inverse-pair", _inverse_pair),
    ("q-continuity", _q_continuity),
    ("sum-product-identities", _sum_product_identities),
    ("homogeneity-affine-invariance", _homogeneity_and_affine_invariance),
    ("q-exponential-form", _q_exponential_form),
    ("family-closure", _family_closure),
    ("discrete-unbiasedness", _discrete_oracle),
)


def selftest() -> list[SelfTestCheck]:
    results = []
    for name, check in CHECKS:
        try:
            passed, detail = check()
        except Exception as exc:  # noqa: BLE001
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        if passed:
            logger.info("selftest %s: ok (%s)", name, detail)
        else:
            logger.warning("selftest %s: FAILED (%s)", name, detail)
        results.append(SelfTestCheck(name, passed, detail))
    return results
