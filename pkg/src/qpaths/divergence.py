"""Alpha-divergence and extended KL between unnormalized 1-d measures.

Integrals are composite Gauss-Legendre sums over a fixed `QuadratureGrid`.
Log-density callables take a 1-d array of grid points and return log-values
of the same length (`-inf` where the measure vanishes).
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from qpaths.deformed_math import EPS_Q, q_to_alpha
from qpaths.entity.path import QPath
from qpaths.errors import DomainError, MassCaptureError, PreconditionError, RoutingError

logger = logging.getLogger(__name__)

LogDensity1D: TypeAlias = Callable[[NDArray[np.float64]], ArrayLike]

MASS_CAPTURE_TOL = 1e-8


@dataclass(frozen=True)
class QuadratureGrid:
    points: NDArray[np.float64]
    weights: NDArray[np.float64]

    def __init__(self, points: ArrayLike, weights: ArrayLike):
        pts = np.asarray(points, dtype=np.float64)
        wts = np.asarray(weights, dtype=np.float64)
        if pts.ndim != 1 or pts.shape != wts.shape or pts.size == 0:
            raise PreconditionError("Grid points and weights must be 1-d arrays of equal, non-zero length")
        if not (np.diff(pts) > 0).all():
            raise PreconditionError("Grid points must be strictly increasing")
        if not (wts > 0).all():
            raise PreconditionError("Grid weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @property
    def log_weights(self) -> NDArray[np.float64]:
        return np.log(self.weights)

    def __len__(self) -> int:
        return int(self.points.size)


def _composite_grid(edges: NDArray[np.float64], nodes_per_panel: int) -> QuadratureGrid:
    x, w = leggauss(nodes_per_panel)
    half = 0.5 * np.diff(edges)[:, None]
    centre = 0.5 * (edges[:-1] + edges[1:])[:, None]
    return QuadratureGrid((centre + half * x).ravel(), (half * w).ravel())


def gauss_legendre_grid(
    lower: float = -40.0,
    upper: float = 40.0,
    n_nodes: int = 4096,
    n_panels: int = 64,
) -> QuadratureGrid:
    """Composite Gauss-Legendre rule with equal panels on `[lower, upper]`."""
    if not lower < upper:
        raise PreconditionError(f"Need lower < upper, got [{lower}, {upper}]")
    if n_panels < 1 or n_nodes % n_panels:
        raise PreconditionError(f"n_nodes={n_nodes} must split evenly into n_panels={n_panels}")
    return _composite_grid(np.linspace(lower, upper, n_panels + 1), n_nodes // n_panels)


def log_spaced_grid(
    half_width: float = 1e4,
    n_panels: int = 128,
    nodes_per_panel: int = 32,
    inner: float = 1.0,
) -> QuadratureGrid:
    """Symmetric grid on `[-half_width, half_width]` for heavy tails.

    One panel covers `[-inner, inner]`; the remaining `n_panels` are split
    evenly between both sides with log-spaced edges.
    """
    if not 0 < inner < half_width:
        raise PreconditionError(f"Need 0 < inner < half_width, got inner={inner}, half_width={half_width}")
    if n_panels < 2 or n_panels % 2:
        raise PreconditionError(f"n_panels must be an even number >= 2, got {n_panels}")
    positive = np.geomspace(inner, half_width, n_panels // 2 + 1)
    edges = np.concatenate((-positive[::-1], positive))
    return _composite_grid(edges, nodes_per_panel)


def _log_values(log_f: LogDensity1D, grid: QuadratureGrid) -> NDArray[np.float64]:
    values = np.asarray(log_f(grid.points), dtype=np.float64).reshape(-1)
    if values.shape != grid.points.shape:
        raise PreconditionError(f"log-density returned shape {values.shape} for {len(grid)} grid points")
    if np.isnan(values).any():
        raise DomainError("log-density returned NaN on the quadrature grid")
    return values


def _log_integral_of_values(values: NDArray[np.float64], grid: QuadratureGrid) -> float:
    with np.errstate(divide="ignore"):
        return float(logsumexp(values + grid.log_weights))


def log_integral(log_f: LogDensity1D, grid: QuadratureGrid) -> float:
    """`log int exp(log_f)` on the grid."""
    return _log_integral_of_values(_log_values(log_f, grid), grid)


def check_mass_capture(
    log_f: LogDensity1D,
    grid: QuadratureGrid,
    expected_mass: float,
    tol: float = MASS_CAPTURE_TOL,
) -> float:
    """Return the captured mass, raising when it misses `expected_mass` by more than `tol`."""
    mass = math.exp(log_integral(log_f, grid))
    if abs(mass - expected_mass) > tol:
        raise MassCaptureError(
            f"Grid [{grid.points[0]:g}, {grid.points[-1]:g}] captures mass {mass!r}, expected {expected_mass!r} "
            f"within {tol:g}"
        )
    return mass


def check_tail_mass(
    log_f: LogDensity1D,
    grid: QuadratureGrid,
    tol: float = MASS_CAPTURE_TOL,
    edge_fraction: float = 1.0 / 64.0,
) -> float:
    """Mass of `log_f` on the outer `edge_fraction` of the grid span at either end.

    Used when the total mass is unknown: a measure the grid captures puts no
    more than `tol` there.
    """
    if not 0.0 < edge_fraction < 0.5:
        raise PreconditionError(f"edge_fraction must lie in (0, 0.5), got {edge_fraction}")
    values = _log_values(log_f, grid)
    margin = edge_fraction * (grid.points[-1] - grid.points[0])
    outer = (grid.points <= grid.points[0] + margin) | (grid.points >= grid.points[-1] - margin)
    edges = QuadratureGrid(grid.points[outer], grid.weights[outer])
    tail = math.exp(_log_integral_of_values(values[outer], edges))
    if tail > tol:
        raise MassCaptureError(
            f"Grid [{grid.points[0]:g}, {grid.points[-1]:g}] leaves mass {tail!r} on its outer edges, above {tol:g}"
        )
    return tail


def _check_endpoint_mass(log_f: LogDensity1D, log_normalizer: float | None, grid: QuadratureGrid) -> None:
    if log_normalizer is None:
        check_tail_mass(log_f, grid)
    else:
        check_mass_capture(log_f, grid, math.exp(log_normalizer))


def _check_masses(
    f: LogDensity1D,
    g: LogDensity1D,
    grid: QuadratureGrid,
    expected_masses: Sequence[float] | None,
) -> None:
    if expected_masses is None:
        return
    mass_f, mass_g = expected_masses
    check_mass_capture(f, grid, mass_f)
    check_mass_capture(g, grid, mass_g)


def _is_kl_limit(alpha: float) -> bool:
    return abs(abs(alpha) - 1.0) < 2.0 * EPS_Q


def alpha_divergence(
    f: LogDensity1D,
    g: LogDensity1D,
    alpha: float,
    grid: QuadratureGrid,
    expected_masses: Sequence[float] | None = None,
) -> float:
    """Amari alpha-divergence `D_alpha[f : g]` between unnormalized measures.

        4 / (1 - alpha^2) * [ (1-alpha)/2 int f + (1+alpha)/2 int g
                              - int f^((1-alpha)/2) g^((1+alpha)/2) ]

    alpha -> 1 tends to `kl_unnormalized(g, f)` and alpha -> -1 to
    `kl_unnormalized(f, g)`; both limits must be requested there directly.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha}")
    if _is_kl_limit(alpha):
        raise RoutingError(f"alpha={alpha} is a KL limit; use kl_unnormalized instead")
    _check_masses(f, g, grid, expected_masses)

    lf = _log_values(f, grid)
    lg = _log_values(g, grid)
    a = 0.5 * (1.0 - alpha)
    b = 0.5 * (1.0 + alpha)
    mass_f = math.exp(_log_integral_of_values(lf, grid))
    mass_g = math.exp(_log_integral_of_values(lg, grid))
    cross = math.exp(_log_integral_of_values(a * lf + b * lg, grid))
    return 4.0 / (1.0 - alpha * alpha) * (a * mass_f + b * mass_g - cross)


def kl_unnormalized(
    f: LogDensity1D,
    g: LogDensity1D,
    grid: QuadratureGrid,
    expected_masses: Sequence[float] | None = None,
) -> float:
    """Extended KL `int f log(f/g) - int f + int g`; `inf` when g misses mass of f."""
    _check_masses(f, g, grid, expected_masses)
    lf = _log_values(f, grid)
    lg = _log_values(g, grid)
    support = np.isfinite(lf)
    if np.isneginf(lg[support]).any():
        return math.inf
    f_vals = np.exp(lf[support])
    cross = float(np.sum(grid.weights[support] * f_vals * (lf[support] - lg[support])))
    mass_f = math.exp(_log_integral_of_values(lf, grid))
    mass_g = math.exp(_log_integral_of_values(lg, grid))
    return cross - mass_f + mass_g


def variational_objective(
    r_log: LogDensity1D,
    path: QPath,
    beta: float,
    alpha: float,
    grid: QuadratureGrid,
) -> float:
    """`(1-beta) D_alpha[pi_0 : r] + beta D_alpha[pi_T : r]`.

    Minimized over `r` by the q-path density with `q = (1 + alpha) / 2`.
    alpha = 1 uses `KL[r : pi_i]` and alpha = -1 uses `KL[pi_i : r]`.

    Every endpoint with a known normalizer must be captured by `grid` to
    `MASS_CAPTURE_TOL`; `r` and unnormalized endpoints must leave no more
    than that on the outer edges of the grid. Otherwise `MassCaptureError`.
    """
    if path.dim != 1:
        raise PreconditionError(f"Divergences are 1-d only, got a path of dimension {path.dim}")
    if not 0.0 <= beta <= 1.0:
        raise PreconditionError(f"beta must lie in [0, 1], got {beta}")
    alpha = float(alpha)

    check_tail_mass(r_log, grid)
    total = 0.0
    for weight, endpoint in ((1.0 - beta, path.base), (beta, path.target)):
        if weight == 0.0:
            continue
        _check_endpoint_mass(endpoint.log_density, endpoint.log_normalizer, grid)
        if _is_kl_limit(alpha) and alpha > 0:
            term = kl_unnormalized(r_log, endpoint.log_density, grid)
        elif _is_kl_limit(alpha):
            term = kl_unnormalized(endpoint.log_density, r_log, grid)
        else:
            term = alpha_divergence(endpoint.log_density, r_log, alpha, grid)
        total += weight * term
    logger.debug("Variational objective at beta=%s alpha=%s: %r", beta, alpha, total)
    return total


def path_alpha(path: QPath) -> float:
    """The alpha whose variational objective the path density minimizes."""
    return q_to_alpha(path.q)
