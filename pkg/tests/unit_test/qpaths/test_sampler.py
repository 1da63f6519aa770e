import math

import numpy as np
import pytest

from qpaths.densities import make_density, make_gaussian
from qpaths.entity.density import GaussianSpec
from qpaths.entity.path import QPath
from qpaths.entity.sampling import HmcConfig, RngStream
from qpaths.errors import PreconditionError
from qpaths.sampler import discrete_metropolis_kernel, hmc_transition, leapfrog
from tests.support.qpaths_doubles import gaussian_path, identical_path, student_t_path


def _standard_gradient(z):
    return -np.asarray(z)


@pytest.mark.unit
def test_leapfrog_is_time_reversible() -> None:
    rng = np.random.default_rng(12)
    z0 = rng.normal(size=(10, 2))
    p0 = rng.normal(size=(10, 2))

    forward = leapfrog(_standard_gradient, z0, p0, 0.3, 25)
    backward = leapfrog(_standard_gradient, forward.position, -forward.momentum, 0.3, 25)

    np.testing.assert_allclose(backward.position, z0, atol=1e-10)
    np.testing.assert_allclose(-backward.momentum, p0, atol=1e-10)
    assert not forward.diverged.any()


@pytest.mark.unit
def test_leapfrog_preserves_phase_space_volume() -> None:
    precision = np.array([[2.0, 0.5], [0.5, 1.0]])

    def gradient(z):
        return -np.asarray(z) @ precision

    # The map is linear for a Gaussian, so its Jacobian is its image of the unit basis.
    basis = np.eye(4)
    images = []
    for row in basis:
        step = leapfrog(gradient, row[:2], row[2:], 0.4, 7)
        images.append(np.concatenate((step.position, step.momentum)))

    assert abs(np.linalg.det(np.array(images))) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.unit
def test_leapfrog_single_point_shapes() -> None:
    result = leapfrog(_standard_gradient, [0.5], [1.0], 0.1, 3)

    assert result.position.shape == (1,)
    assert result.momentum.shape == (1,)
    assert result.diverged.shape == ()


@pytest.mark.unit
def test_leapfrog_reuses_an_initial_gradient() -> None:
    calls = []

    def gradient(z):
        calls.append(np.asarray(z).copy())
        return -np.asarray(z)

    leapfrog(gradient, [[1.0]], [[0.0]], 0.1, 4, initial_gradient=np.array([[-1.0]]))

    assert len(calls) == 4


@pytest.mark.unit
def test_leapfrog_flags_non_finite_trajectories() -> None:
    def exploding(z):
        z = np.asarray(z)
        return np.where(np.abs(z) > 1.0, np.inf, -z)

    result = leapfrog(exploding, [[0.0], [0.0]], [[0.1], [50.0]], 0.5, 5)

    np.testing.assert_array_equal(result.diverged, [False, True])


@pytest.mark.unit
def test_leapfrog_validates_its_arguments() -> None:
    with pytest.raises(PreconditionError, match="n_steps"):
        leapfrog(_standard_gradient, [0.0], [0.0], 0.1, 0)
    with pytest.raises(PreconditionError, match="share a shape"):
        leapfrog(_standard_gradient, [[0.0, 1.0]], [[0.0]], 0.1, 1)


@pytest.mark.unit
@pytest.mark.parametrize(
    ("kwargs", "match"),
    [
        ({"step_size": 0.0}, "step_size"),
        ({"step_size": math.nan}, "step_size"),
        ({"n_leapfrog": 0}, "n_leapfrog"),
        ({"transitions_per_temperature": -1}, "transitions_per_temperature"),
        ({"mass": -1.0}, "mass"),
    ],
)
def test_hmc_config_validation(kwargs, match: str) -> None:
    with pytest.raises(PreconditionError, match=match):
        HmcConfig(**kwargs)


@pytest.mark.unit
def test_hmc_config_defaults() -> None:
    assert HmcConfig() == HmcConfig(step_size=1.5, n_leapfrog=10, transitions_per_temperature=2, mass=1.0)


@pytest.mark.unit
def test_hmc_leaves_the_geometric_intermediate_invariant() -> None:
    # Geometric mean of N(-4, 3) and N(4, 1) at beta = 0.5 is N(2, 1.5).
    path = gaussian_path(1.0)
    n = 20_000
    rng = np.random.default_rng(13)
    z = rng.normal(2.0, math.sqrt(1.5), size=(n, 1))
    cfg = HmcConfig(step_size=0.5, n_leapfrog=10)

    accepted_total = 0
    for _ in range(3):
        z, accepted = hmc_transition(path, 0.5, z, cfg, rng)
        accepted_total += int(accepted.sum())

    assert accepted_total > 0
    assert abs(z.mean() - 2.0) <= 5.0 * math.sqrt(1.5 / n)
    assert abs(z.var(ddof=1) - 1.5) <= 5.0 * 1.5 * math.sqrt(2.0 / n)


@pytest.mark.unit
def test_hmc_leaves_the_arithmetic_mixture_invariant_at_an_endpoint() -> None:
    path = student_t_path(0.0, dof=5.0)
    n = 20_000
    rng = np.random.default_rng(14)
    z = path.target.sample(rng, n)

    z, _ = hmc_transition(path, 1.0, z, HmcConfig(step_size=0.5), rng)

    # Student-t with 5 dof and unit scale has variance 5/3.
    assert abs(z.mean() - 4.0) <= 5.0 * math.sqrt(5.0 / 3.0 / n)


@pytest.mark.unit
@pytest.mark.unit
@pytest.mark.parametrize(("z0", "p0"), [(1.0, 0.0), (0.0, 1.0), (0.5, -0.5)])
def test_leapfrog_energy_drift_on_a_standard_gaussian(z0: float, p0: float) -> None:
    result = leapfrog(_standard_gradient, [z0], [p0], 0.1, 10)

    start = 0.5 * (z0**2 + p0**2)
    end = 0.5 * (result.position[0] ** 2 + result.momentum[0] ** 2)
    assert abs(end - start) <= 1e-3


@pytest.mark.unit
def test_default_config_acceptance_on_the_gaussian_pair() -> None:
    # Geometric intermediate at beta = 0.5 is N(2, 1.5).
    rng = np.random.default_rng(17)
    z = rng.normal(2.0, math.sqrt(1.5), size=(5_000, 1))

    _, accepted = hmc_transition(gaussian_path(1.0), 0.5, z, HmcConfig(), rng)

    assert 0.6 <= accepted.mean() <= 0.95


def _scaled(handle, log_c: float):
    return make_density(
        handle.dim,
        lambda z: np.asarray(handle.log_density(z)) + log_c,
        grad_log_density=handle.grad_log_density,
        name="scaled",
    )


@pytest.mark.unit
@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_acceptance_ignores_a_common_scale_of_both_endpoints(q: float) -> None:
    path = gaussian_path(q)
    scaled = QPath(base=_scaled(path.base, 3.0), target=_scaled(path.target, 3.0), q=q)
    z = np.linspace(-6.0, 6.0, 64)

    plain_points, plain_accepted = hmc_transition(path, 0.4, z, HmcConfig(), np.random.default_rng(18))
    scaled_points, scaled_accepted = hmc_transition(scaled, 0.4, z, HmcConfig(), np.random.default_rng(18))

    np.testing.assert_array_equal(plain_accepted, scaled_accepted)
    np.testing.assert_allclose(plain_points, scaled_points, rtol=1e-9, atol=1e-9)


@pytest.mark.unit
@pytest.mark.slow
def test_chained_transitions_sample_a_standard_gaussian() -> None:
    path = identical_path(1.0)
    rng = np.random.default_rng(19)
    n = 10_000
    draws = np.empty(n)
    z = np.array([0.0])
    for i in range(n):
        z, _ = hmc_transition(path, 0.5, z, HmcConfig(), rng)
        draws[i] = z[0]

    assert abs(draws.mean()) <= 5.0 * draws.std(ddof=1) / math.sqrt(n)
    assert abs(draws.var(ddof=1) - 1.0) <= 0.1


def test_hmc_single_point_returns_a_point_and_a_flag() -> None:
    point, accepted = hmc_transition(gaussian_path(0.5), 0.5, np.array([0.0]), HmcConfig(), np.random.default_rng(15))

    assert point.shape == (1,)
    assert isinstance(accepted, bool)


@pytest.mark.unit
def test_hmc_batch_of_scalars_keeps_a_point_axis() -> None:
    points, accepted = hmc_transition(gaussian_path(0.5), 0.5, np.zeros(8), HmcConfig(), np.random.default_rng(16))

    assert points.shape == (8, 1)
    assert accepted.shape == (8,)


@pytest.mark.unit
def test_hmc_with_a_stream_is_reproducible() -> None:
    stream = RngStream(seed=99, stream_id=3)
    z = np.linspace(-1.0, 1.0, 16)

    first, _ = hmc_transition(gaussian_path(0.5), 0.5, z, HmcConfig(), stream)
    second, _ = hmc_transition(gaussian_path(0.5), 0.5, z, HmcConfig(), stream)

    np.testing.assert_array_equal(first, second)


@pytest.mark.unit
def test_hmc_rejects_zero_density_starts() -> None:
    def half_line(z):
        x = np.asarray(z)[..., 0]
        return np.where(x > 0, -x, -np.inf)

    base = make_density(1, half_line, grad_log_density=lambda z: -np.ones_like(np.asarray(z, dtype=np.float64)))
    path = QPath(base=base, target=make_gaussian(GaussianSpec([1.0], [1.0])), q=2.0)

    with pytest.raises(PreconditionError, match="positive path density"):
        hmc_transition(path, 0.5, np.array([-1.0, 1.0]), HmcConfig(), np.random.default_rng(0))


@pytest.mark.unit
def test_rng_stream_reproduces_and_separates_draws() -> None:
    stream = RngStream(seed=2020)

    same = stream.generator(1, 2).random(4)
    again = stream.generator(1, 2).random(4)
    other = stream.generator(1, 3).random(4)

    np.testing.assert_array_equal(same, again)
    assert not np.array_equal(same, other)


@pytest.mark.unit
def test_rng_stream_children_are_deterministic_and_distinct() -> None:
    stream = RngStream(seed=2020)

    assert stream.child(0, 1) == stream.child(0, 1)
    assert stream.child(0, 1) != stream.child(1, 0)
    assert stream.child(0, 1).seed == 2020
    assert not np.array_equal(stream.child(0).generator().random(4), stream.child(1).generator().random(4))


@pytest.mark.unit
@pytest.mark.parametrize("seed", [-1, 1 << 64, True, 1.5])
def test_rng_stream_rejects_invalid_seeds(seed) -> None:
    with pytest.raises(PreconditionError, match="seed"):
        RngStream(seed=seed)


@pytest.mark.unit
def test_rng_stream_accepts_the_full_unsigned_range() -> None:
    stream = RngStream(seed=(1 << 64) - 1, stream_id=np.uint64(5))

    assert stream.stream_id == 5
    assert stream.generator(0).random() >= 0.0


@pytest.mark.unit
def test_metropolis_kernel_is_stochastic_and_in_detailed_balance() -> None:
    target = np.array([0.5, 2.0, 0.0, 1.5])

    kernel = discrete_metropolis_kernel(target)

    np.testing.assert_allclose(kernel.sum(axis=1), 1.0, rtol=1e-15)
    assert (kernel >= 0).all()
    flow = target[:, None] * kernel
    np.testing.assert_allclose(flow, flow.T, atol=1e-15)
    np.testing.assert_allclose(target @ kernel, target, atol=1e-14)


@pytest.mark.unit
def test_metropolis_kernel_on_one_state_is_the_identity() -> None:
    np.testing.assert_array_equal(discrete_metropolis_kernel([3.0]), [[1.0]])


@pytest.mark.unit
@pytest.mark.parametrize("target", [[], [0.0, 0.0], [1.0, -1.0], [1.0, math.inf], [[1.0]]])
def test_metropolis_kernel_validation(target) -> None:
    with pytest.raises(PreconditionError, match="unnorm_target"):
        discrete_metropolis_kernel(target)


@pytest.mark.unit
def test_metropolis_kernel_stationary_vector_is_the_normalized_target() -> None:
    target = np.array([0.5, 2.0, 1.0, 3.0, 1.5])
    kernel = discrete_metropolis_kernel(target)

    eigenvalues, eigenvectors = np.linalg.eig(kernel.T)
    stationary = np.real(eigenvectors[:, np.argmin(np.abs(eigenvalues - 1.0))])
    stationary = stationary / stationary.sum()

    np.testing.assert_allclose(stationary, target / target.sum(), rtol=0.0, atol=1e-10)
