import math

import numpy as np
import pytest

from eulerpoincare import lie
from eulerpoincare import oracle as O
from eulerpoincare import systems as S
from eulerpoincare.integrators import StepperConfig, simulate


@pytest.fixture
def rng():
    return np.random.default_rng(2)


def test_cartesian_rhs_examples():
    g0, R = 9.81, 1.5
    g = np.array([0.0, 0.0, -g0])
    dx, dv = O.pendulum_cartesian_rhs(O.CartesianState([0, 0, -R], [0, 0, 0], R), 1.0, g)
    assert np.allclose(dx, 0) and np.allclose(dv, 0)
    _, dv = O.pendulum_cartesian_rhs(O.CartesianState([R, 0, 0], [0, 0, 0], R), 1.0, g)
    assert np.array_equal(dv, g)


def test_cartesian_acceleration_is_tangent(rng):
    R = 2.0
    for _ in range(20):
        x = rng.normal(size=3)
        x *= R / np.linalg.norm(x)
        v = np.cross(x, rng.normal(size=3))
        s = O.CartesianState(x, v, R)
        _, dv = O.pendulum_cartesian_rhs(s, 1.0, np.array([0.1, 0.0, -9.81]))
        # second derivative of |x|^2 vanishes: x.a + |v|^2 = 0
        assert abs(x @ dv + v @ v) < 1e-12


def test_cartesian_state_validation():
    with pytest.raises(ValueError):
        O.CartesianState([1.1, 0, 0], [0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        O.CartesianState([1.0, 0, 0], [1.0, 0, 0], 1.0)


def test_conical_pendulum():
    g0, R, theta = 9.81, 1.0, 2.0  # polar angle measured from the upward axis
    r = R * math.sin(theta)
    z = R * math.cos(theta)
    omega = math.sqrt(g0 / -z)
    x0 = np.array([r, 0.0, z])
    v0 = np.array([0.0, omega * r, 0.0])
    s = O.CartesianState(x0, v0, R)
    _, dv = O.pendulum_cartesian_rhs(s, 1.0, np.array([0, 0, -g0]))
    assert np.allclose(dv, [-omega**2 * r, 0, 0])
    run = O.simulate_cartesian(s, 1.0, [0, 0, -g0], 1e-3, 2.0)
    assert np.abs(np.linalg.norm(run.x, axis=1) - R).max() < 1e-12
    assert np.abs(run.x[:, 2] - z).max() < 1e-9
    assert run.max_projection < 1e-9


def test_pendulum_ep_matches_cartesian_oracle():
    m, Rad = 0.7, 1.3
    g = np.array([0.0, 0.0, -9.81])
    pend = S.make_spherical_pendulum(m, Rad, g)
    x0 = Rad * np.array([0.6, 0.0, -0.8])
    om0 = np.array([0.5, 1.0, 0.375])  # orthogonal to x0
    traj = simulate(pend, pend.state(0.0, x0, om0), StepperConfig(1e-3, 2.0))
    run = O.simulate_cartesian(O.CartesianState(x0, pend.anchor(x0, om0), Rad), m, g, 1e-3, 2.0)
    assert np.abs(traj.gamma - run.x).max() < 1e-5
    assert np.abs(traj.mu - m * np.cross(run.x, run.v)).max() < 1e-8


@pytest.mark.parametrize(
    "make",
    [
        lambda: S.make_heavy_top([1, 1.2, 0.6], 2.0, 9.81, [0.1, -0.2, 0.5]),
        lambda: S.make_spherical_pendulum(1.5, 2.0, [0.3, 0.0, -9.81]),
        lambda: S.make_harmonic_oscillator(2.0, 3.0),
    ],
)
def test_fd_force_check(make, rng):
    sys = make()
    for _ in range(5):
        x, X = S.random_point(sys, rng), rng.normal(size=sys.algebra_dim)
        assert O.fd_force_check(sys, x, X, 1e-6) < 1e-6
        assert O.fd_force_check(sys, x, X, 1e-6, extended=True) < 1e-6


def test_fd_force_check_free_rigid_body(rng):
    rigid = S.make_free_rigid_body([1, 2, 3])
    assert O.fd_force_check(rigid, lie.random_rotation(rng), rng.normal(size=3), 1e-6) < 1e-12


def test_fd_force_check_detects_a_sign_error(rng):
    top = S.make_heavy_top([1, 1.2, 0.6], 2.0, 9.81, [0.1, -0.2, 0.5])
    flipped = S.SystemSpec(**{**top.__dict__, "force": lambda x, X: -top.force(x, X)})
    R = lie.random_rotation(rng)
    assert O.fd_force_check(flipped, R, np.ones(3), 1e-6) > 1e-2


def test_fd_convergence_order_extended(rng):
    pend = S.make_spherical_pendulum(1.5, 2.0, [0.3, 0.0, -9.81])
    x, X = S.random_point(pend, rng), rng.normal(size=3)
    r = [O.fd_force_check(pend, x, X, e, extended=True) for e in (1e-4, 1e-5, 1e-6)]
    assert 80 < r[0] / r[1] < 120
    assert 80 < r[1] / r[2] < 120


def test_fd_force_check_eps_range():
    with pytest.raises(ValueError):
        O.fd_force_check(S.make_harmonic_oscillator(), np.zeros(1), np.zeros(1), 1e-2)


def test_richardson_reference():
    osc = S.make_harmonic_oscillator()
    st = osc.state(0.0, np.array([1.0]), np.array([0.0]))
    cfg = StepperConfig(0.05, 1.0)
    ref = O.richardson_reference(osc, st, cfg)
    assert np.allclose(ref.t, simulate(osc, st, cfg).t)
    assert np.abs(ref.gamma[:, 0] - np.cos(ref.t)).max() < 1e-12

    rigid = S.make_free_rigid_body([1, 2, 3])
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 0.5, -0.7]))
    ref = O.richardson_reference(rigid, st, StepperConfig(0.1, 1.0))
    H = ref.invariants["H"]
    assert np.abs(H - H[0]).max() < 1e-13
    e1 = np.abs(simulate(rigid, st, StepperConfig(0.1, 1.0)).gamma[-1] - ref.gamma[-1]).max()
    e2 = np.abs(simulate(rigid, st, StepperConfig(0.05, 1.0)).gamma[-1] - ref.gamma[-1]).max()
    assert 12 <= e1 / e2 <= 20


def _rigid_solution(t_end=2.0):
    rigid = S.make_free_rigid_body([1, 2, 3])
    traj = simulate(rigid, rigid.state(0.0, np.eye(3), np.array([1.0, 0.1, 0.1])), StepperConfig(1e-3, t_end))
    return rigid, traj


def test_discrete_action_of_uniform_rotation():
    rigid = S.make_free_rigid_body([1, 2, 3])
    traj = simulate(rigid, rigid.state(0.0, np.eye(3), np.array([0.0, 0.0, 2.0])), StepperConfig(1e-2, 1.5))
    assert O.discrete_action(rigid, traj) == pytest.approx(0.5 * 3 * 4 * 1.5, rel=1e-12)


def test_stationarity_solution_and_non_solution(rng):
    rigid, traj = _rigid_solution()
    assert 80 <= O.variation_ratio(rigid, traj) <= 120
    assert 80 <= O.variation_ratio(rigid, traj, mode="linear") <= 120
    curve = O.random_admissible_curve(rigid, np.eye(3), traj.t, rng)
    ratio = O.variation_ratio(rigid, curve, coeffs=O.residual_direction(rigid, curve))
    assert 9 <= ratio <= 11


def test_stationarity_bounded_ratio():
    rigid, traj = _rigid_solution()
    r = [O.stationarity_check(rigid, traj, e) for e in (1e-2, 1e-3, 1e-4)]
    assert max(r) / min(r) < 1.5
    assert O.stationarity_check(rigid, traj, 0.0) == 0.0


def test_stationarity_on_pendulum_and_oscillator():
    pend = S.make_spherical_pendulum(1.0, 1.0, [0, 0, -9.81])
    traj = simulate(pend, pend.state(0.0, np.array([1.0, 0, 0]), np.array([0.0, 0.0, 0.5])), StepperConfig(1e-3, 1.0))
    assert 80 <= O.variation_ratio(pend, traj) <= 120
    osc = S.make_harmonic_oscillator()
    traj = simulate(osc, osc.state(0.0, np.array([1.0]), np.array([0.0])), StepperConfig(1e-3, 2.0))
    assert 80 <= O.variation_ratio(osc, traj) <= 120


def test_perturbation_keeps_endpoints_and_compatibility(rng):
    rigid, traj = _rigid_solution(1.0)
    coeffs = rng.normal(size=(3, 3))
    gam, V = O.perturbed_curve(rigid, traj, 0.05, coeffs)
    assert np.allclose(gam[0], traj.gamma[0]) and np.allclose(gam[-1], traj.gamma[-1], atol=1e-14)
    # finite-difference check of gamma^-1 gamma' = hat(V) in the interior
    k, dt = 400, traj.t[1] - traj.t[0]
    dg = (gam[k + 1] - gam[k - 1]) / (2 * dt)
    assert np.allclose(lie.vee(gam[k].T @ dg, tol=1e-5), V[k], atol=1e-5)


def test_action_variation_needs_samples():
    rigid, traj = _rigid_solution(0.005)
    with pytest.raises(ValueError):
        O.action_variation(rigid, traj, 1e-2, np.ones((3, 3)))
