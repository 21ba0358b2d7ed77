import numpy as np
import pytest

from eulerpoincare import integrators as I
from eulerpoincare import lie
from eulerpoincare import systems as S


@pytest.fixture
def rng():
    return np.random.default_rng(3)


@pytest.fixture
def rigid():
    return S.make_free_rigid_body([1.0, 2.0, 3.0])


def test_stepper_config_validation():
    with pytest.raises(ValueError):
        I.StepperConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        I.StepperConfig(dt=2.0, t_end=1.0)
    with pytest.raises(ValueError):
        I.StepperConfig(dt=0.1, t_end=1.0, scheme="euler")
    with pytest.raises(ValueError):
        I.StepperConfig(dt=0.1, t_end=1.0, record_every=0)


def test_ep_rhs_rigid_body_example(rigid):
    st = rigid.state(0.0, np.eye(3), np.ones(3))
    assert np.allclose(st.mu, [1, 2, 3])
    dmu, dgamma = I.ep_rhs(rigid, st)
    assert np.allclose(dmu, [-1, 2, -1])
    assert np.allclose(dgamma, lie.hat(np.ones(3)))


def test_ep_rhs_oscillator_example():
    osc = S.make_harmonic_oscillator()
    dmu, dgamma = I.ep_rhs(osc, osc.state(0.0, np.array([1.0]), np.array([0.0])))
    assert np.allclose(dmu, [-1.0])
    assert np.allclose(dgamma, [0.0])


def test_ep_rhs_isotropy_velocity():
    pend = S.make_spherical_pendulum(1.0, 1.0, [0.0, 0.0, 0.0])
    x = np.array([0.0, 0.6, 0.8])
    st = pend.state(0.0, x, 2.0 * x)
    assert np.allclose(st.mu, 0)
    dmu, _ = I.ep_rhs(pend, st)
    assert np.allclose(dmu, 0)


def test_pendulum_ep_rhs_independent_of_lift(rng):
    # adding an isotropy component to V must not change the momentum rate
    pend = S.make_spherical_pendulum(1.2, 0.8, [0.0, 0.0, -9.81])
    for _ in range(10):
        x = S.random_point(pend, rng)
        om = rng.normal(size=3)
        a = I.ep_rhs(pend, pend.state(0.0, x, om))[0]
        b = I.ep_rhs(pend, pend.state(0.0, x, om + 0.7 * x))[0]
        assert np.allclose(a, b, atol=1e-12)


def test_lie_poisson_rhs_examples(rigid):
    assert np.allclose(I.lie_poisson_rhs(rigid, np.array([1.0, 2.0, 3.0])), [-1, 2, -1])
    assert np.all(I.lie_poisson_rhs(rigid, np.zeros(3)) == 0)
    assert np.allclose(I.lie_poisson_rhs(rigid, np.array([0.0, 0.0, 4.0])), 0)


def test_lie_poisson_matches_ep_for_rigid_body(rigid, rng):
    for _ in range(20):
        st = rigid.state(0.0, lie.random_rotation(rng), rng.normal(size=3))
        assert np.allclose(I.ep_rhs(rigid, st)[0], I.lie_poisson_rhs(rigid, st.mu), atol=1e-14)


def test_lie_poisson_heavy_top_matches_body_equations(rng):
    top = S.make_heavy_top([1.0, 1.2, 0.6], 2.0, 9.81, [0.1, -0.2, 0.5])
    for _ in range(20):
        R, om = lie.random_rotation(rng), rng.normal(size=3)
        st = top.state(0.0, R, om)
        xi = top.reduced_point(R, st.mu)
        rate = I.lie_poisson_rhs(top, xi)
        dmu, dR = I.ep_rhs(top, st)
        assert np.allclose(rate[:3], dmu, atol=1e-12)
        # Gamma = R^t e3 is advected: Gamma' = Gamma x Omega
        assert np.allclose(rate[3:], dR.T @ [0, 0, 1], atol=1e-12)


def test_lie_poisson_finite_difference_dh():
    rigid = S.make_free_rigid_body([1.0, 2.0, 3.0])
    no_dh = S.SystemSpec(**{**rigid.__dict__, "dh": None})
    xi = np.array([0.3, -1.2, 0.8])
    assert np.allclose(I.lie_poisson_rhs(no_dh, xi), I.lie_poisson_rhs(rigid, xi), atol=1e-8)


def test_lie_poisson_requires_hamiltonian():
    pend = S.make_spherical_pendulum(1.0, 1.0, [0, 0, -1])
    with pytest.raises(I.MissingHamiltonianError):
        I.lie_poisson_rhs(pend, np.ones(3))


def test_rk4_step_basics():
    y = np.array([1.0, 2.0])
    assert np.array_equal(I.rk4_step(lambda v: np.zeros_like(v), y, 0.1), y)
    assert I.rk4_step(lambda v: -v, np.array([1.0]), 0.1)[0] == pytest.approx(0.9048375, abs=1e-7)
    with pytest.raises(I.BlowUpError):
        I.rk4_step(lambda v: v * np.nan, y, 0.1)


def test_rk4_step_halving_ratio():
    def solve(dt):
        y = np.array([1.0, 0.0])
        for _ in range(int(round(2.0 / dt))):
            y = I.rk4_step(lambda v: np.array([v[1], -v[0]]), y, dt)
        return abs(y[0] - np.cos(2.0))

    assert 14 < solve(0.1) / solve(0.05) < 18


def test_reconstruct_step_examples(rng):
    R = lie.random_rotation(rng)
    assert np.array_equal(I.reconstruct_step(R, np.zeros(3), 0.1), R)
    w, dt, rad = 1.3, 0.2, 2.0
    x = I.reconstruct_step(np.array([rad, 0, 0]), np.array([0, 0, w]), dt)
    assert np.allclose(x, rad * np.array([np.cos(w * dt), np.sin(w * dt), 0]))
    V = rng.normal(size=3)
    g = R.copy()
    for _ in range(100):
        g = I.reconstruct_step(g, V, 0.01)
    assert np.abs(g - lie.exp_group(V) @ R).max() < 1e-10
    g = R.copy()
    for _ in range(100):
        g = I.reconstruct_step(g, V, 0.01, side="right")
    assert np.abs(g - R @ lie.exp_group(V)).max() < 1e-10
    with pytest.raises(ValueError):
        I.reconstruct_step(2 * R, V, 0.1)


def test_relative_equilibrium_is_constant(rigid):
    st = rigid.state(0.0, np.eye(3), np.array([0.0, 0.0, 1.0]))
    traj = I.simulate(rigid, st, I.StepperConfig(1e-3, 10.0, record_every=100))
    assert np.abs(traj.V - [0, 0, 1]).max() < 1e-10
    # the rotation is a one-parameter subgroup about e3
    assert np.abs(traj.gamma[-1] - lie.exp_group(np.array([0, 0, 10.0]))).max() < 1e-10


def test_trajectory_sampling(rigid):
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 0.1, 0.1]))
    traj = I.simulate(rigid, st, I.StepperConfig(1e-2, 1.0, record_every=5))
    assert len(traj) == 21
    assert np.abs(np.diff(traj.t) - 0.05).max() < 1e-12
    assert traj.samples[3].t == traj.t[3]
    for s in traj.samples:
        assert np.allclose(rigid.d2_lbar(s.gamma, s.V), s.mu, atol=1e-10)
        assert lie.is_rotation(s.gamma)


def test_reduced_and_coupled_modes_agree(rigid):
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 0.4, -0.3]))
    cfg = I.StepperConfig(1e-2, 3.0)
    a = I.simulate(rigid, st, cfg, reduced=True)
    b = I.simulate(rigid, st, cfg, reduced=False)
    assert np.abs(a.mu - b.mu).max() < 1e-12
    assert np.abs(a.gamma - b.gamma).max() < 1e-7
    top = S.make_heavy_top([1, 1, 1], 1.0, 1.0, [0, 0, 1])
    with pytest.raises(ValueError):
        I.simulate(top, top.state(0.0, np.eye(3), np.ones(3)), cfg, reduced=True)


def _final_error(sys, st, dt, ref, scheme="rk4", reduced=None):
    traj = I.simulate(sys, st, I.StepperConfig(dt, 1.0, scheme=scheme), reduced=reduced)
    return np.abs(traj.gamma[-1] - ref.gamma[-1]).max()


@pytest.mark.parametrize("reduced", [True, False])
def test_rigid_body_fourth_order(rigid, reduced):
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 2.0, -1.5]))
    ref = I.simulate(rigid, st, I.StepperConfig(1e-3, 1.0))
    ratio = _final_error(rigid, st, 0.1, ref, reduced=reduced) / _final_error(rigid, st, 0.05, ref, reduced=reduced)
    assert 12 < ratio < 20


def test_sphere_fourth_order():
    pend = S.make_spherical_pendulum(1.0, 1.0, [0, 0, -9.81])
    st = pend.state(0.0, np.array([1.0, 0, 0]), np.array([0.0, 0.3, 1.5]))
    ref = I.simulate(pend, st, I.StepperConfig(1e-3, 1.0))
    ratio = _final_error(pend, st, 0.05, ref) / _final_error(pend, st, 0.025, ref)
    assert 12 < ratio < 20


def test_midpoint_second_order(rigid):
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 2.0, -1.5]))
    ref = I.simulate(rigid, st, I.StepperConfig(1e-3, 1.0))
    ratio = _final_error(rigid, st, 0.02, ref, "midpoint") / _final_error(rigid, st, 0.01, ref, "midpoint")
    assert 3 < ratio < 5


def test_reconstruction_local_consistency(rigid):
    # one step differs from gamma exp(dt V) by O(dt^2)
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 2.0, -1.5]))
    gaps = []
    for dt in (1e-2, 5e-3):
        traj = I.simulate(rigid, st, I.StepperConfig(dt, 2 * dt))
        gaps.append(np.abs(traj.gamma[1] - st.gamma @ lie.exp_group(dt * st.V)).max())
    assert 3 < gaps[0] / gaps[1] < 5


def test_reorthonormalization_keeps_group(rigid):
    st = rigid.state(0.0, np.eye(3), np.array([1.0, 2.0, -1.5]))
    traj = I.simulate(rigid, st, I.StepperConfig(1e-2, 2.0, reorthonormalize_every=10))
    assert all(lie.is_rotation(g, tol=1e-13) for g in traj.gamma)


def test_energy_conservation_all_systems():
    cases = [
        (S.make_heavy_top([1, 1.2, 0.6], 1.0, 9.81, [0, 0, 0.5]), lie.axis_angle([0.3, 0.2, 0]), [0.2, 0.1, 5.0]),
        (S.make_spherical_pendulum(1.0, 1.0, [0, 0, -9.81]), np.array([0.0, 0.6, -0.8]), [1.0, 0.0, 0.0]),
        (S.make_harmonic_oscillator(2.0, 3.0), np.array([0.5]), [1.0]),
    ]
    for sys, g0, v0 in cases:
        traj = I.simulate(sys, sys.state(0.0, g0, np.array(v0)), I.StepperConfig(1e-3, 3.0, record_every=10))
        H = traj.invariants["H"]
        assert np.abs(H - H[0]).max() / abs(H[0]) < 1e-7, sys.name


def test_blow_up_detection():
    unstable = S.make_abelian_system(
        1,
        lambda x, v: 0.5 * v @ v + 5e3 * x @ x,
        d1=lambda x, v: 1e4 * x,
        d2=lambda x, v: v,
        legendre_inverse=lambda x, mu: mu,
    )
    with pytest.raises(I.BlowUpError):
        I.simulate(unstable, unstable.state(0.0, np.array([1.0]), np.array([0.0])), I.StepperConfig(1e-3, 2.0))


def test_inconsistent_initial_state(rigid):
    bad = S.EPState(0.0, np.eye(3), np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        I.simulate(rigid, bad, I.StepperConfig(0.1, 1.0))


def test_lie_poisson_simulation_conserves_casimirs():
    top = S.make_heavy_top([1, 1.2, 0.6], 1.0, 9.81, [0, 0, 0.5])
    st = top.state(0.0, lie.axis_angle([0.3, 0.2, 0]), np.array([0.2, 0.1, 5.0]))
    xi0 = top.reduced_point(st.gamma, st.mu)
    _, xi = I.simulate_lie_poisson(top, xi0, I.StepperConfig(1e-3, 10.0))
    g2 = np.einsum("ki,ki->k", xi[:, 3:], xi[:, 3:])
    mg = np.einsum("ki,ki->k", xi[:, :3], xi[:, 3:])
    H = np.array([top.hamiltonian_h(x) for x in xi])
    assert np.abs(g2 - 1).max() < 1e-7
    assert np.abs(mg - mg[0]).max() / abs(mg[0]) < 1e-7
    assert np.abs(H - H[0]).max() / abs(H[0]) < 1e-7
