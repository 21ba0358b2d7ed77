"""Verification suites: each criterion returns a list of :class:`Check` results."""

from __future__ import annotations

import math
import time

import numpy as np

from . import lie, oracle, reduction
from . import systems as S
from .integrators import StepperConfig, simulate, simulate_lie_poisson
from .report import Check, drift_entry

RIGID_INERTIA = (1.0, 2.0, 3.0)
RIGID_OMEGA0 = (1.0, 0.1, 0.1)
HEAVY_TOP = dict(I=(1.0, 1.2, 0.6), mass=1.0, gravity=9.81, com=(0.0, 0.0, 0.5))
HEAVY_TOP_INIT = dict(rotation=(0.3, 0.2, 0.0), omega=(0.2, 0.1, 5.0))
PENDULUM = dict(mass=1.0, radius=1.0, gravity=(0.0, 0.0, -9.81))
PENDULUM_INIT = dict(x=(1.0, 0.0, 0.0), omega=(0.0, 0.0, 0.5))


def _check(name, value, tol, detail="", below=True) -> Check:
    value = float(value)
    ok = value < tol if below else value > tol
    return Check(name, bool(ok), value, float(tol), detail)


def _range_check(name, value, lo, hi) -> Check:
    value = float(value)
    return Check(name, bool(lo <= value <= hi), value, float(hi), f"expected in [{lo:g}, {hi:g}]")


def _exp_series(X, terms=20):
    K = lie.hat(X)
    out = np.eye(3)
    term = np.eye(3)
    for n in range(1, terms):
        term = term @ K / n
        out = out + term
    return out


def criterion_algebra(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    sc = lie.so3()
    checks = [_check("so(3) Jacobi residual", lie.check_jacobi(sc), 1e-12)]

    worst = 0.0
    for _ in range(1000):
        V, X, xi = rng.normal(size=(3, 3))
        lhs = lie.pairing(lie.ad_star(sc, V, xi), X)
        rhs = -lie.pairing(xi, lie.bracket(sc, V, X))
        worst = max(worst, abs(lhs - rhs))
    checks.append(_check("ad* pairing identity (1000 triples)", worst, 1e-12))

    # the 20-term series itself is only accurate to 1e-12 for |X| <= 2
    worst = 0.0
    for k in range(100):
        u = rng.normal(size=3)
        X = u / np.linalg.norm(u) * (2.0 * rng.random() if k >= 5 else 1e-6 * rng.random())
        worst = max(worst, float(np.abs(lie.exp_group(X) - _exp_series(X)).max()))
    checks.append(_check("exp vs 20-term series", worst, 1e-12))
    return checks


def criterion_euler_lagrange() -> list:
    osc = S.make_harmonic_oscillator()
    init = osc.state(0.0, np.array([1.0]), np.array([0.0]))
    traj = simulate(osc, init, StepperConfig(dt=1e-3, t_end=10.0))
    err_end = abs(traj.gamma[-1, 0] - math.cos(10.0))
    err_max = float(np.abs(traj.gamma[:, 0] - np.cos(traj.t)).max())
    return [
        _check("oscillator |x(10) - cos 10|", err_end, 1e-8),
        _check("oscillator max |x(t) - cos t|", err_max, 1e-8),
    ]


def rigid_body_run(t_end=10.0, dt=1e-3):
    rb = S.make_free_rigid_body(RIGID_INERTIA)
    init = rb.state(0.0, np.eye(3), np.array(RIGID_OMEGA0))
    cfg = StepperConfig(dt=dt, t_end=t_end)
    return rb, init, cfg


def criterion_rigid_body() -> list:
    rb, init, cfg = rigid_body_run()
    traj = simulate(rb, init, cfg)
    monitor = reduction.noether_monitor(traj, rb)
    checks = [
        _check("energy relative drift", monitor.drift("H").max_rel_drift, 1e-7),
        _check("Casimir |mu|^2 relative drift", monitor.drift("casimir").max_rel_drift, 1e-7),
    ]
    for k in (1, 2, 3):
        checks.append(_check(f"spatial momentum JL{k} relative drift", monitor.drift(f"JL{k}").max_rel_drift, 1e-7))
    _, xi = simulate_lie_poisson(rb, init.mu, cfg)
    checks.append(_check("Euler-Poincare vs Lie-Poisson momenta", np.abs(traj.mu - xi).max(), 1e-9))
    return checks


def _pendulum_runs(dt=1e-3, t_end=5.0):
    pe = S.make_spherical_pendulum(**PENDULUM)
    x0 = np.array(PENDULUM_INIT["x"])
    om0 = np.array(PENDULUM_INIT["omega"])
    init = pe.state(0.0, x0, om0)
    traj = simulate(pe, init, StepperConfig(dt=dt, t_end=t_end))
    cart0 = oracle.CartesianState(x0, pe.anchor(x0, om0), PENDULUM["radius"])
    ref = oracle.simulate_cartesian(cart0, PENDULUM["mass"], PENDULUM["gravity"], dt, t_end)
    return pe, traj, ref


def criterion_pendulum() -> list:
    pe, traj, ref = _pendulum_runs()
    m = PENDULUM["mass"]
    pos = float(np.abs(traj.gamma - ref.x).max())
    pi_ref = m * np.cross(ref.x, ref.v)
    pi_err = float(np.abs(traj.mu - pi_ref).max())
    vert = drift_entry("pi_vertical", traj.invariants["pi_vertical"])
    return [
        _check("EP vs Cartesian oracle position error", pos, 1e-5),
        _check("pi = m x cross v identity", pi_err, 1e-8),
        _check("vertical momentum relative drift", vert.max_rel_drift, 1e-7),
        _check("oracle projection per step", ref.max_projection, 1e-9),
    ]


def heavy_top_system():
    p = HEAVY_TOP
    return S.make_heavy_top(p["I"], p["mass"], p["gravity"], p["com"])


def criterion_heavy_top() -> list:
    ht = heavy_top_system()
    init = ht.state(0.0, lie.axis_angle(HEAVY_TOP_INIT["rotation"]), np.array(HEAVY_TOP_INIT["omega"]))
    traj = simulate(ht, init, StepperConfig(dt=1e-3, t_end=10.0))
    monitor = reduction.noether_monitor(traj, ht)
    gamma2 = traj.invariants["gamma_norm2"]
    return [
        _check("|Gamma|^2 - 1 max deviation", np.abs(gamma2 - 1.0).max(), 1e-7),
        _check("<mu, Gamma> relative drift", monitor.drift("mu_dot_gamma").max_rel_drift, 1e-7),
        _check("vertical spatial momentum relative drift", monitor.drift("JL_vertical").max_rel_drift, 1e-7),
        _check("energy relative drift", monitor.drift("H").max_rel_drift, 1e-7),
        _check("extended invariance H = h_ext(J, K) (1000 points)", reduction.extended_invariance_defect(ht), 1e-10),
        _check(
            "plain invariance H = h(J) defect (must exceed)",
            reduction.symmetry_defect(ht),
            1e-2,
            below=False,
        ),
    ]


def criterion_equivalence() -> list:
    rb, init, cfg = rigid_body_run()
    rep = reduction.equivalence_check(rb, init, cfg)
    checks = [
        _check("Lie-Poisson vs Euler-Poincare flow", rep.ep_deviation, 1e-8),
        _check("Lie-Poisson vs canonical T*G flow", rep.spatial_deviation, 1e-8),
        _check("coadjoint orbit |xi|^2 drift", rep.casimir_drift, 1e-8),
    ]
    ht = heavy_top_system()
    try:
        reduction.equivalence_check(ht, ht.state(0.0, np.eye(3), np.ones(3)), StepperConfig(1e-3, 0.01))
        rejected = 0.0
    except reduction.SymmetryError:
        rejected = 1.0
    checks.append(_check("heavy top rejected by symmetry test", rejected, 0.5, below=False))
    return checks


def criterion_stationarity(seed: int = 0) -> list:
    rb, init, _ = rigid_body_run()
    traj = simulate(rb, init, StepperConfig(dt=1e-3, t_end=2.0))
    solution = oracle.variation_ratio(rb, traj, 1e-2, 1e-3, seed=seed)
    curve = oracle.random_admissible_curve(rb, np.eye(3), traj.t, np.random.default_rng(seed + 1))
    direction = oracle.residual_direction(rb, curve)
    other = oracle.variation_ratio(rb, curve, 1e-2, 1e-3, coeffs=direction)
    return [
        _range_check("solution |dI(1e-2)| / |dI(1e-3)|", solution, 80, 120),
        _range_check("non-solution |dI(1e-2)| / |dI(1e-3)|", other, 9, 11),
    ]


def force_checks(sys, seed: int = 0, points: int = 5, order: bool = True) -> list:
    """FD validation of the force map; ``order`` adds the O(eps^2) slope check."""
    rng = np.random.default_rng(seed)
    worst, slopes = 0.0, []
    for _ in range(points):
        x = S.random_point(sys, rng)
        X = rng.normal(size=sys.algebra_dim)
        worst = max(worst, oracle.fd_force_check(sys, x, X, 1e-6))
        if order:
            r4 = oracle.fd_force_check(sys, x, X, 1e-4, extended=True)
            r6 = oracle.fd_force_check(sys, x, X, 1e-6, extended=True)
            slopes.append(math.log10(r4 / r6) / 2)
    checks = [_check(f"{sys.name} force map vs FD at eps=1e-6", worst, 1e-6)]
    if order:
        lo, hi = min(slopes), max(slopes)
        checks.append(
            Check(
                f"{sys.name} FD convergence order (1e-4 to 1e-6)",
                bool(1.8 <= lo and hi <= 2.2),
                lo,
                2.2,
                f"slopes in [{lo:.3f}, {hi:.3f}], expected within [1.8, 2.2]",
            )
        )
    return checks


def _forces_rigid():
    return force_checks(S.make_free_rigid_body(RIGID_INERTIA), order=False)


def _forces_heavy():
    return force_checks(heavy_top_system())


def _forces_pendulum():
    return force_checks(S.make_spherical_pendulum(**PENDULUM))


def _forces_oscillator():
    # quadratic Lagrangian: central differences are exact, no truncation to measure
    return force_checks(S.make_harmonic_oscillator(), order=False)


def criterion_forces() -> list:
    return _forces_heavy() + _forces_pendulum() + _forces_oscillator() + _forces_rigid()


CRITERIA = {
    1: ("algebra", criterion_algebra),
    2: ("Euler-Lagrange degeneration", criterion_euler_lagrange),
    3: ("free rigid body", criterion_rigid_body),
    4: ("spherical pendulum", criterion_pendulum),
    5: ("heavy top", criterion_heavy_top),
    6: ("reduction equivalence", criterion_equivalence),
    7: ("variational stationarity", criterion_stationarity),
    8: ("force map validation", criterion_forces),
}

SUITES = {
    "algebra": [criterion_algebra],
    "euler-lagrange": [criterion_euler_lagrange, _forces_oscillator],
    "rigid-body": [criterion_rigid_body, criterion_equivalence, criterion_stationarity, _forces_rigid],
    "pendulum": [criterion_pendulum, _forces_pendulum],
    "heavy-top": [criterion_heavy_top, _forces_heavy],
}


def run_suite(name: str) -> tuple:
    """Run a named suite (or ``"all"``); returns ``(checks, seconds)``."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(name)
    start = time.perf_counter()
    checks = []
    for n in names:
        for fn in SUITES[n]:
            checks.extend(fn())
    return checks, time.perf_counter() - start
