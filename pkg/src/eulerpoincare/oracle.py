"""Reference computations that do not go through the Euler-Poincare machinery."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import lie
from .integrators import StepperConfig, Trajectory, record_invariants, simulate
from .lie import cross
from .systems import EPState, SystemSpec, omega_force, omega_force_from_d1


@dataclass(frozen=True)
class CartesianState:
    x: np.ndarray
    v: np.ndarray
    constraint_radius: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.v, dtype=float)
        R = float(self.constraint_radius)
        if abs(np.linalg.norm(x) - R) >= 1e-9:
            raise ValueError("cartesian state: position is off the sphere")
        if abs(x @ v) >= 1e-9 * R * max(np.linalg.norm(v), 1.0):
            raise ValueError("cartesian state: velocity is not tangent")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "constraint_radius", R)


def _cartesian_accel(x, v, g, R2):
    lam = -(g @ x + v @ v) / R2
    return g + lam * x


def pendulum_cartesian_rhs(s: CartesianState, m: float, g):
    """``(dx, dv)`` for a point mass held on the sphere by a normal reaction.

    The mass only scales the multiplier force, so the motion does not depend on it.
    """
    if m <= 0:
        raise ValueError("mass must be positive")
    g = np.asarray(g, dtype=float)
    return s.v.copy(), _cartesian_accel(s.x, s.v, g, s.constraint_radius**2)


@dataclass
class CartesianRun:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    max_projection: float


def simulate_cartesian(s0: CartesianState, m: float, g, dt: float, t_end: float) -> CartesianRun:
    """RK4 with a projection back onto the constraint after every step."""
    g = np.asarray(g, dtype=float)
    R = s0.constraint_radius
    R2 = R * R
    x, v = s0.x.copy(), s0.v.copy()
    n = int(round(t_end / dt))
    xs = np.empty((n + 1, 3))
    vs = np.empty((n + 1, 3))
    xs[0], vs[0] = x, v
    worst = 0.0
    for k in range(1, n + 1):
        a1 = _cartesian_accel(x, v, g, R2)
        x2, v2 = x + 0.5 * dt * v, v + 0.5 * dt * a1
        a2 = _cartesian_accel(x2, v2, g, R2)
        x3, v3 = x + 0.5 * dt * v2, v + 0.5 * dt * a2
        a3 = _cartesian_accel(x3, v3, g, R2)
        x4, v4 = x + dt * v3, v + dt * a3
        a4 = _cartesian_accel(x4, v4, g, R2)
        xn = x + dt / 6 * (v + 2 * v2 + 2 * v3 + v4)
        vn = v + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        x = xn * (R / np.sqrt(xn @ xn))
        v = vn - (vn @ x) / R2 * x
        worst = max(worst, float(np.abs(x - xn).max()), float(np.abs(v - vn).max()))
        xs[k], vs[k] = x, v
    return CartesianRun(dt * np.arange(n + 1), xs, vs, worst)


def _flow_point(sys: SystemSpec, x, X, s):
    if sys.kind == "rigid":
        return x @ lie.exp_group(s * X)
    if sys.kind == "sphere":
        return lie.exp_group(s * X) @ x
    return x + s * X


def fd_force_check(sys: SystemSpec, x, X, eps: float, extended: bool = False) -> float:
    """Largest gap between ``omega_force`` and central differences of ``lbar``.

    The k-th difference moves ``x`` along the flow of the k-th basis field for
    times ``+eps`` and ``-eps``. With ``extended=True`` the whole comparison is
    evaluated in ``np.longdouble``, which pushes the round-off floor below the
    truncation error for small ``eps``.
    """
    if not 1e-8 <= eps <= 1e-4:
        raise ValueError("eps must lie in [1e-8, 1e-4]")
    x = sys.check_point(x)
    X = np.asarray(X, dtype=float)
    if extended:
        dtype = np.longdouble
        x, X = x.astype(dtype), X.astype(dtype)
        force = sys.force(x, X) if sys.force is not None else omega_force_from_d1(sys, x, X)
    else:
        dtype = np.float64
        force = omega_force(sys, x, X)
    e = dtype(eps)
    worst = 0.0
    for k, ek in enumerate(np.eye(sys.algebra_dim, dtype=dtype)):
        plus = sys.lbar(_flow_point(sys, x, ek, e), X)
        minus = sys.lbar(_flow_point(sys, x, ek, -e), X)
        worst = max(worst, float(abs((plus - minus) / (2 * e) - force[k])))
    return worst


def richardson_reference(sys: SystemSpec, init: EPState, cfg: StepperConfig, factor: int = 100) -> Trajectory:
    """Same integrator at ``dt / factor``, sampled on the grid of ``cfg``."""
    fine = replace(cfg, dt=cfg.dt / factor, record_every=cfg.record_every * factor)
    return simulate(sys, init, fine)


def discrete_action(sys: SystemSpec, traj: Trajectory) -> float:
    """Trapezoidal approximation of the action integral of ``lbar``."""
    if len(traj) < 2:
        raise ValueError("trajectory too short for an action")
    vals = np.array([sys.lbar(g, v) for g, v in zip(traj.gamma, traj.V)])
    return _trapezoid(vals, traj.t)


def _trapezoid(vals, t):
    vals = np.asarray(vals)
    dt = np.diff(t).reshape((-1,) + (1,) * (vals.ndim - 1))
    out = np.sum(0.5 * (vals[1:] + vals[:-1]) * dt, axis=0)
    return float(out) if out.ndim == 0 else out


def _perturbation(t, coeffs):
    """``dw(t) = sum_j c_j sin(j pi s)``, ``s = (t - t0) / T``; vanishes at both ends."""
    t0, T = t[0], t[-1] - t[0]
    s = (t - t0) / T
    j = np.arange(1, len(coeffs) + 1)
    arg = np.pi * np.outer(s, j)
    dw = np.sin(arg) @ coeffs
    ddw = (np.cos(arg) * (np.pi * j / T)) @ coeffs
    return dw, ddw


def perturbed_curve(sys: SystemSpec, traj: Trajectory, eps: float, coeffs, mode: str = "exact"):
    """Admissible curve ``(gamma_eps, V_eps)`` with endpoints held fixed.

    ``gamma_eps`` moves along the flow of ``eps dw(t)``. In ``"exact"`` mode
    ``V_eps`` is the velocity that keeps the compatibility condition exact; in
    ``"linear"`` mode it is ``V + eps (dw' + s [dw, V])`` with ``s`` the
    coadjoint sign of the action.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    dw, ddw = _perturbation(traj.t, coeffs)
    gam, Vs = [], []
    for g, V, w, dwdt in zip(traj.gamma, traj.V, eps * dw, eps * ddw):
        if sys.kind == "euclidean":
            gam.append(g + w)
            Vs.append(V + dwdt)
            continue
        E = lie.exp_group(w)
        gam.append(g @ E if sys.kind == "rigid" else E @ g)
        if mode == "linear":
            Vs.append(V + dwdt + sys.coadjoint_sign * cross(w, V))
        elif sys.kind == "rigid":
            Vs.append(E.T @ V + lie.right_jacobian(w) @ dwdt)
        else:
            Vs.append(E @ V + lie.left_jacobian(w) @ dwdt)
    if mode not in ("exact", "linear"):
        raise ValueError(f"unknown perturbation mode {mode!r}")
    return np.array(gam), np.array(Vs)


def action_variation(sys: SystemSpec, traj: Trajectory, eps: float, coeffs, mode: str = "exact") -> float:
    """``I(gamma_eps) - I(gamma)`` for the trapezoidal action."""
    if len(traj) < 10:
        raise ValueError("trajectory too short (need at least 10 samples)")
    gam, Vs = perturbed_curve(sys, traj, eps, coeffs, mode)
    vals = np.array([sys.lbar(g, v) for g, v in zip(gam, Vs)])
    return _trapezoid(vals, traj.t) - discrete_action(sys, traj)


def random_coefficients(sys: SystemSpec, rng: np.random.Generator, modes: int = 3) -> np.ndarray:
    return rng.normal(size=(modes, sys.algebra_dim))


def stationarity_check(sys: SystemSpec, traj: Trajectory, eps: float, seed: int = 0, mode: str = "exact") -> float:
    """``|Delta I| / eps^2`` for a random endpoint-fixed perturbation.

    Stays bounded as ``eps -> 0`` on a solution and grows like ``1/eps`` otherwise.
    """
    if eps == 0:
        return 0.0
    coeffs = random_coefficients(sys, np.random.default_rng(seed))
    return abs(action_variation(sys, traj, eps, coeffs, mode)) / eps**2


def ep_residual(sys: SystemSpec, traj: Trajectory) -> np.ndarray:
    """Pointwise defect ``mu' - s ad*_V mu - Omega`` with ``mu'`` by finite differences."""
    mu_dot = np.gradient(traj.mu, traj.t, axis=0, edge_order=2)
    coad = np.array([sys.coadjoint_sign * lie.ad_star(sys.sc, v, m) for v, m in zip(traj.V, traj.mu)])
    force = np.array([omega_force(sys, g, v) for g, v in zip(traj.gamma, traj.V)])
    return mu_dot - coad - force


def residual_direction(sys: SystemSpec, traj: Trajectory, modes: int = 3) -> np.ndarray:
    """Unit sine-mode coefficients of the projected residual.

    Along this direction the first variation of the action is as large as the
    modes allow, so a non-solution shows its linear term clearly.
    """
    r = ep_residual(sys, traj)
    s = (traj.t - traj.t[0]) / (traj.t[-1] - traj.t[0])
    c = np.array([_trapezoid(r * np.sin(j * np.pi * s)[:, None], traj.t) for j in range(1, modes + 1)])
    norm = np.linalg.norm(c)
    if norm == 0:
        raise ValueError("trajectory has no residual to follow")
    return c / norm


def variation_ratio(
    sys: SystemSpec, traj: Trajectory, eps_large=1e-2, eps_small=1e-3, seed=0, mode="exact", coeffs=None
) -> float:
    """``|Delta I(eps_large)| / |Delta I(eps_small)|`` for one perturbation direction.

    The direction is random (from ``seed``) unless ``coeffs`` is given.
    """
    if coeffs is None:
        coeffs = random_coefficients(sys, np.random.default_rng(seed))
    big = action_variation(sys, traj, eps_large, coeffs, mode)
    small = action_variation(sys, traj, eps_small, coeffs, mode)
    return abs(big) / abs(small)


def random_admissible_curve(sys: SystemSpec, gamma0, t, rng: np.random.Generator, modes: int = 3) -> Trajectory:
    """Smooth random ``V(t)`` with ``gamma`` rebuilt from it; generally not a solution."""
    t = np.asarray(t, dtype=float)
    T = t[-1] - t[0]
    a = rng.normal(size=(modes, sys.algebra_dim))
    j = np.arange(1, modes + 1)
    V = 1.0 + np.cos(2 * np.pi * np.outer((t - t[0]) / T, j)) @ a
    gam = [np.asarray(gamma0, dtype=float)]
    for k in range(len(t) - 1):
        h = t[k + 1] - t[k]
        # midpoint value of a smooth curve: second-order accurate reconstruction
        Vm = 0.5 * (V[k] + V[k + 1])
        gam.append(_flow_point(sys, gam[-1], Vm, h))
    gam = np.array(gam)
    mu = np.array([sys.d2_lbar(g, v) for g, v in zip(gam, V)])
    cfg = StepperConfig(dt=float(t[1] - t[0]), t_end=float(t[-1]))
    traj = Trajectory(sys.name + "-random", cfg, t, gam, V, mu)
    traj.invariants = record_invariants(sys, traj)
    return traj
