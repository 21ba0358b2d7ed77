"""Time stepping for the Euler-Poincare, Lie-Poisson and reconstruction equations.

The evolved variables are the configuration ``gamma`` and the momentum
``mu = d2_lbar(gamma, V)``. Configurations on SO(3) or on a sphere are advanced
with a Runge-Kutta-Munthe-Kaas scheme: stages live in the Lie algebra and are
mapped back by the exponential, so the group (or sphere) is never left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import lie
from .lie import cross
from .systems import EPState, SystemSpec, omega_force

BLOWUP_LIMIT = 1e12

_STAGE_TIMES = {"rk4": (0.0, 0.5, 0.5, 1.0), "midpoint": (0.0, 0.5)}


class BlowUpError(RuntimeError):
    """Raised when the numerical solution leaves any sane range."""


class MissingHamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "rk4"
    reorthonormalize_every: int = 0
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.dt < self.t_end:
            raise ValueError("dt must be smaller than t_end")
        if self.scheme not in _STAGE_TIMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {sorted(_STAGE_TIMES)}")
        if self.reorthonormalize_every < 0:
            raise ValueError("reorthonormalize_every must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class Trajectory:
    """Recorded samples of an integration, stored column-wise."""

    system_id: str
    config: StepperConfig
    t: np.ndarray
    gamma: np.ndarray
    V: np.ndarray
    mu: np.ndarray
    invariants: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def samples(self) -> list:
        return [EPState(float(t), g, v, m) for t, g, v, m in zip(self.t, self.gamma, self.V, self.mu)]

    def state(self, k: int) -> EPState:
        return EPState(float(self.t[k]), self.gamma[k], self.V[k], self.mu[k])


def ep_rhs(sys: SystemSpec, state: EPState):
    """Right-hand sides ``(dmu, dgamma)`` of the Euler-Poincare equation and CC."""
    gamma = sys.check_point(state.gamma)
    V = np.asarray(state.V, dtype=float)
    mu = np.asarray(state.mu, dtype=float)
    if V.shape != (sys.algebra_dim,) or mu.shape != (sys.algebra_dim,):
        raise ValueError("state vectors do not match the algebra dimension")
    dmu = sys.coadjoint_sign * lie.ad_star(sys.sc, V, mu) + omega_force(sys, gamma, V)
    return dmu, sys.anchor(gamma, V)


def _dh(sys: SystemSpec):
    if sys.hamiltonian_h is None:
        raise MissingHamiltonianError(f"{sys.name} has no reduced Hamiltonian")
    if sys.dh is not None:
        return sys.dh
    h = sys.hamiltonian_h

    def dh(xi, step=1e-6):
        out = np.empty_like(xi)
        for i in range(xi.size):
            e = np.zeros_like(xi)
            e[i] = step
            out[i] = (h(xi + e) - h(xi - e)) / (2 * step)
        return out

    return dh


def lie_poisson_rhs(sys: SystemSpec, xi) -> np.ndarray:
    """Hamiltonian vector field ``-ad*_{dh(xi)} xi`` of the Lie-Poisson structure."""
    dh = _dh(sys)
    sc = sys.lp_sc if sys.lp_sc is not None else sys.sc
    xi = np.asarray(xi, dtype=float)
    return -lie.ad_star(sc, dh(xi), xi)


def rk4_step(rhs: Callable, y, dt: float):
    """Classical Runge-Kutta step for ``y' = rhs(y)`` on a flat array."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    y = np.asarray(y, dtype=float)
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    out = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise BlowUpError("non-finite derivative in rk4_step")
    return out


def reconstruct_step(gamma, V, dt: float, side: str = "left"):
    """Advance the configuration along the one-parameter subgroup of ``V``.

    ``side="left"``: ``exp(dt V) gamma`` (rotation matrices or sphere points).
    ``side="right"``: ``gamma exp(dt V)`` (body-frame velocities on SO(3)).
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape == (3, 3):
        if not lie.is_rotation(gamma):
            raise ValueError("reconstruct_step: gamma is not in SO(3)")
    elif gamma.shape != (3,):
        raise ValueError("reconstruct_step expects a rotation matrix or a point of R^3")
    E = lie.exp_group(dt * np.asarray(V, dtype=float))
    if side == "left":
        return E @ gamma
    if side == "right":
        if gamma.shape != (3, 3):
            raise ValueError("right reconstruction needs a rotation matrix")
        return gamma @ E
    raise ValueError(f"unknown side {side!r}")


def _dexpinv(kind: str):
    # inverse of the derivative of exp, truncated after the second bracket;
    # enough for fourth order since u = O(dt)
    if kind == "rigid":
        return lambda u, v: v + 0.5 * cross(u, v) + cross(u, cross(u, v)) / 12
    if kind == "sphere":
        return lambda u, v: v - 0.5 * cross(u, v) + cross(u, cross(u, v)) / 12
    return lambda u, v: v


class _Stepper:
    """Lie-group Runge-Kutta stepper bound to one system."""

    def __init__(self, sys: SystemSpec, scheme: str):
        self.sys = sys
        self.scheme = scheme
        self.c = _STAGE_TIMES[scheme]
        self.dexpinv = _dexpinv(sys.kind)
        c = sys.sc.c
        s = sys.coadjoint_sign
        if not c.any():
            self.coad = lambda V, mu: 0.0
        elif sys.sc.name == "so3":
            # ad*_V mu = V x mu for the cross-product bracket
            self.coad = lambda V, mu: s * cross(V, mu)
        else:
            self.coad = lambda V, mu: -s * (mu @ (V @ c))
        self.force = sys.force
        if self.force is None:
            from .systems import omega_force_from_d1

            self.force = lambda x, V: omega_force_from_d1(sys, x, V)

    def mu_rate(self, x, mu):
        V = self.sys.legendre_inverse(x, mu)
        return V, self.coad(V, mu) + self.force(x, V)

    def coupled(self, x0, mu0, h):
        flow, dexpinv, rate = self.sys.flow, self.dexpinv, self.mu_rate
        V1, m1 = rate(x0, mu0)
        u2 = 0.5 * h * V1
        V2, m2 = rate(flow(x0, u2), mu0 + 0.5 * h * m1)
        k2 = dexpinv(u2, V2)
        if self.scheme == "midpoint":
            return flow(x0, h * k2), mu0 + h * m2
        u3 = 0.5 * h * k2
        V3, m3 = rate(flow(x0, u3), mu0 + 0.5 * h * m2)
        k3 = dexpinv(u3, V3)
        u4 = h * k3
        V4, m4 = rate(flow(x0, u4), mu0 + h * m3)
        k4 = dexpinv(u4, V4)
        u = h / 6 * (V1 + 2 * k2 + 2 * k3 + k4)
        return flow(x0, u), mu0 + h / 6 * (m1 + 2 * m2 + 2 * m3 + m4)

    def reduced_mu(self, mu0, h, x):
        # d1_lbar vanishes: the momentum equation does not involve gamma
        rate = lambda m: self.mu_rate(x, m)[1]
        m1 = rate(mu0)
        m2 = rate(mu0 + 0.5 * h * m1)
        if self.scheme == "midpoint":
            return mu0 + h * m2
        m3 = rate(mu0 + 0.5 * h * m2)
        m4 = rate(mu0 + h * m3)
        return mu0 + h / 6 * (m1 + 2 * m2 + 2 * m3 + m4)

    def reconstruct(self, x0, Vs, h):
        """Lie-group RK for ``gamma' = anchor(gamma, V(t))`` given V at the stage times."""
        dexpinv = self.dexpinv
        u2 = 0.5 * h * Vs[0]
        k2 = dexpinv(u2, Vs[1])
        if self.scheme == "midpoint":
            return self.sys.flow(x0, h * k2)
        u3 = 0.5 * h * k2
        k3 = dexpinv(u3, Vs[2])
        k4 = dexpinv(h * k3, Vs[3])
        return self.sys.flow(x0, h / 6 * (Vs[0] + 2 * k2 + 2 * k3 + k4))


def _hermite(y0, d0, y1, d1, h, theta):
    t2, t3 = theta * theta, theta**3
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + theta) * h * d0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * d1
    )


def _check_blowup(t, *arrays):
    for a in arrays:
        # NaN fails the comparison as well
        if not np.abs(a).max() <= BLOWUP_LIMIT:
            raise BlowUpError(f"solution blew up near t = {t:.6g} (|value| > {BLOWUP_LIMIT:.0e})")


def _n_steps(t0, cfg: StepperConfig) -> int:
    n = int(round((cfg.t_end - t0) / cfg.dt))
    if n < 1:
        raise ValueError("t_end must exceed the initial time by at least one step")
    return n


def simulate(sys: SystemSpec, init: EPState, cfg: StepperConfig, reduced: bool | None = None) -> Trajectory:
    """Integrate the Euler-Poincare equation with reconstruction.

    With ``reduced=None`` the Lagrangian-reduction mode (momentum first, then
    configuration) is used exactly when the system declares ``d1_lbar = 0``.
    """
    x = sys.check_point(init.gamma).copy()
    mu = np.asarray(init.mu, dtype=float).copy()
    if np.abs(sys.d2_lbar(x, np.asarray(init.V, dtype=float)) - mu).max() > 1e-10 * max(1.0, np.abs(mu).max()):
        raise ValueError("initial state: mu does not match d2_lbar(gamma, V)")
    if reduced is None:
        reduced = sys.d1_vanishes
    if reduced and not sys.d1_vanishes:
        raise ValueError("reduced mode needs a system with d1_lbar = 0")

    st = _Stepper(sys, cfg.scheme)
    h = cfg.dt
    n = _n_steps(init.t, cfg)
    nrec = n // cfg.record_every + 1
    gam = np.empty((nrec,) + x.shape)
    mus = np.empty((nrec, mu.size))
    gam[0], mus[0] = x, mu

    k = 1
    for step in range(1, n + 1):
        if reduced:
            V0, d0 = st.mu_rate(x, mu)
            mu1 = st.reduced_mu(mu, h, x)
            V1, d1 = st.mu_rate(x, mu1)
            Vs = [
                V0 if c == 0 else V1 if c == 1 else sys.legendre_inverse(x, _hermite(mu, d0, mu1, d1, h, c))
                for c in st.c
            ]
            x, mu = st.reconstruct(x, Vs, h), mu1
        else:
            x, mu = st.coupled(x, mu, h)
        _check_blowup(init.t + step * h, x, mu)
        if cfg.reorthonormalize_every and sys.kind == "rigid" and step % cfg.reorthonormalize_every == 0:
            x = lie.reorthonormalize(x)
        if step % cfg.record_every == 0:
            gam[k], mus[k] = x, mu
            k += 1

    t = init.t + h * cfg.record_every * np.arange(nrec)
    Vs = np.array([sys.legendre_inverse(g, m) for g, m in zip(gam, mus)])
    traj = Trajectory(sys.name, cfg, t, gam, Vs, mus)
    traj.invariants = record_invariants(sys, traj)
    return traj


def record_invariants(sys: SystemSpec, traj: Trajectory) -> dict:
    return {
        name: np.array([f(g, m) for g, m in zip(traj.gamma, traj.mu)], dtype=float)
        for name, f in sys.invariants.items()
    }


def simulate_lie_poisson(sys: SystemSpec, xi0, cfg: StepperConfig, t0: float = 0.0):
    """RK4 integration of the Lie-Poisson equation; returns ``(t, xi)`` arrays."""
    xi = np.asarray(xi0, dtype=float).copy()
    dh = _dh(sys)
    sc = sys.lp_sc if sys.lp_sc is not None else sys.sc
    c = sc.c

    def rhs(y):
        # -ad*_{dh} y = (y @ ad_{dh})
        return y @ (dh(y) @ c)

    n = _n_steps(t0, cfg)
    nrec = n // cfg.record_every + 1
    out = np.empty((nrec, xi.size))
    out[0] = xi
    k = 1
    for step in range(1, n + 1):
        xi = rk4_step(rhs, xi, cfg.dt)
        if step % cfg.record_every == 0:
            _check_blowup(t0 + step * cfg.dt, xi)
            out[k] = xi
            k += 1
    return t0 + cfg.dt * cfg.record_every * np.arange(nrec), out
