"""Mechanical systems written in Poincare's variables on Q x g.

Each system provides the anchor map ``phi(x, X) = X_Q(x)``, the reduced
Lagrangian ``lbar = L o phi``, its partial differentials, a Legendre inverse
``mu -> X`` and the quantities monitored along trajectories.

Three configuration kinds are supported:

``rigid``
    Q = SO(3) with the action of SO(3) on the right, ``phi(x, X) = x hat(X)``
    (body angular velocity).
``sphere``
    Q = sphere of radius R with the rotation action on the left,
    ``phi(x, X) = X cross x``.
``euclidean``
    Q = R^n with the abelian algebra R^n acting by translations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import lie
from .lie import cross, hat

KINDS = ("rigid", "sphere", "euclidean")


@dataclass(frozen=True)
class InertiaOperator:
    """Symmetric positive definite inertia matrix ``I_flat`` in the algebra basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim == 1:
            m = np.diag(m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("inertia must be a square matrix or a diagonal vector")
        if np.abs(m - m.T).max() > 1e-12:
            raise ValueError("inertia matrix is not symmetric")
        if np.linalg.eigvalsh(m).min() <= 0:
            raise ValueError("inertia matrix is not positive definite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_inverse", np.linalg.inv(m))

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse


@dataclass(frozen=True)
class EPState:
    """A point ``(gamma, V)`` of an admissible curve, with ``mu = d2_lbar(gamma, V)``."""

    t: float
    gamma: np.ndarray
    V: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True, eq=False)
class SystemSpec:
    name: str
    sc: lie.StructureConstants
    kind: str
    config_dim: int
    lbar: Callable
    d1_lbar: Callable
    d2_lbar: Callable
    legendre_inverse: Callable
    parameters: dict = field(default_factory=dict)
    # analytic force map, optional; falls back to the d1_lbar formula
    force: Optional[Callable] = None
    # Lie-Poisson data on the reduced space: hamiltonian_h(xi), dh(xi), lp_sc
    hamiltonian_h: Optional[Callable] = None
    dh: Optional[Callable] = None
    lp_sc: Optional[lie.StructureConstants] = None
    reduced_point: Optional[Callable] = None
    casimirs: dict = field(default_factory=dict)
    # name -> f(gamma, mu); every entry is recorded along trajectories
    invariants: dict = field(default_factory=dict)
    first_integrals: tuple = ()
    d1_vanishes: bool = False
    underdetermined: bool = False
    lift: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown configuration kind {self.kind!r}")

    @property
    def algebra_dim(self) -> int:
        return self.sc.dim

    @property
    def coadjoint_sign(self) -> int:
        """Sign ``s`` in ``d mu/dt = s ad*_V mu + Omega`` for the stored bracket.

        +1 for left actions (and abelian), -1 for the right action on SO(3).
        """
        return -1 if self.kind == "rigid" else 1

    def anchor(self, x, X):
        if self.kind == "rigid":
            return x @ hat(X)
        if self.kind == "sphere":
            return cross(X, x)
        return np.asarray(X, dtype=float)

    def flow(self, x, X, s=1.0):
        """Flow of the fundamental field of ``X`` for time ``s`` from ``x``."""
        if self.kind == "rigid":
            return x @ lie.exp_group(s * np.asarray(X))
        if self.kind == "sphere":
            return lie.exp_group(s * np.asarray(X)) @ x
        return x + s * np.asarray(X)

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "rigid":
            if not lie.is_rotation(x):
                raise ValueError(f"{self.name}: configuration is not a rotation matrix")
        elif self.kind == "sphere":
            R = self.parameters["radius"]
            if x.shape != (3,) or abs(np.linalg.norm(x) - R) > 1e-9:
                raise ValueError(f"{self.name}: configuration is off the sphere of radius {R}")
        elif x.shape != (self.config_dim,):
            raise ValueError(f"{self.name}: configuration must have length {self.config_dim}")
        return x

    def energy(self, x, mu) -> float:
        """Hamiltonian ``<mu, V> - lbar(x, V)`` at ``V = legendre_inverse(x, mu)``."""
        V = self.legendre_inverse(x, mu)
        return float(mu @ V - self.lbar(x, V))

    def state(self, t, gamma, V) -> EPState:
        gamma = self.check_point(gamma)
        V = np.asarray(V, dtype=float)
        return EPState(float(t), gamma, V, self.d2_lbar(gamma, V))

    def state_from_momentum(self, t, gamma, mu) -> EPState:
        gamma = self.check_point(gamma)
        mu = np.asarray(mu, dtype=float)
        return EPState(float(t), gamma, self.legendre_inverse(gamma, mu), mu)


def omega_force(sys: SystemSpec, x, X) -> np.ndarray:
    """Poincare's force map ``p_g* o phi^t o d1_lbar`` evaluated at ``(x, X)``."""
    x = sys.check_point(x)
    X = np.asarray(X, dtype=float)
    if sys.force is not None:
        return sys.force(x, X)
    return omega_force_from_d1(sys, x, X)


def omega_force_from_d1(sys: SystemSpec, x, X) -> np.ndarray:
    """Componentwise ``Omega_k = <d1_lbar(x, X), (X_k)_Q(x)>``."""
    d1 = sys.d1_lbar(x, X)
    basis = np.eye(sys.algebra_dim)
    return np.array([np.sum(d1 * sys.anchor(x, e)) for e in basis])


def _common_rigid(I: InertiaOperator):
    Iflat, Iinv = I.matrix, I.inverse

    def d2(x, X):
        return Iflat @ X

    def legendre_inverse(x, mu):
        return Iinv @ mu

    return Iflat, Iinv, d2, legendre_inverse


def make_free_rigid_body(I) -> SystemSpec:
    """Euler top: ``lbar(x, X) = 1/2 <I X, X>`` on SO(3), body angular velocity."""
    if not isinstance(I, InertiaOperator):
        I = InertiaOperator(I)
    Iflat, Iinv, d2, legendre_inverse = _common_rigid(I)

    def lbar(x, X):
        return 0.5 * (X @ Iflat @ X)

    def d1(x, X):
        return np.zeros((3, 3))

    def force(x, X):
        return np.zeros(3)

    def h(xi):
        return 0.5 * (xi @ Iinv @ xi)

    def dh(xi):
        return Iinv @ xi

    invariants = {
        "H": lambda g, mu: 0.5 * (mu @ Iinv @ mu),
        "casimir": lambda g, mu: mu @ mu,
    }
    for k in range(3):
        invariants[f"JL{k + 1}"] = lambda g, mu, k=k: g[k] @ mu

    return SystemSpec(
        name="free-rigid-body",
        sc=lie.so3(),
        kind="rigid",
        config_dim=3,
        lbar=lbar,
        d1_lbar=d1,
        d2_lbar=d2,
        legendre_inverse=legendre_inverse,
        parameters={"inertia": np.diag(Iflat).copy()},
        force=force,
        hamiltonian_h=h,
        dh=dh,
        lp_sc=lie.so3(),
        reduced_point=lambda g, mu: np.asarray(mu, dtype=float),
        casimirs={"casimir": lambda xi: xi @ xi},
        invariants=invariants,
        first_integrals=("H", "casimir", "JL1", "JL2", "JL3"),
        d1_vanishes=True,
    )


def make_heavy_top(I, mass: float, gravity: float, com, vertical=(0.0, 0.0, 1.0)) -> SystemSpec:
    """Rigid body with a fixed point in uniform gravity.

    ``gravity`` is the magnitude g0 of the acceleration, ``com`` the body-frame
    vector from the fixed point to the center of mass and ``vertical`` the
    upward unit vector in space. The weight is ``P = -mass * gravity * vertical``
    and ``U(R) = -<P, R com>``.
    """
    if not isinstance(I, InertiaOperator):
        I = InertiaOperator(I)
    if mass <= 0:
        raise ValueError("mass must be positive")
    a = np.asarray(com, dtype=float)
    if np.linalg.norm(a) == 0:
        raise ValueError("center of mass offset must be nonzero")
    e = np.asarray(vertical, dtype=float)
    e = e / np.linalg.norm(e)
    Iflat, Iinv, d2, legendre_inverse = _common_rigid(I)
    P = -mass * gravity * e
    mga = mass * gravity * a

    def potential(x):
        return -(P @ (x @ a))

    def lbar(x, X):
        return 0.5 * (X @ Iflat @ X) - potential(x)

    def d1(x, X):
        return np.outer(P, a)

    def force(x, X):
        return cross(x.T @ e, mga)

    def h(xi):
        mu, Gamma = xi[:3], xi[3:]
        return 0.5 * (mu @ Iinv @ mu) + mga @ Gamma

    def dh(xi):
        return np.concatenate([Iinv @ xi[:3], mga])

    def reduced_point(g, mu):
        return np.concatenate([mu, g.T @ e])

    invariants = {
        "H": lambda g, mu: 0.5 * (mu @ Iinv @ mu) + potential(g),
        "gamma_norm2": lambda g, mu: (g.T @ e) @ (g.T @ e),
        "mu_dot_gamma": lambda g, mu: mu @ (g.T @ e),
        "JL_vertical": lambda g, mu: e @ (g @ mu),
    }
    return SystemSpec(
        name="heavy-top",
        sc=lie.so3(),
        kind="rigid",
        config_dim=3,
        lbar=lbar,
        d1_lbar=d1,
        d2_lbar=d2,
        legendre_inverse=legendre_inverse,
        parameters={
            "inertia": np.diag(Iflat).copy(),
            "mass": float(mass),
            "gravity": float(gravity),
            "com": a.copy(),
            "vertical": e.copy(),
        },
        force=force,
        hamiltonian_h=h,
        dh=dh,
        lp_sc=lie.semidirect_so3_r3(),
        reduced_point=reduced_point,
        casimirs={
            "gamma_norm2": lambda xi: xi[3:] @ xi[3:],
            "mu_dot_gamma": lambda xi: xi[:3] @ xi[3:],
        },
        invariants=invariants,
        first_integrals=("H", "gamma_norm2", "mu_dot_gamma", "JL_vertical"),
    )


def heavy_top_potential(sys: SystemSpec, x) -> float:
    p = sys.parameters
    P = -p["mass"] * p["gravity"] * p["vertical"]
    return float(-(P @ (x @ p["com"])))


def make_spherical_pendulum(mass: float, radius: float, gravity) -> SystemSpec:
    """Point mass on a sphere, SO(3) acting by rotations (r = 3 > n = 2).

    ``gravity`` is the acceleration vector. The potential term ``m g.x`` of the
    Lagrangian is kept in ``lbar``.
    """
    if mass <= 0 or radius <= 0:
        raise ValueError("mass and radius must be positive")
    m, R = float(mass), float(radius)
    g = np.asarray(gravity, dtype=float)
    gnorm = np.linalg.norm(g)
    down = g / gnorm if gnorm > 0 else np.array([0.0, 0.0, -1.0])

    def lbar(x, X):
        xX = X @ x
        return 0.5 * m * (R * R * (X @ X) - xX * xX) + m * (g @ x)

    def d1(x, X):
        return -m * (X @ x) * X + m * g

    def d2(x, X):
        return m * R * R * X - m * (x @ X) * x

    def legendre_inverse(x, pi):
        # minimal-norm lift: the solution orthogonal to the isotropy line of x
        return (pi - (pi @ x) / (R * R) * x) / (m * R * R)

    def force(x, X):
        return m * cross(x, g) - m * (X @ x) * cross(x, X)

    def lift(x, v):
        return cross(x, v) / (R * R)

    def energy(x, pi):
        Om = legendre_inverse(x, pi)
        return 0.5 * m * R * R * (Om @ Om) - m * (g @ x)

    invariants = {
        "H": energy,
        "pi_vertical": lambda x, pi: pi @ down,
        "radius": lambda x, pi: np.sqrt(x @ x),
    }
    return SystemSpec(
        name="spherical-pendulum",
        sc=lie.so3(),
        kind="sphere",
        config_dim=2,
        lbar=lbar,
        d1_lbar=d1,
        d2_lbar=d2,
        legendre_inverse=legendre_inverse,
        parameters={"mass": m, "radius": R, "gravity": g.copy()},
        force=force,
        invariants=invariants,
        first_integrals=("H", "pi_vertical"),
        underdetermined=True,
        lift=lift,
    )


def _central_gradient(f, x, h):
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        grad.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return grad


def make_abelian_system(n: int, L, d1=None, d2=None, legendre_inverse=None, name="abelian") -> SystemSpec:
    """Euler-Lagrange system on R^n seen through the abelian algebra R^n.

    ``L(x, xdot)`` is any smooth Lagrangian. Missing derivatives are taken by
    central differences, and a missing Legendre inverse by Newton iteration.
    """
    if n < 1:
        raise ValueError("n must be positive")
    h = 1e-5

    def lbar(x, X):
        return L(np.asarray(x, dtype=float), np.asarray(X, dtype=float))

    if d1 is None:
        def d1(x, X):
            return _central_gradient(lambda y: lbar(y, X), x, h)

    if d2 is None:
        def d2(x, X):
            return _central_gradient(lambda Y: lbar(x, Y), X, h)

    if legendre_inverse is None:
        def legendre_inverse(x, mu, tol=1e-12, maxiter=50):
            X = np.zeros(n)
            for _ in range(maxiter):
                r = d2(x, X) - mu
                if np.abs(r).max() < tol:
                    break
                J = np.column_stack(
                    [(d2(x, X + h * e) - d2(x, X - h * e)) / (2 * h) for e in np.eye(n)]
                )
                X = X - np.linalg.solve(J, r)
            return X

    def energy(x, mu):
        X = legendre_inverse(x, mu)
        return mu @ X - lbar(x, X)

    return SystemSpec(
        name=name,
        sc=lie.abelian(n),
        kind="euclidean",
        config_dim=n,
        lbar=lbar,
        d1_lbar=d1,
        d2_lbar=d2,
        legendre_inverse=legendre_inverse,
        invariants={"H": energy},
        first_integrals=("H",),
    )


def make_harmonic_oscillator(mass: float = 1.0, stiffness: float = 1.0) -> SystemSpec:
    """``L = m xdot^2 / 2 - k x^2 / 2`` on R with analytic derivatives."""
    if mass <= 0 or stiffness <= 0:
        raise ValueError("mass and stiffness must be positive")
    m, k = float(mass), float(stiffness)
    sys = make_abelian_system(
        1,
        lambda x, v: 0.5 * m * (v @ v) - 0.5 * k * (x @ x),
        d1=lambda x, X: -k * np.asarray(x, dtype=float),
        d2=lambda x, X: m * np.asarray(X, dtype=float),
        legendre_inverse=lambda x, mu: np.asarray(mu, dtype=float) / m,
        name="abelian-oscillator",
    )
    return SystemSpec(
        **{**sys.__dict__, "parameters": {"mass": m, "stiffness": k}, "force": lambda x, X: -k * x}
    )


def check_system(sys: SystemSpec, samples: int = 5, seed: int = 0, step: float = 1e-6) -> dict:
    """Cross-check anchor linearity and the partial differentials by finite differences.

    Returns the largest residual of each check over random sample points.
    """
    rng = np.random.default_rng(seed)
    r = sys.algebra_dim
    out = {"anchor_linearity": 0.0, "d1_lbar": 0.0, "d2_lbar": 0.0}
    for _ in range(samples):
        x = random_point(sys, rng)
        X, Y = rng.normal(size=r), rng.normal(size=r)
        a, b = rng.normal(size=2)
        lin = sys.anchor(x, a * X + b * Y) - a * sys.anchor(x, X) - b * sys.anchor(x, Y)
        out["anchor_linearity"] = max(out["anchor_linearity"], float(np.abs(lin).max()))

        fd2 = _central_gradient(lambda Z: sys.lbar(x, Z), X, step)
        out["d2_lbar"] = max(out["d2_lbar"], float(np.abs(fd2 - sys.d2_lbar(x, X)).max()))

        D = rng.normal(size=np.shape(x))
        fd1 = (sys.lbar(x + step * D, X) - sys.lbar(x - step * D, X)) / (2 * step)
        out["d1_lbar"] = max(out["d1_lbar"], abs(fd1 - float(np.sum(sys.d1_lbar(x, X) * D))))
    return out


def random_point(sys: SystemSpec, rng: np.random.Generator):
    if sys.kind == "rigid":
        return lie.random_rotation(rng)
    if sys.kind == "sphere":
        v = rng.normal(size=3)
        return sys.parameters["radius"] * v / np.linalg.norm(v)
    return rng.normal(size=sys.config_dim)
