"""Momentum maps on T*SO(3) and reduction diagnostics.

Phase points are stored left-trivialized: a base point ``g`` and the body
momentum ``mu``. ``J^R(g, mu) = mu`` is then read off directly, and
``J^L(g, mu) = Ad*_g mu = g mu`` is the spatial momentum.

For the rigid bodies in :mod:`systems` the Hamiltonian is invariant under left
translations ``g -> k g``. Those translations leave ``J^R`` unchanged, so the
Hamiltonian factors through ``J^R`` (the Lie-Poisson reduction map), while
``J^L`` is the Noether first integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lie
from .integrators import StepperConfig, Trajectory, _dexpinv, _n_steps, simulate, simulate_lie_poisson
from .report import InvariantReport, drift_entry
from .systems import EPState, SystemSpec


class SymmetryError(ValueError):
    """The Hamiltonian lacks the symmetry a reduction check relies on."""


@dataclass(frozen=True)
class CotangentPoint:
    g: np.ndarray
    mu_body: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if not lie.is_rotation(g):
            raise ValueError("cotangent point: base is not in SO(3)")
        mu = np.asarray(self.mu_body, dtype=float)
        if mu.shape != (3,):
            raise ValueError("cotangent point: body momentum must be a 3-vector")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "mu_body", mu)


@dataclass(frozen=True)
class ExtendedMomentum:
    jl: np.ndarray
    jr: np.ndarray
    k: np.ndarray


def momentum_right(zeta: CotangentPoint) -> np.ndarray:
    """``J^R``: the stored body momentum (identity in the left trivialization)."""
    return zeta.mu_body.copy()


def momentum_left(zeta: CotangentPoint) -> np.ndarray:
    """``J^L = Ad*_g J^R``, the spatial angular momentum."""
    return lie.Ad_star(zeta.g, zeta.mu_body)


def momentum_restricted(zeta: CotangentPoint, subalgebra_basis) -> np.ndarray:
    """Components of ``J^R`` on a basis of a subalgebra."""
    B = np.atleast_2d(np.asarray(subalgebra_basis, dtype=float))
    if B.shape[1] != 3:
        raise ValueError("subalgebra basis vectors must have length 3")
    if np.linalg.matrix_rank(B) < B.shape[0]:
        raise ValueError("subalgebra basis is degenerate")
    return B @ zeta.mu_body


def extended_momentum(zeta: CotangentPoint, vertical) -> ExtendedMomentum:
    """``(J^L, K)`` together with ``J^R``; ``K = g^t vertical`` is the body-frame vertical."""
    e = np.asarray(vertical, dtype=float)
    e = e / np.linalg.norm(e)
    return ExtendedMomentum(momentum_left(zeta), momentum_right(zeta), zeta.g.T @ e)


def noether_monitor(traj: Trajectory, sys: SystemSpec, tol: float | None = None) -> InvariantReport:
    """Drift of the declared first integrals along a trajectory.

    With ``tol`` given, one relative-drift check per first integral is added.
    """
    if len(traj) < 2:
        raise ValueError("noether_monitor needs at least two samples")
    report = InvariantReport(system=sys.name)
    for name in sys.first_integrals:
        values = traj.invariants.get(name)
        if values is None:
            raise KeyError(f"trajectory does not record {name!r}")
        entry = drift_entry(name, values)
        report.invariants.append(entry)
        if tol is not None:
            report.add_check(f"{name} drift", entry.max_rel_drift, tol)
    return report


def _random_phase_points(n, rng, scale=1.0):
    return [(lie.random_rotation(rng), scale * rng.normal(size=3)) for _ in range(n)]


def _phase_hamiltonian(sys: SystemSpec):
    if sys.kind != "rigid":
        raise ValueError("momentum-map checks need a system on SO(3)")
    return sys.energy


def symmetry_defect(sys: SystemSpec, n: int = 1000, seed: int = 0, momentum: str = "right") -> float:
    """Largest ``|H(g, mu) - h(J(g, mu))|`` with ``h(xi) = H(Id, xi)``.

    ``H`` factors through the chosen momentum map exactly when this vanishes;
    ``h`` is forced to be ``H(Id, .)`` because both maps reduce to ``mu`` at the
    identity. ``momentum`` is ``"right"`` (``J^R``) or ``"left"`` (``J^L``).
    """
    H = _phase_hamiltonian(sys)
    rng = np.random.default_rng(seed)
    eye = np.eye(3)
    worst = 0.0
    for g, mu in _random_phase_points(n, rng):
        zeta = CotangentPoint(g, mu)
        xi = momentum_right(zeta) if momentum == "right" else momentum_left(zeta)
        worst = max(worst, abs(H(g, mu) - H(eye, xi)))
    return worst


def extended_invariance_defect(sys: SystemSpec, n: int = 1000, seed: int = 0) -> float:
    """Largest ``|H(g, mu) - h_ext(J^R, K)|`` over random phase points.

    ``h_ext`` is the system's reduced Hamiltonian on the (possibly extended)
    dual algebra and ``(J^R, K)`` is assembled by ``sys.reduced_point``.
    """
    H = _phase_hamiltonian(sys)
    if sys.hamiltonian_h is None or sys.reduced_point is None:
        raise SymmetryError(f"{sys.name} has no reduced Hamiltonian")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for g, mu in _random_phase_points(n, rng):
        worst = max(worst, abs(H(g, mu) - sys.hamiltonian_h(sys.reduced_point(g, mu))))
    return worst


def spatial_hamilton_flow(sys: SystemSpec, g0, m, cfg: StepperConfig):
    """Canonical flow on T*SO(3) in the spatial trivialization.

    For a Hamiltonian invariant under left translations the spatial momentum
    ``m`` is constant and ``g' = hat(omega) g`` with ``omega = g dh(g^t m)``.
    Returns ``(t, g)`` arrays.
    """
    dh = sys.dh
    m = np.asarray(m, dtype=float)
    dexpinv = _dexpinv("sphere")  # left-trivialized exponential coordinates

    def omega(g):
        return g @ dh(g.T @ m)

    h = cfg.dt
    n = _n_steps(0.0, cfg)
    nrec = n // cfg.record_every + 1
    out = np.empty((nrec, 3, 3))
    g = np.asarray(g0, dtype=float)
    out[0] = g
    k = 1
    for step in range(1, n + 1):
        w1 = omega(g)
        u2 = 0.5 * h * w1
        k2 = dexpinv(u2, omega(lie.exp_group(u2) @ g))
        u3 = 0.5 * h * k2
        k3 = dexpinv(u3, omega(lie.exp_group(u3) @ g))
        u4 = h * k3
        k4 = dexpinv(u4, omega(lie.exp_group(u4) @ g))
        g = lie.exp_group(h / 6 * (w1 + 2 * k2 + 2 * k3 + k4)) @ g
        if step % cfg.record_every == 0:
            out[k] = g
            k += 1
    return cfg.dt * cfg.record_every * np.arange(nrec), out


@dataclass
class EquivalenceReport:
    ep_deviation: float
    spatial_deviation: float
    casimir_drift: float
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max(self.ep_deviation, self.spatial_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance and self.casimir_drift < self.tolerance


def equivalence_check(sys: SystemSpec, init: EPState, cfg: StepperConfig, tol: float = 1e-8) -> EquivalenceReport:
    """Compare the Lie-Poisson flow with the reduced image of the full dynamics.

    Path (a) integrates the Lie-Poisson equation from ``J^R(init)``. Path (b)
    is the Euler-Poincare flow on SO(3) x so(3) mapped by ``J^R``; path (c) is
    the canonical flow in the spatial trivialization mapped by ``J^R``.
    Raises :class:`SymmetryError` unless ``H`` factors through ``J^R``.
    """
    if sys.kind != "rigid":
        raise SymmetryError(f"{sys.name}: equivalence check needs a system on SO(3)")
    defect = symmetry_defect(sys, n=200)
    if defect > 1e-10:
        raise SymmetryError(
            f"{sys.name}: Hamiltonian is not invariant under left translations (defect {defect:.3e})"
        )
    if sys.lp_sc is None or sys.lp_sc.dim != 3 or sys.dh is None:
        raise SymmetryError(f"{sys.name}: equivalence check needs a Hamiltonian on so(3)*")
    g0 = np.asarray(init.gamma, dtype=float)
    mu0 = np.asarray(init.mu, dtype=float)

    _, xi = simulate_lie_poisson(sys, mu0, cfg)
    traj = simulate(sys, init, cfg, reduced=False)
    m = lie.Ad_star(g0, mu0)
    _, gs = spatial_hamilton_flow(sys, g0, m, cfg)
    jr_spatial = np.einsum("kji,j->ki", gs, m)

    c0 = mu0 @ mu0
    casimir = np.einsum("ki,ki->k", xi, xi)
    return EquivalenceReport(
        ep_deviation=float(np.abs(traj.mu - xi).max()),
        spatial_deviation=float(np.abs(jr_spatial - xi).max()),
        casimir_drift=float(np.abs(casimir - c0).max() / max(c0, 1e-300)),
        tolerance=tol,
    )
