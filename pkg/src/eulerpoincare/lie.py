"""Finite-dimensional Lie algebra and SO(3) group numerics.

Algebra elements and dual elements are plain coefficient arrays in a fixed
basis ``X_1..X_r`` and its dual basis. Structure constants are stored as
``c[i, s, k]`` with ``[X_s, X_k] = sum_i c[i, s, k] X_i``.

For so(3) the basis is chosen so that the bracket is the vector cross product,
which is also the matrix commutator of ``hat`` images.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

# AlgebraVector, DualVector: 1-d float arrays of length r.
# GroupElement: 3x3 rotation matrix.
AlgebraVector = np.ndarray
DualVector = np.ndarray
GroupElement = np.ndarray

ROTATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """Structure constants ``c[i, s, k]`` of an ``r``-dimensional Lie algebra."""

    c: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise ValueError(f"structure constants must have shape (r, r, r), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def antisymmetry_residual(self) -> float:
        return float(np.abs(self.c + self.c.transpose(0, 2, 1)).max(initial=0.0))

    def validate(self, tol: float = 1e-12) -> "StructureConstants":
        """Raise ``ValueError`` unless the constants define a Lie algebra."""
        if self.antisymmetry_residual() > tol:
            raise ValueError(f"{self.name}: structure constants are not antisymmetric")
        res = check_jacobi(self)
        if res > tol:
            raise ValueError(f"{self.name}: Jacobi residual {res:.3e} exceeds {tol:.1e}")
        return self


def so3() -> StructureConstants:
    c = np.zeros((3, 3, 3))
    for s, k, i in itertools.permutations(range(3)):
        # Levi-Civita sign of the permutation (s, k, i)
        c[i, s, k] = np.linalg.det(np.eye(3)[[s, k, i]])
    return StructureConstants(c, "so3").validate()


def abelian(n: int) -> StructureConstants:
    if n < 1:
        raise ValueError("dimension must be positive")
    return StructureConstants(np.zeros((n, n, n)), f"abelian{n}")


def semidirect_so3_r3() -> StructureConstants:
    """so(3) semidirect R^3, basis (rotations e1..e3, translations f1..f3).

    ``[(a, u), (b, v)] = (a x b, a x v - b x u)``.
    """
    eps = so3().c
    c = np.zeros((6, 6, 6))
    c[:3, :3, :3] = eps
    c[3:, :3, 3:] = eps
    c[3:, 3:, :3] = -eps.transpose(0, 2, 1)
    return StructureConstants(c, "so3xR3").validate()


def _check_dims(sc: StructureConstants, *vectors):
    for v in vectors:
        if np.shape(v) != (sc.dim,):
            raise ValueError(f"expected a vector of length {sc.dim}, got shape {np.shape(v)}")


def bracket(sc: StructureConstants, X: AlgebraVector, Y: AlgebraVector) -> AlgebraVector:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    _check_dims(sc, X, Y)
    return (sc.c @ Y) @ X


def ad_matrix(sc: StructureConstants, V: AlgebraVector) -> np.ndarray:
    """Matrix of ``ad_V = [V, .]`` in the basis."""
    V = np.asarray(V, dtype=float)
    _check_dims(sc, V)
    return V @ sc.c


def pairing(xi: DualVector, X: AlgebraVector) -> float:
    xi = np.asarray(xi, dtype=float)
    X = np.asarray(X, dtype=float)
    if xi.shape != X.shape or xi.ndim != 1:
        raise ValueError(f"pairing needs equal-length vectors, got {xi.shape} and {X.shape}")
    return float(xi @ X)


def ad_star(sc: StructureConstants, V: AlgebraVector, xi: DualVector) -> DualVector:
    """Minus the transpose of ``ad_V``: ``<ad*_V xi, X> = -<xi, [V, X]>``."""
    xi = np.asarray(xi, dtype=float)
    _check_dims(sc, xi)
    return -(xi @ ad_matrix(sc, V))


def check_jacobi(sc: StructureConstants) -> float:
    """Largest absolute entry of the Jacobi tensor built from the constants."""
    c = sc.c
    t = (
        np.einsum("mij,lmk->ijkl", c, c)
        + np.einsum("mjk,lmi->ijkl", c, c)
        + np.einsum("mki,lmj->ijkl", c, c)
    )
    return float(np.abs(t).max(initial=0.0))


def cross(a, b):
    # np.cross carries a lot of overhead for length-3 inputs
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def hat(v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (3,):
        raise ValueError(f"hat expects a 3-vector, got shape {v.shape}")
    z = v.dtype.type(0) if v.dtype.kind == "f" else 0.0
    return np.array(
        [
            [z, -v[2], v[1]],
            [v[2], z, -v[0]],
            [-v[1], v[0], z],
        ]
    )


def vee(m, tol: float = 1e-12) -> np.ndarray:
    m = np.asarray(m)
    if m.shape != (3, 3):
        raise ValueError(f"vee expects a 3x3 matrix, got shape {m.shape}")
    if np.abs(m + m.T).max() > tol:
        raise ValueError("vee: matrix is not antisymmetric")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _rodrigues_coefficients(theta):
    # sin(t)/t and (1 - cos t)/t^2 with a series guard near 0
    if theta < 1e-4:
        t2 = theta * theta
        return 1 - t2 / 6 + t2 * t2 / 120, 0.5 - t2 / 24 + t2 * t2 / 720
    if isinstance(theta, float):
        return math.sin(theta) / theta, (1 - math.cos(theta)) / (theta * theta)
    return np.sin(theta) / theta, (1 - np.cos(theta)) / (theta * theta)


def exp_group(X) -> GroupElement:
    """Exponential map so(3) -> SO(3) (Rodrigues formula).

    Preserves the input floating dtype, so ``np.longdouble`` vectors give
    extended-precision rotations.
    """
    X = np.asarray(X)
    if X.dtype.kind != "f":
        X = X.astype(float)
    if X.dtype == np.float64 and X.shape == (3,):
        return _exp_float(float(X[0]), float(X[1]), float(X[2]))
    K = hat(X)
    theta = np.sqrt(X @ X)
    a, b = _rodrigues_coefficients(theta)
    return np.eye(3, dtype=X.dtype) + a * K + b * (K @ K)


def _exp_float(x, y, z):
    # scalar Rodrigues formula; much cheaper than array algebra at this size
    theta = math.sqrt(x * x + y * y + z * z)
    a, b = _rodrigues_coefficients(theta)
    xx, yy, zz = x * x, y * y, z * z
    return np.array(
        [
            [1 - b * (yy + zz), b * x * y - a * z, b * x * z + a * y],
            [b * x * y + a * z, 1 - b * (xx + zz), b * y * z - a * x],
            [b * x * z - a * y, b * y * z + a * x, 1 - b * (xx + yy)],
        ]
    )


def right_jacobian(X) -> np.ndarray:
    """``exp(-X) d/dt exp(X(t)) = (right_jacobian(X) X')^``."""
    X = np.asarray(X, dtype=float)
    K = hat(X)
    theta = math.sqrt(X @ X)
    if theta < 1e-4:
        t2 = theta * theta
        b, c = 0.5 - t2 / 24, 1 / 6 - t2 / 120
    else:
        b = (1 - math.cos(theta)) / theta**2
        c = (theta - math.sin(theta)) / theta**3
    return np.eye(3) - b * K + c * (K @ K)


def left_jacobian(X) -> np.ndarray:
    """``(d/dt exp(X(t))) exp(-X) = (left_jacobian(X) X')^``."""
    return right_jacobian(-np.asarray(X, dtype=float))


def is_rotation(g, tol: float = ROTATION_TOL) -> bool:
    g = np.asarray(g, dtype=float)
    if g.shape != (3, 3):
        return False
    return np.linalg.norm(g.T @ g - np.eye(3)) < tol and np.linalg.det(g) > 0


def _check_rotation(g):
    g = np.asarray(g, dtype=float)
    if not is_rotation(g):
        raise ValueError("expected an SO(3) rotation matrix")
    return g


def Ad(g: GroupElement, X: AlgebraVector) -> AlgebraVector:
    """Adjoint action of SO(3) on so(3) in vector form: ``R X``."""
    g = _check_rotation(g)
    X = np.asarray(X, dtype=float)
    if X.shape != (3,):
        raise ValueError("Ad on SO(3) acts on 3-vectors")
    return g @ X


def Ad_star(g: GroupElement, xi: DualVector) -> DualVector:
    """Coadjoint action ``(Ad_{g^-1})^t xi``; equals ``R xi`` on so(3)*."""
    g = _check_rotation(g)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise ValueError("Ad_star on SO(3) acts on 3-vectors")
    return g @ xi


def reorthonormalize(g: GroupElement) -> GroupElement:
    """Nearest rotation (orthogonal polar factor) of a nearly orthogonal matrix."""
    g = np.asarray(g, dtype=float)
    if g.shape != (3, 3):
        raise ValueError("reorthonormalize expects a 3x3 matrix")
    if np.linalg.norm(g.T @ g - np.eye(3)) >= 0.1:
        raise ValueError("matrix is too far from SO(3) to reorthonormalize")
    u, _, vt = np.linalg.svd(g)
    r = u @ vt
    if np.linalg.det(r) < 0:
        raise ValueError("matrix is closer to O(3) minus SO(3)")
    return r


def axis_angle(v) -> GroupElement:
    """Rotation from an axis-angle triple (direction = axis, norm = angle)."""
    return exp_group(np.asarray(v, dtype=float))


def random_rotation(rng: np.random.Generator) -> GroupElement:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
