"""Algebraic substrate: quaternions, u(r)-valued forms, Hodge stars on flat R^4 and R^3.

Two-forms on R^4 are stored as arrays of shape ``(..., 6, r, r)`` holding the
components ``F_ij`` for ``i < j`` in the order of :data:`PAIRS`
(12, 13, 14, 23, 24, 34).  Orientation is fixed so that the anti-self-dual
forms are exactly those with ``F12 = F34, F13 = -F24, F14 = F23``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvalidParameterError

PAIRS = tuple(combinations(range(4), 2))
PAIR_INDEX = {pair: n for n, pair in enumerate(PAIRS)}

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# 1, i, j, k as 2x2 complex matrices; an algebra homomorphism H -> M_2(C).
QUATERNION_UNITS = np.stack([np.eye(2, dtype=complex), *(-1j * SIGMA)])

# star: (F12, F13, F14, F23, F24, F34) -> (-F34, F24, -F23, -F14, F13, -F12)
_STAR_SOURCE = (5, 4, 3, 2, 1, 0)
_STAR_SIGN = np.array([-1.0, 1.0, -1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_vector(cls, v) -> "Quaternion":
        w, x, y, z = (float(c) for c in v)
        return cls(w, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quaternion_mul(self, other)
        return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)

    __rmul__ = __mul__

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_vector(self.as_array() + other.as_array())

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_vector(self.as_array() - other.as_array())

    def __neg__(self) -> "Quaternion":
        return self * -1.0

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=0, atol=tol))


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def quaternion_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product."""
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


def quaternion_matrix(coeffs) -> np.ndarray:
    """Map quaternion coefficients ``(..., 4)`` to 2x2 complex matrices ``(..., 2, 2)``.

    ``1, i, j, k`` go to ``1, -i sigma_1, -i sigma_2, -i sigma_3``; the map is
    multiplicative, so quaternion products can be computed as matrix products.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    return np.einsum("...a,aij->...ij", coeffs, QUATERNION_UNITS)


def im_to_su2(q: Quaternion) -> np.ndarray:
    """Imaginary quaternion -> traceless anti-hermitian 2x2 matrix; the real part is dropped."""
    return quaternion_matrix([0.0, q.x, q.y, q.z])


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def antihermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - dagger(m))


def traceless_part(m: np.ndarray) -> np.ndarray:
    r = m.shape[-1]
    tr = np.trace(m, axis1=-2, axis2=-1)
    return m - tr[..., None, None] * np.eye(r) / r


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def lie_deviation(m: np.ndarray, algebra: str = "u") -> float:
    """Largest violation of anti-hermiticity (and tracelessness for ``su``)."""
    m = np.asarray(m)
    dev = float(np.max(np.abs(m + dagger(m)), initial=0.0))
    if algebra == "su":
        dev = max(dev, float(np.max(np.abs(np.trace(m, axis1=-2, axis2=-1)), initial=0.0)))
    return dev


def as_lie_value(m, algebra: str = "u", tol: float = 1e-12) -> np.ndarray:
    """Validate a (stack of) square matrices as elements of u(r) or su(r)."""
    if algebra not in ("u", "su"):
        raise InvalidParameterError(f"unknown algebra {algebra!r}")
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise InvalidParameterError(f"expected square matrices, got shape {m.shape}")
    dev = lie_deviation(m, algebra)
    if dev > tol:
        raise InvalidParameterError(f"not in {algebra}({m.shape[-1]}): deviation {dev:.3e}")
    return m


def two_form(components=None, rank: int = 1, batch=()) -> np.ndarray:
    """Build a two-form array from a ``{(i, j): matrix}`` mapping (1-based indices).

    Missing components are zero; ``(j, i)`` keys are accepted with a sign flip.
    """
    F = np.zeros((*batch, 6, rank, rank), dtype=complex)
    for (i, j), m in (components or {}).items():
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -1.0
        F[..., PAIR_INDEX[(i - 1, j - 1)], :, :] = sign * np.asarray(m)
    return F


def component(F: np.ndarray, i: int, j: int) -> np.ndarray:
    """``F_ij`` with 1-based indices, honouring ``F_ji = -F_ij``."""
    if i == j:
        return np.zeros_like(F[..., 0, :, :])
    if i < j:
        return F[..., PAIR_INDEX[(i - 1, j - 1)], :, :]
    return -F[..., PAIR_INDEX[(j - 1, i - 1)], :, :]


def hodge_star_4(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F)
    return F[..., _STAR_SOURCE, :, :] * _STAR_SIGN[:, None, None]


def split_sd_asd(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(F_plus, F_minus)``, the self-dual and anti-self-dual parts."""
    star = hodge_star_4(F)
    return 0.5 * (F + star), 0.5 * (F - star)


def pointwise_inner(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Real Frobenius pairing summed over the six components."""
    return np.real(np.einsum("...kij,...kij->...", np.conj(F), G))


def pointwise_norm_sq(F: np.ndarray) -> np.ndarray:
    """Action density ``|F|^2 = sum_{i<j} ||F_ij||_F^2``."""
    return pointwise_inner(F, F)


def wedge_trace_density(F: np.ndarray) -> np.ndarray:
    """Charge density: the volume-form coefficient of ``-tr(F ^ F) / (8 pi^2)``.

    With this normalisation an anti-self-dual field has density
    ``|F|^2 / (8 pi^2)``, so its action equals ``8 pi^2`` times its charge.
    """
    F = np.asarray(F)

    def tr(a, b):
        return np.einsum("...ij,...ji->...", F[..., a, :, :], F[..., b, :, :])

    combo = tr(0, 5) - tr(1, 4) + tr(2, 3)
    return -2.0 * np.real(combo) / (8.0 * np.pi**2)


def gauge_conjugate(F: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``g^{-1} F g`` componentwise for unitary ``g``."""
    return dagger(g)[..., None, :, :] @ F @ g[..., None, :, :]


# Two-forms on R^3 are stored as (F12, F13, F23).
def hodge_star_3(one_form: np.ndarray) -> np.ndarray:
    """``dx1 -> dx2^dx3``, ``dx2 -> dx3^dx1``, ``dx3 -> dx1^dx2``."""
    a = np.asarray(one_form)
    return np.stack([a[..., 2, :, :], -a[..., 1, :, :], a[..., 0, :, :]], axis=-3)


def hodge_star_3_inverse(two_form3: np.ndarray) -> np.ndarray:
    F = np.asarray(two_form3)
    return np.stack([F[..., 2, :, :], -F[..., 1, :, :], F[..., 0, :, :]], axis=-3)
