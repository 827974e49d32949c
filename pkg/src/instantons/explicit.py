"""Closed-form instantons: the basic charge-one solution, its scale/translation
family, the 't Hooft superposition ansatz and embeddings su(2) -> u(n)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    PAIRS,
    QUATERNION_UNITS,
    SIGMA,
    antihermitian_part,
    commutator,
    lie_deviation,
    quaternion_matrix,
    traceless_part,
)
from .errors import InvalidParameterError, SingularPointError

# Orientation reversal x4 -> -x4.  The 't Hooft formula and the ADHM monad are
# written for the opposite orientation to the one fixed in core; composing with
# this reflection makes them anti-self-dual in ours.
REFLECTION = np.array([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True, eq=False)
class Connection:
    """A u(r) connection on (a region of) R^4.

    ``potential`` maps points ``(..., 4)`` to components ``(..., 4, r, r)``;
    ``curvature``, when present, maps points to the analytic two-form
    ``(..., 6, r, r)``.
    """

    potential: Callable[[np.ndarray], np.ndarray]
    rank: int
    curvature: Optional[Callable[[np.ndarray], np.ndarray]] = None
    singular_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    name: str = "connection"

    def __call__(self, x) -> np.ndarray:
        return self.potential(np.asarray(x, dtype=float))


def _check_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise InvalidParameterError(f"points must have a trailing axis of length 4, got {x.shape}")
    return x


# Conjugates of the basis quaternions 1, i, j, k as matrices.
_UNITS_BAR = np.stack([QUATERNION_UNITS[0], *(-QUATERNION_UNITS[1:])])
# Im(dq ^ dq-bar) coefficient of dx_a ^ dx_b:  e_a e_b-bar - e_b e_a-bar.
_DQ_WEDGE_DQBAR = np.stack(
    [QUATERNION_UNITS[a] @ _UNITS_BAR[b] - QUATERNION_UNITS[b] @ _UNITS_BAR[a] for a, b in PAIRS]
)


def scaled_instanton(lam: float = 1.0, y=(0.0, 0.0, 0.0, 0.0)) -> Connection:
    """Pullback of the basic instanton under ``x -> (x - y) / lam``.

    ``A_k = Im(q' e_k-bar) / (lam^2 + |q'|^2)`` with ``q' = x - y`` as a
    quaternion, and ``F = lam^2 Im(dq ^ dq-bar) / (lam^2 + |x - y|^2)^2``.
    """
    lam = float(lam)
    if not lam > 0:
        raise InvalidParameterError(f"size must be positive, got {lam}")
    y = np.asarray(y, dtype=float)
    if y.shape != (4,):
        raise InvalidParameterError("center must be a point of R^4")

    def potential(x):
        d = _check_points(x) - y
        q = quaternion_matrix(d)[..., None, :, :]
        a = antihermitian_part(q @ _UNITS_BAR)
        return a / (lam**2 + np.sum(d * d, axis=-1))[..., None, None, None]

    def curvature(x):
        d = _check_points(x) - y
        scale = lam**2 / (lam**2 + np.sum(d * d, axis=-1)) ** 2
        return scale[..., None, None, None] * _DQ_WEDGE_DQBAR

    name = "basic" if lam == 1.0 and not y.any() else f"scaled(lam={lam}, y={y.tolist()})"
    return Connection(potential, 2, curvature, name=name)


def basic_instanton() -> Connection:
    """The charge-one SU(2) instanton ``A = Im(q dq-bar) / (1 + |x|^2)``."""
    return scaled_instanton(1.0, np.zeros(4))


def sigma_bar(mu: int, nu: int) -> np.ndarray:
    """'t Hooft matrices, 1-based: ``[s_mu, s_nu] / 4i`` for spatial indices,
    ``s_mu / 2`` for ``(mu, 4)``, extended antisymmetrically."""
    if not (1 <= mu <= 4 and 1 <= nu <= 4):
        raise InvalidParameterError("indices run over 1..4")
    if mu == nu:
        return np.zeros((2, 2), dtype=complex)
    if mu == 4:
        return -sigma_bar(nu, mu)
    if nu == 4:
        return 0.5 * SIGMA[mu - 1]
    a, b = SIGMA[mu - 1], SIGMA[nu - 1]
    return commutator(a, b) / 4j


def thooft_symbols() -> np.ndarray:
    """The ``(4, 4, 2, 2)`` coefficient array used by :func:`thooft_connection`:
    sigma-bar composed with the x4 reflection (mixed ``(mu, 4)`` entries negated)."""
    eta = np.array([[sigma_bar(m, n) for n in range(1, 5)] for m in range(1, 5)])
    return eta * (REFLECTION[:, None] * REFLECTION[None, :])[..., None, None]


@dataclass(frozen=True)
class ThooftParams:
    centers: tuple
    sizes: tuple

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        sizes = np.asarray(self.sizes, dtype=float)
        if centers.ndim != 2 or centers.shape[1] != 4:
            raise InvalidParameterError("centers: expected a list of points in R^4")
        if sizes.shape != (centers.shape[0],):
            raise InvalidParameterError(
                f"sizes: expected {centers.shape[0]} entries to match centers, got {sizes.size}"
            )
        if centers.shape[0] < 1:
            raise InvalidParameterError("centers: need at least one instanton")
        if np.any(sizes <= 0):
            raise InvalidParameterError("sizes: all sizes must be positive")
        for a in range(len(centers)):
            for b in range(a):
                if np.array_equal(centers[a], centers[b]):
                    raise InvalidParameterError("centers: must be pairwise distinct")
        object.__setattr__(self, "centers", tuple(map(tuple, centers.tolist())))
        object.__setattr__(self, "sizes", tuple(sizes.tolist()))

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def degrees_of_freedom(self) -> int:
        return 4 * len(self.centers) + len(self.sizes)


def _log_rho_derivatives(x, centers, sizes):
    """Gradient and Hessian of ``ln rho`` for ``rho = 1 + sum lam^2 / |x - y|^2``."""
    d = x[..., None, :] - centers  # (..., k, 4)
    r2 = np.sum(d * d, axis=-1)  # (..., k)
    if np.any(r2 == 0.0):
        bad = np.asarray(x)[np.any(r2 == 0.0, axis=-1)][0]
        raise SingularPointError("'t Hooft connection evaluated at a center", bad)
    l2 = sizes**2
    rho = 1.0 + np.sum(l2 / r2, axis=-1)
    grad_rho = np.sum((-2.0 * l2 / r2**2)[..., None] * d, axis=-2)
    eye = np.eye(4)
    hess_rho = np.sum(
        l2[:, None, None]
        * (
            -2.0 * eye / (r2**2)[..., None, None]
            + 8.0 * d[..., :, None] * d[..., None, :] / (r2**3)[..., None, None]
        ),
        axis=-3,
    )
    grad = grad_rho / rho[..., None]
    hess = hess_rho / rho[..., None, None] - grad[..., :, None] * grad[..., None, :]
    return rho, grad, hess


def thooft_rho(params: ThooftParams, x) -> np.ndarray:
    x = _check_points(x)
    return _log_rho_derivatives(x, np.asarray(params.centers), np.asarray(params.sizes))[0]


def thooft_connection(params: ThooftParams, generators=None) -> Connection:
    """'t Hooft ansatz ``A_mu = i sum_nu eta_{mu nu} d_nu ln rho``.

    Gradient and Hessian of ``ln rho`` are analytic, so the curvature
    ``F_{kl} = d_k A_l - d_l A_k + [A_k, A_l]`` is exact up to rounding.
    ``generators`` optionally replaces the ``(4, 4, 2, 2)`` coefficient array
    (used by embeddings into larger algebras).
    """
    centers = np.asarray(params.centers)
    sizes = np.asarray(params.sizes)
    eta = thooft_symbols() if generators is None else np.asarray(generators)
    rank = eta.shape[-1]
    ieta = 1j * eta

    def potential(x):
        x = _check_points(x)
        _, grad, _ = _log_rho_derivatives(x, centers, sizes)
        a = np.tensordot(grad, ieta, axes=([-1], [1]))
        return traceless_part(antihermitian_part(a))

    def curvature(x):
        x = _check_points(x)
        _, grad, hess = _log_rho_derivatives(x, centers, sizes)
        a = np.tensordot(grad, ieta, axes=([-1], [1]))
        # da[..., k, m] = d_k A_m
        da = np.tensordot(hess, ieta, axes=([-1], [1]))
        out = np.empty((*x.shape[:-1], 6, rank, rank), dtype=complex)
        for n, (k, l) in enumerate(PAIRS):
            ak, al = a[..., k, :, :], a[..., l, :, :]
            out[..., n, :, :] = da[..., k, l, :, :] - da[..., l, k, :, :] + commutator(ak, al)
        return out

    return Connection(potential, rank, curvature, singular_points=centers, name=f"thooft(k={params.k})")


def thooft_lie_deviation(params: ThooftParams, x) -> float:
    """Largest departure from su(2) of the unprojected 't Hooft components at ``x``."""
    x = _check_points(x)
    _, grad, _ = _log_rho_derivatives(x, np.asarray(params.centers), np.asarray(params.sizes))
    a = np.tensordot(grad, 1j * thooft_symbols(), axes=([-1], [1]))
    return lie_deviation(a, "su")


# --- embeddings su(2) -> u(n) -----------------------------------------------

SU2_BASIS = -1j * SIGMA  # images of i, j, k; [X1, X2] = 2 X3 cyclically


@dataclass(frozen=True, eq=False)
class LieAlgebraHom:
    """Linear map su(2) -> u(n) given by the images of ``-i sigma_a``."""

    images: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        images = np.asarray(self.images, dtype=complex)
        if images.ndim != 3 or images.shape[0] != 3 or images.shape[1] != images.shape[2]:
            raise InvalidParameterError("images: expected shape (3, n, n)")
        object.__setattr__(self, "images", images)
        if self.bracket_defect() > self.tol:
            raise InvalidParameterError(
                f"map does not preserve brackets (defect {self.bracket_defect():.2e})"
            )
        flat = np.concatenate([images.real.reshape(3, -1), images.imag.reshape(3, -1)], axis=1)
        if np.linalg.matrix_rank(flat, tol=1e-10) < 3:
            raise InvalidParameterError("map is not injective")

    @property
    def dim(self) -> int:
        return self.images.shape[-1]

    def bracket_defect(self) -> float:
        X = self.images
        defect = 0.0
        for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            defect = max(defect, float(np.max(np.abs(commutator(X[a], X[b]) - 2 * X[c]))))
        return defect

    def __call__(self, m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        """Apply to a stack of su(2) matrices ``(..., 2, 2)``."""
        m = np.asarray(m)
        if np.max(np.abs(np.trace(m, axis1=-2, axis2=-1)), initial=0.0) > tol:
            raise InvalidParameterError("embedding is only defined on su(2) (traceless) values")
        # m = sum_a c_a X_a with c_a = tr(X_a^dagger m) / 2
        coeff = np.einsum("aij,...ij->...a", np.conj(SU2_BASIS), m) / 2.0
        return np.einsum("...a,aij->...ij", coeff, self.images)


def block_inclusion(n: int) -> LieAlgebraHom:
    """su(2) into the upper-left block of su(n)."""
    if n < 2:
        raise InvalidParameterError("n must be at least 2")
    images = np.zeros((3, n, n), dtype=complex)
    images[:, :2, :2] = SU2_BASIS
    return LieAlgebraHom(images)


def spin_representation(n: int) -> LieAlgebraHom:
    """The irreducible n-dimensional representation (spin (n-1)/2)."""
    if n < 2:
        raise InvalidParameterError("n must be at least 2")
    s = (n - 1) / 2.0
    m = s - np.arange(n)
    jp = np.zeros((n, n))
    for a in range(1, n):
        jp[a - 1, a] = np.sqrt(s * (s + 1) - m[a] * (m[a] + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    jz = np.diag(m)
    return LieAlgebraHom(-2j * np.stack([jx, jy, jz]).astype(complex))


def embed_connection(phi: LieAlgebraHom, conn: Connection) -> Connection:
    """Push a rank-2 su(2) connection through ``phi``; curvature maps the same way."""
    if not isinstance(phi, LieAlgebraHom):
        raise InvalidParameterError("phi must be a LieAlgebraHom")
    if conn.rank != 2:
        raise InvalidParameterError("only rank-2 connections can be embedded")

    def potential(x):
        return phi(conn.potential(x))

    def curvature(x):
        return phi(conn.curvature(x))

    return Connection(
        potential, phi.dim, curvature if conn.curvature is not None else None, singular_points=conn.singular_points, name=f"embedded({conn.name})"
    )
