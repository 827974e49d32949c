"""ADHM construction: data, monad, regularity, the instanton connection and
its closed-form curvature, and a gradient-flow solver for the ADHM equations.

Points of R^4 enter the monad through ``z1 = x1 + i x2``, ``z2 = x3 - i x4``.
The sign on ``x4`` is the orientation reversal that makes the construction
anti-self-dual for the convention ``F12 = F34, F13 = -F24, F14 = F23``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PAIRS, antihermitian_part, commutator, dagger
from .errors import (
    EigenspaceBreakdownError,
    FrameJumpError,
    InvalidParameterError,
    NonConvergenceError,
    NonRegularDataError,
)
from .explicit import Connection
from .fields import CurvatureField, _stencil


@dataclass(frozen=True, eq=False)
class ADHMData:
    """``B1, B2`` in End(V) (c x c), ``i`` in Hom(W, V) (c x r), ``j`` in Hom(V, W) (r x c)."""

    B1: np.ndarray
    B2: np.ndarray
    i: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("B1", "B2", "i", "j"):
            a = np.array(getattr(self, name), dtype=complex)
            if a.ndim != 2:
                raise InvalidParameterError(f"{name}: expected a matrix, got shape {a.shape}")
            a.setflags(write=False)
            arrays[name] = a
        c = arrays["B1"].shape[0]
        if arrays["B1"].shape != (c, c) or arrays["B2"].shape != (c, c):
            raise InvalidParameterError("B1, B2: expected square c x c matrices of equal size")
        r = arrays["i"].shape[1]
        if arrays["i"].shape != (c, r):
            raise InvalidParameterError(f"i: expected shape ({c}, r), got {arrays['i'].shape}")
        if arrays["j"].shape != (r, c):
            raise InvalidParameterError(f"j: expected shape ({r}, {c}), got {arrays['j'].shape}")
        if c < 1 or r < 1:
            raise InvalidParameterError("c and r must be positive")
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @property
    def c(self) -> int:
        return self.B1.shape[0]

    @property
    def r(self) -> int:
        return self.i.shape[1]

    def pack(self) -> np.ndarray:
        return np.concatenate([self.B1.ravel(), self.B2.ravel(), self.i.ravel(), self.j.ravel()])

    @classmethod
    def unpack(cls, vec, c: int, r: int) -> "ADHMData":
        vec = np.asarray(vec)
        n = c * c
        return cls(
            vec[:n].reshape(c, c),
            vec[n : 2 * n].reshape(c, c),
            vec[2 * n : 2 * n + c * r].reshape(c, r),
            vec[2 * n + c * r :].reshape(r, c),
        )

    def norm(self) -> float:
        return float(np.linalg.norm(self.pack()))


def basic_adhm_data() -> ADHMData:
    """Charge one, rank two: ``B1 = B2 = 0``, ``i = (1 0)``, ``j = (0 1)^T``."""
    return ADHMData(np.zeros((1, 1)), np.zeros((1, 1)), [[1.0, 0.0]], [[0.0], [1.0]])


def random_adhm_data(c: int, r: int, rng: np.random.Generator, scale: float = 1.0) -> ADHMData:
    def m(rows, cols):
        return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)

    return ADHMData(m(c, c), m(c, c), m(c, r), m(r, c))


def adhm_residuals(d: ADHMData) -> tuple[np.ndarray, np.ndarray]:
    """Left-hand sides ``[B1, B2] + ij`` and ``[B1, B1^+] + [B2, B2^+] + ii^+ - j^+j``."""
    B1, B2, i, j = d.B1, d.B2, d.i, d.j
    complex_part = commutator(B1, B2) + i @ j
    real_part = commutator(B1, dagger(B1)) + commutator(B2, dagger(B2)) + i @ dagger(i) - dagger(j) @ j
    return complex_part, real_part


def adhm_objective(d: ADHMData) -> float:
    rc, rr = adhm_residuals(d)
    return float(np.sum(np.abs(rc) ** 2) + np.sum(np.abs(rr) ** 2))


def is_valid(d: ADHMData, tol: float = 1e-10) -> bool:
    rc, rr = adhm_residuals(d)
    return bool(np.linalg.norm(rc) < tol and np.linalg.norm(rr) < tol)


def gauge_transform(d: ADHMData, g: np.ndarray) -> ADHMData:
    """Action of ``g`` in U(c): ``B -> g^-1 B g``, ``i -> g^-1 i``, ``j -> j g``."""
    ginv = np.linalg.inv(g)
    return ADHMData(ginv @ d.B1 @ g, ginv @ d.B2 @ g, ginv @ d.i, d.j @ g)


# --- monad ------------------------------------------------------------------


def complex_coordinates(x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1], x[..., 2] - 1j * x[..., 3]


def _alpha(d: ADHMData, z1, z2) -> np.ndarray:
    z1, z2 = np.asarray(z1)[..., None, None], np.asarray(z2)[..., None, None]
    eye = np.eye(d.c)
    j = np.broadcast_to(d.j, (*np.shape(z1)[:-2], d.r, d.c))
    return np.concatenate([d.B1 + z1 * eye, d.B2 + z2 * eye, j], axis=-2)


def _beta(d: ADHMData, z1, z2) -> np.ndarray:
    z1, z2 = np.asarray(z1)[..., None, None], np.asarray(z2)[..., None, None]
    eye = np.eye(d.c)
    i = np.broadcast_to(d.i, (*np.shape(z1)[:-2], d.c, d.r))
    return np.concatenate([-d.B2 - z2 * eye, d.B1 + z1 * eye, i], axis=-1)


def _dirac(d: ADHMData, x) -> np.ndarray:
    z1, z2 = complex_coordinates(x)
    return np.concatenate([_beta(d, z1, z2), dagger(_alpha(d, z1, z2))], axis=-2)


def dirac_derivatives(d: ADHMData) -> np.ndarray:
    """The constant matrices ``C_k = dD/dx_k`` (D is affine in x), shape ``(4, 2c, 2c + r)``."""
    base = _dirac(d, np.zeros(4))
    return _dirac(d, np.eye(4)) - base


@dataclass(frozen=True, eq=False)
class MonadPoint:
    z1: complex
    z2: complex
    alpha: np.ndarray
    beta: np.ndarray
    D: np.ndarray
    Xi: np.ndarray


def monad_at(d: ADHMData, z1: complex, z2: complex) -> MonadPoint:
    alpha = _alpha(d, z1, z2)
    beta = _beta(d, z1, z2)
    D = np.vstack([beta, dagger(alpha)])
    return MonadPoint(complex(z1), complex(z2), alpha, beta, D, D @ dagger(D))


# --- regularity ---------------------------------------------------------------


def _obstruction_margin(X1, X2, K):
    """Smallest singular value of ``[X1 - l; X2 - m; K]`` over eigenvalue pairs.

    It vanishes iff ``X1, X2`` have a common eigenvector killed by ``K``.
    Also returns the worst eigenvector condition number seen.
    """
    l1, v1 = np.linalg.eig(X1)
    l2, v2 = np.linalg.eig(X2)
    cond = max(np.linalg.cond(v1), np.linalg.cond(v2))
    c = X1.shape[0]
    eye = np.eye(c)
    margin = np.inf
    for lam in l1:
        for mu in l2:
            stacked = np.vstack([X1 - lam * eye, X2 - mu * eye, K])
            margin = min(margin, np.linalg.svd(stacked, compute_uv=False)[-1])
    return float(margin), float(cond)


def _regularity_test(d, X1, X2, K, what, tol):
    scale = max(1.0, d.norm())
    margin, cond = _obstruction_margin(X1, X2, K)
    if margin <= tol * scale:
        return False, margin
    if cond > 1e8 and margin < 1e-6 * scale:
        raise EigenspaceBreakdownError(
            f"{what} test inconclusive: eigenvector condition {cond:.2e}, margin {margin:.2e}", cond
        )
    return True, margin


def is_stable(d: ADHMData, tol: float = 1e-10) -> bool:
    """beta(z) is onto for every z, i.e. no common eigenvector v of B1^+, B2^+ with i^+ v = 0."""
    return _regularity_test(d, dagger(d.B1), dagger(d.B2), dagger(d.i), "stability", tol)[0]


def is_costable(d: ADHMData, tol: float = 1e-10) -> bool:
    """alpha(z) is injective for every z, i.e. no common eigenvector w of B1, B2 with j w = 0."""
    return _regularity_test(d, d.B1, d.B2, d.j, "costability", tol)[0]


def is_regular(d: ADHMData, tol: float = 1e-10) -> bool:
    return is_stable(d, tol) and is_costable(d, tol)


def regularity_report(d: ADHMData, tol: float = 1e-10) -> dict:
    stable, stable_margin = _regularity_test(d, dagger(d.B1), dagger(d.B2), dagger(d.i), "stability", tol)
    costable, costable_margin = _regularity_test(d, d.B1, d.B2, d.j, "costability", tol)
    return {
        "stable": stable,
        "costable": costable,
        "regular": stable and costable,
        "stability_margin": stable_margin,
        "costability_margin": costable_margin,
    }


def min_singular_scan(d: ADHMData, points, which: str = "beta") -> float:
    """Smallest singular value of beta(z) (or alpha(z)) over the given points of R^4."""
    z1, z2 = complex_coordinates(points)
    if which == "beta":
        m = _beta(d, z1, z2)
    elif which == "alpha":
        m = _alpha(d, z1, z2)
    else:
        raise InvalidParameterError("which must be 'alpha' or 'beta'")
    return float(np.min(np.linalg.svd(m, compute_uv=False)[..., -1]))


# --- bundle, connection, curvature ---------------------------------------------


def _raw_frame(d: ADHMData, x, rank_tol: float = 1e-12) -> np.ndarray:
    # ker D is the orthogonal complement of the columns of D^+; a complete QR
    # of D^+ supplies an orthonormal basis of it in the trailing columns.
    D = _dirac(d, x)
    q, r = np.linalg.qr(dagger(D), mode="complete")
    diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
    bad = np.min(diag, axis=-1) <= rank_tol * np.maximum(np.max(diag, axis=-1), 1.0)
    if np.any(bad):
        where = np.asarray(x)[bad] if np.ndim(x) > 1 else np.asarray(x)
        raise NonRegularDataError(f"D(x) loses rank at x = {np.atleast_2d(where)[0].tolist()}")
    return q[..., 2 * d.c :]


def fiber_frame(d: ADHMData, x) -> np.ndarray:
    """Orthonormal basis of ``ker D(x) = ker beta ∩ ker alpha^+``, shape ``(..., 2c + r, r)``."""
    return _raw_frame(d, np.asarray(x, dtype=float))


def _curvature_in_frame(d: ADHMData, x, psi) -> np.ndarray:
    """``F_kl = psi^+ (C_k^+ Xi^-1 C_l - C_l^+ Xi^-1 C_k) psi``."""
    D = _dirac(d, x)
    xi_inv = np.linalg.inv(D @ dagger(D))
    Y = dirac_derivatives(d) @ psi[..., None, :, :]  # C_k psi
    W = xi_inv[..., None, :, :] @ Y  # Xi^-1 C_k psi
    G = dagger(Y)[..., :, None, :, :] @ W[..., None, :, :, :]  # G[k, l] = Y_k^+ W_l
    k, l = np.array(PAIRS).T
    return G[..., k, l, :, :] - G[..., l, k, :, :]


def adhm_curvature(d: ADHMData, x) -> np.ndarray:
    """Closed-form curvature in the frame returned by :func:`fiber_frame`."""
    x = np.asarray(x, dtype=float)
    return _curvature_in_frame(d, x, _raw_frame(d, x))


def adhm_curvature_field(d: ADHMData) -> CurvatureField:
    return CurvatureField(lambda x: adhm_curvature(d, x), d.r, "analytic")


class _AlignedFrame:
    """Frames rotated onto a fixed reference by unitary Procrustes alignment.

    ``psi(x) = psi_raw(x) U`` with ``U = polar(psi_raw(x)^+ ref)``, which equals
    the orthonormalised projection of ``ref`` onto the fibre: a smooth gauge
    wherever that projection keeps full rank.
    """

    def __init__(self, d: ADHMData, reference_point, align_tol: float):
        self.d = d
        self.ref = _raw_frame(d, np.asarray(reference_point, dtype=float))
        self.align_tol = align_tol

    def __call__(self, x):
        raw = _raw_frame(self.d, x)
        overlap = dagger(raw) @ self.ref
        u, s, vh = np.linalg.svd(overlap)
        bad = s[..., -1] < self.align_tol
        if np.any(bad):
            loc = np.atleast_2d(np.asarray(x)[bad] if np.ndim(x) > 1 else x)[0]
            raise FrameJumpError(f"frame alignment failed at x = {loc.tolist()}", loc)
        return raw @ (u @ vh)


def adhm_potential(d: ADHMData, x, h: float = 1e-4, reference_point=None, align_tol: float = 1e-6):
    """Connection ``A_k = psi^+ d_k psi`` by central differences on aligned frames.

    Returns ``(A, deviation)`` where ``A`` is the anti-hermitian part and
    ``deviation`` the largest hermitian remainder (O(h^2)).
    """
    frame = _AlignedFrame(d, np.zeros(4) if reference_point is None else reference_point, align_tol)
    x = np.asarray(x, dtype=float)
    psi = frame(_stencil(x, h))  # (..., 9, n, r)
    dpsi = (psi[..., 1::2, :, :] - psi[..., 2::2, :, :]) / (2.0 * h)
    raw = dagger(psi[..., 0, None, :, :]) @ dpsi
    herm = 0.5 * (raw + dagger(raw))
    return antihermitian_part(raw), float(np.max(np.abs(herm), initial=0.0))


def adhm_connection(d: ADHMData, h: float = 1e-4, reference_point=None, align_tol: float = 1e-6) -> Connection:
    """The instanton from the projection formula, in the Procrustes-aligned gauge.

    The attached closed-form curvature is expressed in the same gauge.
    """
    if not is_regular(d):
        raise NonRegularDataError("ADHM data is not regular")
    ref = np.zeros(4) if reference_point is None else np.asarray(reference_point, dtype=float)
    frame = _AlignedFrame(d, ref, align_tol)

    def potential(x):
        return adhm_potential(d, x, h, ref, align_tol)[0]

    def curvature(x):
        x = np.asarray(x, dtype=float)
        return _curvature_in_frame(d, x, frame(x))

    return Connection(potential, d.r, curvature, name=f"adhm(c={d.c}, r={d.r})")


# --- solver ---------------------------------------------------------------------


def adhm_gradient(d: ADHMData) -> ADHMData:
    """Gradient of ``|R_C|^2 + |R_R|^2`` for the real inner product ``Re tr(X^+ Y)``."""
    rc, rr = adhm_residuals(d)
    B1, B2, i, j = d.B1, d.B2, d.i, d.j
    return ADHMData(
        2 * (commutator(rc, dagger(B2)) + 2 * commutator(rr, B1)),
        2 * (commutator(dagger(B1), rc) + 2 * commutator(rr, B2)),
        2 * (rc @ dagger(j) + 2 * rr @ i),
        2 * (dagger(i) @ rc - 2 * j @ rr),
    )


@dataclass(frozen=True, eq=False)
class ADHMSolution:
    data: ADHMData
    objective: float
    iterations: int
    history: list = field(default_factory=list)


def solve_adhm(
    seed: ADHMData,
    tol: float = 1e-10,
    max_iters: int = 10_000,
    step: float = 0.1,
    armijo: float = 1e-4,
    shrink: float = 0.5,
) -> ADHMSolution:
    """Gradient descent with Armijo backtracking on the squared ADHM residuals.

    Stops once the objective drops below ``tol**2``.  Every iteration starts
    its line search from ``step``.
    """
    target = tol * tol
    c, r = seed.c, seed.r
    x = seed.pack()
    d = seed
    phi = adhm_objective(d)
    history = [phi]
    it = 0
    while phi >= target:
        if it >= max_iters:
            raise NonConvergenceError(
                f"ADHM flow did not converge in {max_iters} iterations (objective {phi:.3e})", phi, it
            )
        g = adhm_gradient(d).pack()
        gg = float(np.vdot(g, g).real)
        t = step
        while True:
            trial = ADHMData.unpack(x - t * g, c, r)
            trial_phi = adhm_objective(trial)
            if trial_phi <= phi - armijo * t * gg or t < 1e-20:
                break
            t *= shrink
        if trial_phi >= phi:
            raise NonConvergenceError(f"line search stalled (objective {phi:.3e})", phi, it)
        x, d, phi = trial.pack(), trial, trial_phi
        history.append(phi)
        it += 1
    return ADHMSolution(d, phi, it, history)


# --- framed tangent space -----------------------------------------------------------


def _linearised_residuals(d: ADHMData, v: ADHMData) -> np.ndarray:
    B1, B2, i, j = d.B1, d.B2, d.i, d.j
    b1, b2, di, dj = v.B1, v.B2, v.i, v.j
    rc = commutator(b1, B2) + commutator(B1, b2) + di @ j + i @ dj
    rr = (
        commutator(b1, dagger(B1))
        + commutator(B1, dagger(b1))
        + commutator(b2, dagger(B2))
        + commutator(B2, dagger(b2))
        + di @ dagger(i)
        + i @ dagger(di)
        - dagger(dj) @ j
        - dagger(j) @ dj
    )
    return np.concatenate([rc.ravel().view(float), rr.ravel().view(float)])


def _u_basis(c: int):
    for a in range(c):
        e = np.zeros((c, c), dtype=complex)
        e[a, a] = 1j
        yield e
    for a in range(c):
        for b in range(a + 1, c):
            e = np.zeros((c, c), dtype=complex)
            e[a, b], e[b, a] = 1.0, -1.0
            yield e
            e = np.zeros((c, c), dtype=complex)
            e[a, b], e[b, a] = 1j, 1j
            yield e


def framed_tangent_dimension(d: ADHMData, threshold: float = 1e-8) -> tuple[int, np.ndarray]:
    """Real dimension of the kernel of the linearised ADHM equations restricted
    to the orthogonal complement of the U(c) orbit, by singular-value count."""
    c, r = d.c, d.r
    n = 2 * c * c + 2 * c * r  # complex unknowns
    columns = []
    for k in range(2 * n):
        vec = np.zeros(n, dtype=complex)
        vec[k // 2] = 1.0 if k % 2 == 0 else 1j
        columns.append(_linearised_residuals(d, ADHMData.unpack(vec, c, r)))
    jac = np.array(columns).T
    orbit = []
    for xi in _u_basis(c):
        tangent = ADHMData(commutator(d.B1, xi), commutator(d.B2, xi), -xi @ d.i, d.j @ xi)
        orbit.append(tangent.pack().view(float))
    system = np.vstack([jac, np.array(orbit)])
    s = np.linalg.svd(system, compute_uv=False)
    rank = int(np.count_nonzero(s > threshold * max(1.0, s[0])))
    return 2 * n - rank, s
