"""Dimensional reductions of the anti-self-duality equation.

Each reduction is checked by lifting the lower-dimensional fields to a
translation-invariant connection on R^4 and measuring the 4D residual; the
component forms are kept alongside as an independent cross-check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import commutator, dagger, lie_deviation
from .errors import InvalidParameterError, PoleEncounteredError
from .explicit import Connection
from .fields import CurvatureField, GridSpec, asd_residual

FieldFn = Callable[[np.ndarray], np.ndarray]


# --- smooth test fields -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolynomialField:
    """``sum_t coeff_t * prod_a x_a^{p_{t,a}}`` with matrix coefficients."""

    coeffs: np.ndarray  # (T, r, r)
    powers: np.ndarray  # (T, n)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        powers = np.asarray(self.powers, dtype=int)
        if self.coeffs.ndim != 3 or powers.ndim != 2 or len(powers) != len(self.coeffs):
            raise InvalidParameterError("need coefficients (T, r, r) and powers (T, n)")
        object.__setattr__(self, "powers", powers)

    @classmethod
    def zero(cls, rank: int, dim: int) -> "PolynomialField":
        return cls(np.zeros((0, rank, rank)), np.zeros((0, dim), dtype=int))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.powers.shape[1]
        mono = np.prod(x[..., None, :n] ** self.powers, axis=-1)  # (..., T)
        return np.tensordot(mono, self.coeffs, axes=([-1], [0])) if len(self.coeffs) else np.zeros(
            (*x.shape[:-1], *self.coeffs.shape[1:]), dtype=complex
        )


@dataclass(frozen=True, eq=False)
class TrigField:
    """``sum_m M_m sin(k_m . x + p_m)`` with anti-hermitian ``M_m``."""

    amplitudes: np.ndarray  # (m, r, r)
    wavevectors: np.ndarray  # (m, n)
    phases: np.ndarray  # (m,)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.wavevectors.shape[1]
        s = np.sin(x[..., :n] @ self.wavevectors.T + self.phases)
        return np.tensordot(s, self.amplitudes, axes=([-1], [0]))


def random_trig_field(rng: np.random.Generator, rank: int, dim: int, modes: int = 3) -> TrigField:
    m = rng.standard_normal((modes, rank, rank)) + 1j * rng.standard_normal((modes, rank, rank))
    return TrigField(0.5 * (m - dagger(m)), rng.uniform(-1.5, 1.5, (modes, dim)), rng.uniform(0, 2 * np.pi, modes))


# --- configurations ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MonopoleConfig:
    """Connection ``A1..A3`` and Higgs field ``phi`` on R^3."""

    A: Sequence[FieldFn]
    phi: FieldFn
    rank: int

    def __post_init__(self):
        if len(self.A) != 3:
            raise InvalidParameterError("a monopole configuration needs three connection components")


@dataclass(frozen=True, eq=False)
class HitchinConfig:
    """Connection ``A1, A2`` and Higgs components ``A3, A4`` on R^2."""

    A: Sequence[FieldFn]
    higgs: Sequence[FieldFn]
    rank: int

    def __post_init__(self):
        if len(self.A) != 2 or len(self.higgs) != 2:
            raise InvalidParameterError("a Hitchin configuration needs two connection and two Higgs components")


@dataclass(frozen=True, eq=False)
class NahmCurve:
    """``s -> (T2, T3, T4)`` as a map to arrays ``(..., 3, r, r)``."""

    T: Callable[[np.ndarray], np.ndarray]
    rank: int


def random_monopole_config(rng, rank: int = 2, modes: int = 3) -> MonopoleConfig:
    return MonopoleConfig([random_trig_field(rng, rank, 3, modes) for _ in range(3)], random_trig_field(rng, rank, 3, modes), rank)


def random_hitchin_config(rng, rank: int = 2, modes: int = 3) -> HitchinConfig:
    return HitchinConfig(
        [random_trig_field(rng, rank, 2, modes) for _ in range(2)],
        [random_trig_field(rng, rank, 2, modes) for _ in range(2)],
        rank,
    )


def abelian_monopole() -> MonopoleConfig:
    """``phi = i x3``, ``A2 = i x1``: a constant field solving ``F = *D phi``."""
    zero = PolynomialField.zero(1, 3)
    return MonopoleConfig(
        [zero, PolynomialField([[[1j]]], [[1, 0, 0]]), zero], PolynomialField([[[1j]]], [[0, 0, 1]]), 1
    )


def abelian_hitchin(c: float = 1.0) -> HitchinConfig:
    """``A3 = ic x1``, ``A4 = -ic x2``, trivial connection."""
    zero = PolynomialField.zero(1, 2)
    return HitchinConfig(
        [zero, zero], [PolynomialField([[[1j * c]]], [[1, 0]]), PolynomialField([[[-1j * c]]], [[0, 1]])], 1
    )


# --- lifting ----------------------------------------------------------------------------


def lift_to_4d(config) -> Connection:
    """Translation-invariant connection on R^4 whose components are the reduced fields.

    Monopole: ``(A1, A2, A3, phi)`` independent of ``x4``.  Hitchin:
    ``(A1, A2, A3, A4)`` independent of ``x3, x4``.  Nahm: ``A1 = 0`` and
    ``A_k = -T_k(x1)``; the sign matches the first-order Nahm flow to the
    anti-self-dual orientation.
    """
    if isinstance(config, MonopoleConfig):
        fns, dim = [*config.A, config.phi], 3
    elif isinstance(config, HitchinConfig):
        fns, dim = [*config.A, *config.higgs], 2
    elif isinstance(config, NahmCurve):

        def potential(x):
            x = np.asarray(x, dtype=float)
            T = config.T(x[..., 0])
            zero = np.zeros_like(T[..., :1, :, :])
            return np.concatenate([zero, -T], axis=-3)

        return Connection(potential, config.rank, name="nahm-lift")
    else:
        raise InvalidParameterError(f"cannot lift {type(config).__name__}")

    def potential(x):
        x = np.asarray(x, dtype=float)[..., :dim]
        return np.stack([np.asarray(f(x), dtype=complex) for f in fns], axis=-3)

    return Connection(potential, config.rank, name=f"{type(config).__name__}-lift")


def _check_grid(grid: GridSpec, dim: int):
    if grid.dimension != dim:
        raise InvalidParameterError(f"expected a {dim}-dimensional grid, got dimension {grid.dimension}")


def bogomolny_residual(config: MonopoleConfig, grid: GridSpec, h: float = 1e-3, threads=None):
    """``(max_rel, rms_rel)`` of the lifted 4D anti-self-duality residual on a 3D grid."""
    _check_grid(grid, 3)
    return asd_residual(CurvatureField.from_connection(lift_to_4d(config), h), grid, threads)


def hitchin_residual(config: HitchinConfig, grid: GridSpec, h: float = 1e-3, threads=None):
    _check_grid(grid, 2)
    return asd_residual(CurvatureField.from_connection(lift_to_4d(config), h), grid, threads)


def _partials(fns, x, h, dim):
    """Values and central-difference partials of each field: ``(..., n, r, r)`` and ``(..., dim, n, r, r)``."""
    vals = np.stack([f(x) for f in fns], axis=-3)
    derivs = []
    for a in range(dim):
        e = np.zeros(x.shape[-1])
        e[a] = h
        plus = np.stack([f(x + e) for f in fns], axis=-3)
        minus = np.stack([f(x - e) for f in fns], axis=-3)
        derivs.append((plus - minus) / (2 * h))
    return vals, np.stack(derivs, axis=-4)


def _norm_sq(m):
    return np.real(np.einsum("...ij,...ij->...", np.conj(m), m))


def _relative_from_equations(eq_sq, field_sq):
    # |F+| = |equations| / sqrt(2) for the three paired component equations.
    return np.sqrt(eq_sq / 2.0) / np.maximum(np.sqrt(field_sq), 1e-30)


def bogomolny_equations(config: MonopoleConfig, x, h: float = 1e-3):
    """Component form ``F23 - D1 phi, F31 - D2 phi, F12 - D3 phi`` with
    ``D_k phi = d_k phi + [A_k, phi]``; returns ``(equations, |F|^2 of the lift)``."""
    x = np.asarray(x, dtype=float)[..., :3]
    vals, der = _partials([*config.A, config.phi], x, h, 3)
    A = [vals[..., k, :, :] for k in range(3)]
    phi = vals[..., 3, :, :]

    def F(i, j):
        return der[..., i, j, :, :] - der[..., j, i, :, :] + commutator(A[i], A[j])

    Dphi = [der[..., k, 3, :, :] + commutator(A[k], phi) for k in range(3)]
    F23, F31, F12 = F(1, 2), F(2, 0), F(0, 1)
    eqs = np.stack([F23 - Dphi[0], F31 - Dphi[1], F12 - Dphi[2]], axis=-3)
    field_sq = _norm_sq(F23) + _norm_sq(F31) + _norm_sq(F12) + sum(_norm_sq(d) for d in Dphi)
    return eqs, field_sq


def hitchin_equations(config: HitchinConfig, x, h: float = 1e-3):
    """Component form ``F12 - F34, F13 + F24, F14 - F23`` with ``d3 = d4 = 0``."""
    x = np.asarray(x, dtype=float)[..., :2]
    vals, der = _partials([*config.A, *config.higgs], x, h, 2)
    A = [vals[..., k, :, :] for k in range(4)]

    def d(i, k):  # d_i A_k, zero along the reduced directions
        return der[..., i, k, :, :] if i < 2 else np.zeros_like(A[k])

    def F(i, j):
        return d(i, j) - d(j, i) + commutator(A[i], A[j])

    F12, F13, F14, F23, F24, F34 = F(0, 1), F(0, 2), F(0, 3), F(1, 2), F(1, 3), F(2, 3)
    eqs = np.stack([F12 - F34, F13 + F24, F14 - F23], axis=-3)
    field_sq = sum(_norm_sq(f) for f in (F12, F13, F14, F23, F24, F34))
    return eqs, field_sq


def _component_residual(equations, config, grid, h):
    rel = []
    for index in range(grid.n_per_axis):
        pts, _ = grid.slab(index)
        if len(pts):
            eqs, field_sq = equations(config, pts, h)
            rel.append(_relative_from_equations(np.sum(_norm_sq(eqs), axis=-1), field_sq))
    rel = np.concatenate(rel)
    return float(np.max(rel)), float(math.sqrt(math.fsum(rel * rel) / len(rel)))


def bogomolny_component_residual(config: MonopoleConfig, grid: GridSpec, h: float = 1e-3):
    _check_grid(grid, 3)
    return _component_residual(bogomolny_equations, config, grid, h)


def hitchin_component_residual(config: HitchinConfig, grid: GridSpec, h: float = 1e-3):
    _check_grid(grid, 2)
    return _component_residual(hitchin_equations, config, grid, h)


# --- Nahm's equations ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NahmTriple:
    T2: np.ndarray
    T3: np.ndarray
    T4: np.ndarray
    s: float = 0.0
    tol: float = 1e-10

    def __post_init__(self):
        mats = [np.array(getattr(self, n), dtype=complex) for n in ("T2", "T3", "T4")]
        shape = mats[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(m.shape != shape for m in mats):
            raise InvalidParameterError("T2, T3, T4 must be square matrices of one size")
        for name, m in zip(("T2", "T3", "T4"), mats):
            if lie_deviation(m) > self.tol * max(1.0, np.abs(m).max()):
                raise InvalidParameterError(f"{name} is not anti-hermitian")
            object.__setattr__(self, name, m)
        object.__setattr__(self, "s", float(self.s))

    @property
    def rank(self) -> int:
        return self.T2.shape[0]

    def stack(self) -> np.ndarray:
        return np.stack([self.T2, self.T3, self.T4])

    @classmethod
    def from_stack(cls, T, s: float = 0.0) -> "NahmTriple":
        return cls(T[0], T[1], T[2], s)


def nahm_rhs(T) -> np.ndarray:
    """``dT_k/ds = -(1/2) sum eps_{kjl} [T_j, T_l]``, i.e. ``T2' = -[T3, T4]`` and cyclic."""
    if isinstance(T, NahmTriple):
        T = T.stack()
    T = np.asarray(T)
    T2, T3, T4 = T[..., 0, :, :], T[..., 1, :, :], T[..., 2, :, :]
    return -np.stack([commutator(T3, T4), commutator(T4, T2), commutator(T2, T3)], axis=-3)


def _rk4_step(T, ds):
    k1 = nahm_rhs(T)
    k2 = nahm_rhs(T + 0.5 * ds * k1)
    k3 = nahm_rhs(T + 0.5 * ds * k2)
    k4 = nahm_rhs(T + ds * k3)
    return T + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _too_big(T, blowup):
    n = np.linalg.norm(T)
    return not np.isfinite(n) or n > blowup


def _locate_pole(T, s, ds, blowup, substeps=32, iterations=60):
    """Bisect for the first parameter in ``(s, s + ds]`` where the norm exceeds ``blowup``."""
    lo, hi = 0.0, ds

    def blows(t):
        state = T
        for _ in range(substeps):
            state = _rk4_step(state, t / substeps)
            if _too_big(state, blowup):
                return True
        return False

    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if blows(mid):
            hi = mid
        else:
            lo = mid
    return s + 0.5 * (lo + hi)


def _probe_step(T, s, ds, blowup, rtol=1e-9):
    """Re-integrate one suspicious step with step-doubling control.

    Returns ``(location, None)`` for a blow-up inside ``[s, s + ds]`` and
    ``(None, endpoint_state)`` otherwise.
    Near a pole the controlled step shrinks geometrically, so the norm
    guard is reached even when the fixed step would jump over the pole.
    """
    t, h, state = 0.0, ds / 16.0, T
    floor = 1e-14 * max(1.0, abs(s), abs(ds))
    while abs(t) < abs(ds):
        h = math.copysign(min(abs(h), abs(ds) - abs(t)), ds)
        full = _rk4_step(state, h)
        half = _rk4_step(_rk4_step(state, h / 2), h / 2)
        if not np.all(np.isfinite(half)) or _too_big(half, blowup):
            if abs(h) <= floor:
                return s + t, None
            if _too_big(half, blowup) and np.all(np.isfinite(half)) and np.linalg.norm(full - half) <= rtol * np.linalg.norm(half):
                return _locate_pole(state, s + t, h, blowup), None
            h /= 2
            continue
        err = np.linalg.norm(full - half) / max(1.0, np.linalg.norm(half))
        if err > rtol:
            if abs(h) <= floor:
                return s + t, None
            h /= 2
            continue
        state, t = half, t + h
        if err < rtol / 32:
            h *= 2
    return None, state


@dataclass(frozen=True, eq=False)
class NahmTrajectory:
    s: np.ndarray  # (n + 1,)
    T: np.ndarray  # (n + 1, 3, r, r)

    @property
    def rank(self) -> int:
        return self.T.shape[-1]

    def at(self, index: int) -> NahmTriple:
        return NahmTriple.from_stack(self.T[index], self.s[index])

    def curve(self) -> NahmCurve:
        """Cubic Hermite interpolant using the flow itself for the slopes."""
        s, T = self.s, self.T
        dT = nahm_rhs(T)
        ascending = s[-1] >= s[0]

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            xs = x if ascending else -x
            grid = s if ascending else -s
            idx = np.clip(np.searchsorted(grid, xs) - 1, 0, len(s) - 2)
            h = s[idx + 1] - s[idx]
            t = ((x - s[idx]) / h)[..., None, None, None]
            h = h[..., None, None, None]
            h00 = 2 * t**3 - 3 * t**2 + 1
            h10 = t**3 - 2 * t**2 + t
            h01 = -2 * t**3 + 3 * t**2
            h11 = t**3 - t**2
            return h00 * T[idx] + h10 * h * dT[idx] + h01 * T[idx + 1] + h11 * h * dT[idx + 1]

        return NahmCurve(evaluate, self.rank)


def nahm_integrate(T0: NahmTriple, s1: float, n_steps: int, blowup: float = 1e8) -> NahmTrajectory:
    """Classical fourth-order Runge-Kutta from ``T0.s`` to ``s1`` in ``n_steps`` equal steps."""
    if n_steps < 1:
        raise InvalidParameterError("n_steps must be at least 1")
    ds = (float(s1) - T0.s) / n_steps
    s = T0.s + ds * np.arange(n_steps + 1)
    s[-1] = float(s1)
    out = np.empty((n_steps + 1, 3, T0.rank, T0.rank), dtype=complex)
    out[0] = T0.stack()
    with np.errstate(over="ignore", invalid="ignore"):  # overflow near a pole is caught by the guard
        _integrate_into(out, s, ds, blowup)
    return NahmTrajectory(s, out)


def _integrate_into(out, s, ds, blowup):
    for n in range(len(s) - 1):
        nxt = _rk4_step(out[n], ds)
        half = _rk4_step(_rk4_step(out[n], ds / 2), ds / 2)
        suspicious = _too_big(nxt, blowup) or _too_big(half, blowup)
        if not suspicious:
            # step-doubling estimate; a large one flags a nearby singularity
            suspicious = np.linalg.norm(nxt - half) > 1e-2 * max(1.0, np.linalg.norm(half))
        if suspicious:
            where, nxt = _probe_step(out[n], s[n], ds, blowup)
            if where is not None:
                raise PoleEncounteredError(f"solution blows up near s = {where:.10g}", where)
            if _too_big(nxt, blowup):
                raise PoleEncounteredError(f"solution blows up near s = {s[n + 1]:.10g}", float(s[n + 1]))
        out[n + 1] = nxt


def lax_matrix(T, zeta: complex) -> np.ndarray:
    """``A(zeta) = (T2 + i T3) - 2i T4 zeta + (T2 - i T3) zeta^2``."""
    if isinstance(T, NahmTriple):
        T = T.stack()
    T = np.asarray(T)
    T2, T3, T4 = T[..., 0, :, :], T[..., 1, :, :], T[..., 2, :, :]
    return (T2 + 1j * T3) - 2j * T4 * zeta + (T2 - 1j * T3) * zeta**2


def nahm_invariants(T, zeta_samples) -> list[np.ndarray]:
    """Characteristic-polynomial coefficients of ``A(zeta)``, one vector per sample."""
    return [np.poly(lax_matrix(T, z)) for z in zeta_samples]


def invariant_drift(traj: NahmTrajectory, zeta_samples) -> float:
    """Largest change of any spectral coefficient along the trajectory."""
    ref = np.array(nahm_invariants(traj.T[0], zeta_samples))
    drift = 0.0
    for T in traj.T[1:]:
        drift = max(drift, float(np.max(np.abs(np.array(nahm_invariants(T, zeta_samples)) - ref))))
    return drift


def antihermitian_drift(traj: NahmTrajectory) -> float:
    return float(np.max(np.abs(traj.T + dagger(traj.T))))


def pole_solution(s) -> np.ndarray:
    """``T_k(s) = sigma_{k-1} / (2 i s)``, an exact solution with a pole at 0."""
    from .core import SIGMA

    s = np.asarray(s, dtype=float)
    return SIGMA / (2j * s[..., None, None, None])


def pole_curve() -> NahmCurve:
    return NahmCurve(pole_solution, 2)


def write_trajectory_csv(traj: NahmTrajectory, stream) -> int:
    r = traj.rank
    header = ["s"]
    for name in ("T2", "T3", "T4"):
        for a in range(r):
            for b in range(r):
                header += [f"{name}_{a}{b}_re", f"{name}_{a}{b}_im"]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for s, T in zip(traj.s, traj.T):
        row = [repr(float(s))]
        for z in T.ravel():
            row += [repr(float(z.real)), repr(float(z.imag))]
        writer.writerow(row)
    return len(traj.s)
