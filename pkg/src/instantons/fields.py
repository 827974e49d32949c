"""Numerical differential geometry on connections over flat space.

Grid sweeps are split into slabs along the first coordinate.  Every slab
is reduced on its own and the per-slab partials are combined with
``math.fsum``, so results do not depend on how many worker threads ran.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import PAIRS, commutator, pointwise_norm_sq, split_sd_asd, wedge_trace_density
from .errors import InvalidParameterError, SingularPointError, TailFitError
from .explicit import Connection

EPS_NORM = 1e-30
THREADS_ENV = "INSTANTON_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip() or "1"
        try:
            threads = int(raw)
        except ValueError:
            raise InvalidParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise InvalidParameterError("thread count must be at least 1")
    return threads


def _parallel_map(fn, items, threads):
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sphere_directions() -> np.ndarray:
    """The 24 vertices of the 24-cell: a fixed, symmetric set of unit vectors in R^4."""
    dirs = []
    for a in range(4):
        for s in (1.0, -1.0):
            v = np.zeros(4)
            v[a] = s
            dirs.append(v)
    for signs in np.ndindex(2, 2, 2, 2):
        dirs.append(0.5 * (1 - 2 * np.array(signs, dtype=float)))
    return np.array(dirs)


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centred lattice on ``[-R, R]^d`` (optionally cut to the ball ``|x| <= R``).

    Lower-dimensional grids are embedded in R^4 with trailing zero coordinates.
    ``excluded`` holds ``(center, radius)`` pairs of balls whose cells are dropped.
    """

    dimension: int = 4
    extent: float = 8.0
    spacing: float = 0.25
    excluded: tuple = ()
    region: str = "ball"

    def __post_init__(self):
        if self.dimension not in (1, 2, 3, 4):
            raise InvalidParameterError("dimension must be 1..4")
        if not (self.spacing > 0 and self.extent > 0):
            raise InvalidParameterError("extent and spacing must be positive")
        ratio = self.extent / self.spacing
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise InvalidParameterError("extent / spacing must be an integer")
        if self.region not in ("ball", "cube"):
            raise InvalidParameterError("region must be 'ball' or 'cube'")
        excluded = []
        for center, radius in self.excluded:
            c = np.zeros(4)
            c[: len(center)] = np.asarray(center, dtype=float)
            if radius <= 0:
                raise InvalidParameterError("exclusion radius must be positive")
            excluded.append((tuple(c.tolist()), float(radius)))
        object.__setattr__(self, "excluded", tuple(excluded))

    @property
    def n_per_axis(self) -> int:
        return int(round(2 * self.extent / self.spacing))

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    def axis(self) -> np.ndarray:
        return -self.extent + self.spacing * (np.arange(self.n_per_axis) + 0.5)

    def with_exclusions(self, centers, radius: float) -> "GridSpec":
        balls = tuple((tuple(np.asarray(c, dtype=float).tolist()), radius) for c in centers)
        return GridSpec(self.dimension, self.extent, self.spacing, self.excluded + balls, self.region)

    def _slab_raw(self, index: int) -> np.ndarray:
        ax = self.axis()
        rest = np.meshgrid(*([ax] * (self.dimension - 1)), indexing="ij")
        pts = np.zeros((ax.size ** (self.dimension - 1), 4))
        pts[:, 0] = ax[index]
        for d, grid in enumerate(rest, start=1):
            pts[:, d] = grid.ravel()
        if self.region == "ball":
            pts = pts[np.einsum("ij,ij->i", pts, pts) <= self.extent**2]
        return pts

    def slab(self, index: int) -> tuple[np.ndarray, int]:
        """Points of one slab (shape ``(m, 4)``) and how many were excluded."""
        pts = self._slab_raw(index)
        keep = np.ones(len(pts), dtype=bool)
        for center, radius in self.excluded:
            d = pts - np.asarray(center)
            keep &= np.einsum("ij,ij->i", d, d) > radius**2
        return pts[keep], int(np.count_nonzero(~keep))

    def excluded_counts(self) -> list[int]:
        counts = [0] * len(self.excluded)
        for index in range(self.n_per_axis):
            pts = self._slab_raw(index)
            for b, (center, radius) in enumerate(self.excluded):
                d = pts - np.asarray(center)
                counts[b] += int(np.count_nonzero(np.einsum("ij,ij->i", d, d) <= radius**2))
        return counts

    def points(self) -> np.ndarray:
        return np.concatenate([self.slab(i)[0] for i in range(self.n_per_axis)])


@dataclass(frozen=True, eq=False)
class CurvatureField:
    evaluate: Callable[[np.ndarray], np.ndarray]
    rank: int
    provenance: str = "analytic"
    step: Optional[float] = None
    singular_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float))

    @classmethod
    def from_connection(cls, conn: Connection, h: Optional[float] = None) -> "CurvatureField":
        """Analytic curvature when the connection carries one (and ``h`` is None),
        otherwise central differences with step ``h`` (default 1e-4)."""
        if h is None and conn.curvature is not None:
            return cls(conn.curvature, conn.rank, "analytic", None, conn.singular_points)
        step = 1e-4 if h is None else float(h)
        return cls(
            lambda x: curvature_fd(conn, x, step), conn.rank, "finite-difference", step, conn.singular_points
        )


def _check_stencil(conn: Connection, pts: np.ndarray, h: float):
    sing = np.asarray(conn.singular_points)
    if sing.size == 0:
        return
    d = pts[..., None, :] - sing
    r2 = np.einsum("...j,...j->...", d, d)
    if np.any(r2 < h * h):
        hit = np.unravel_index(np.argmin(r2), r2.shape)
        raise SingularPointError("finite-difference stencil reaches a singular point", sing[hit[-1]])


def _stencil(x: np.ndarray, h: float) -> np.ndarray:
    """Points ``x, x + h e_1, x - h e_1, ..., x - h e_4`` stacked on axis -2."""
    offsets = np.concatenate([np.zeros((1, 4)), np.repeat(np.eye(4), 2, axis=0) * np.tile([h, -h], 4)[:, None]])
    return x[..., None, :] + offsets


def curvature_fd(conn: Connection, x, h: float) -> np.ndarray:
    """``F_ij = d_i A_j - d_j A_i + [A_i, A_j]`` with central differences, O(h^2)."""
    x = np.asarray(x, dtype=float)
    if not h > 0:
        raise InvalidParameterError("step must be positive")
    pts = _stencil(x, h)
    _check_stencil(conn, pts, h)
    a = conn.potential(pts)  # (..., 9, 4, r, r)
    a0 = a[..., 0, :, :, :]
    # da[..., i, j] = d_i A_j
    da = (a[..., 1::2, :, :, :] - a[..., 2::2, :, :, :]) / (2.0 * h)
    out = np.empty((*x.shape[:-1], 6, conn.rank, conn.rank), dtype=complex)
    for n, (i, j) in enumerate(PAIRS):
        out[..., n, :, :] = da[..., i, j, :, :] - da[..., j, i, :, :] + commutator(a0[..., i, :, :], a0[..., j, :, :])
    return out


def yang_mills_residual(conn: Connection, x, h: float) -> np.ndarray:
    """Norm of the covariant divergence ``sum_mu D_mu F_{mu nu}`` (the Yang-Mills
    equation ``d_A * F = 0`` in components), by nested central differences."""
    x = np.asarray(x, dtype=float)
    pts = _stencil(x, h)
    F = curvature_fd(conn, pts, h)  # (..., 9, 6, r, r)
    a0 = conn.potential(x)
    r = conn.rank
    full = np.zeros((*F.shape[:-3], 4, 4, r, r), dtype=complex)
    for n, (i, j) in enumerate(PAIRS):
        full[..., i, j, :, :] = F[..., n, :, :]
        full[..., j, i, :, :] = -F[..., n, :, :]
    current = np.zeros((*x.shape[:-1], 4, r, r), dtype=complex)
    for mu in range(4):
        deriv = (full[..., 1 + 2 * mu, mu, :, :, :] - full[..., 2 + 2 * mu, mu, :, :, :]) / (2.0 * h)
        current += deriv + commutator(a0[..., mu, None, :, :], full[..., 0, mu, :, :, :])
    return np.sqrt(np.real(np.einsum("...nij,...nij->...", np.conj(current), current)))


def asd_relative(F: np.ndarray) -> np.ndarray:
    """Pointwise ``|F+| / max(|F|, 1e-30)``."""
    plus, _ = split_sd_asd(F)
    return np.sqrt(pointwise_norm_sq(plus)) / np.maximum(np.sqrt(pointwise_norm_sq(F)), EPS_NORM)


def asd_residual(curv: CurvatureField, grid: GridSpec, threads: Optional[int] = None) -> tuple[float, float]:
    """Max and RMS over the grid of ``|F+| / |F|``."""

    def work(index):
        pts, _ = grid.slab(index)
        if len(pts) == 0:
            return 0.0, 0.0, 0
        rel = asd_relative(curv(pts))
        return float(np.max(rel)), float(np.sum(rel * rel)), len(rel)

    parts = _parallel_map(work, range(grid.n_per_axis), threads)
    count = sum(p[2] for p in parts)
    if count == 0:
        raise InvalidParameterError("grid has no points")
    max_rel = max(p[0] for p in parts)
    rms_rel = math.sqrt(math.fsum(p[1] for p in parts) / count)
    return max_rel, rms_rel


@dataclass(frozen=True)
class Quadrature:
    value: float
    bulk: float
    tail: float
    excluded_correction: float
    tail_amplitude: float
    tail_exponent: float
    n_points: int


def _shell_bins(r_lo: float, r_hi: float, n_bins: int) -> np.ndarray:
    return np.linspace(r_lo, r_hi, n_bins + 1)


def integrate_density(
    curv: CurvatureField,
    grid: GridSpec,
    density: Callable[[np.ndarray], np.ndarray],
    tail_exponent: Optional[float] = 8.0,
    tail_shell: tuple = (0.8, 1.0),
    n_shell_bins: int = 8,
    excluded_correction: bool = True,
    threads: Optional[int] = None,
) -> Quadrature:
    """Midpoint rule over the grid region plus a power-law tail beyond ``R``.

    The tail model ``a r^-p`` is fitted to shell-averaged densities on
    ``[0.8 R, R]``; ``p`` is fixed to ``tail_exponent`` or fitted when that is
    None.  Cells dropped by excluded balls are refilled with the density
    averaged over the ball's bounding sphere.
    """
    return field_sweep(
        curv, grid, {"value": density}, tail_exponent, tail_shell, n_shell_bins, excluded_correction, threads=threads
    )["value"]


def field_sweep(
    curv: CurvatureField,
    grid: GridSpec,
    densities: dict,
    tail_exponent: Optional[float] = 8.0,
    tail_shell: tuple = (0.8, 1.0),
    n_shell_bins: int = 8,
    excluded_correction: bool = True,
    with_asd: bool = False,
    threads: Optional[int] = None,
) -> dict:
    """Integrate several densities (and optionally the ASD residual) in one pass.

    Returns ``{name: Quadrature}``, plus ``"asd": (max_rel, rms_rel)`` when asked.
    """
    if grid.dimension != 4:
        raise InvalidParameterError("quadrature needs a 4-dimensional grid")
    R = grid.extent
    edges = _shell_bins(tail_shell[0] * R, tail_shell[1] * R, n_shell_bins)
    names = list(densities)

    def work(index):
        pts, _ = grid.slab(index)
        out = {}
        if len(pts) == 0:
            zero = np.zeros(n_shell_bins)
            return {n: (0.0, zero, zero, zero) for n in names}, (0.0, 0.0, 0)
        F = curv(pts)
        r = np.sqrt(np.einsum("ij,ij->i", pts, pts))
        which = np.digitize(r, edges) - 1
        inside = (which >= 0) & (which < n_shell_bins)
        bin_r = np.bincount(which[inside], weights=r[inside], minlength=n_shell_bins)
        bin_n = np.bincount(which[inside], minlength=n_shell_bins).astype(float)
        for n in names:
            dens = densities[n](F)
            bin_sum = np.bincount(which[inside], weights=dens[inside], minlength=n_shell_bins)
            out[n] = (float(np.sum(dens)), bin_sum, bin_r, bin_n)
        asd = (0.0, 0.0, len(pts))
        if with_asd:
            rel = asd_relative(F)
            asd = (float(np.max(rel)), float(np.sum(rel * rel)), len(pts))
        return out, asd

    parts = _parallel_map(work, range(grid.n_per_axis), threads)
    n_points = sum(p[1][2] for p in parts)
    if n_points == 0:
        raise InvalidParameterError("grid has no points")

    def combine(name, slot, b):
        return math.fsum(p[0][name][slot][b] for p in parts)

    result = {}
    ball_points = None
    if excluded_correction and grid.excluded:
        ball_points = [
            (np.asarray(center) + radius * sphere_directions(), count)
            for (center, radius), count in zip(grid.excluded, grid.excluded_counts())
            if count
        ]
    for name in names:
        bulk = math.fsum(p[0][name][0] for p in parts) * grid.cell_volume
        bin_sum = np.array([combine(name, 1, b) for b in range(n_shell_bins)])
        bin_r = np.array([combine(name, 2, b) for b in range(n_shell_bins)])
        bin_n = np.array([combine(name, 3, b) for b in range(n_shell_bins)])
        tail, amplitude, exponent = _fit_tail(bin_sum, bin_r, bin_n, R, tail_exponent)
        correction = 0.0
        for sphere, count in ball_points or ():
            correction += count * grid.cell_volume * float(np.mean(densities[name](curv(sphere))))
        result[name] = Quadrature(bulk + tail + correction, bulk, tail, correction, amplitude, exponent, n_points)
    if with_asd:
        result["asd"] = (max(p[1][0] for p in parts), math.sqrt(math.fsum(p[1][1] for p in parts) / n_points))
    return result


def _fit_tail(bin_sum, bin_r, bin_n, R, tail_exponent):
    filled = bin_n > 0
    if np.count_nonzero(filled) < 2:
        raise TailFitError("too few grid points in the tail shell", {"bins": int(np.count_nonzero(filled))})
    avg = bin_sum[filled] / bin_n[filled]
    rad = bin_r[filled] / bin_n[filled]
    scale = np.max(np.abs(avg))
    if scale == 0.0:
        return 0.0, 0.0, float(tail_exponent or 0.0)
    sign = np.sign(avg)
    if not np.all(sign == sign[0]) or np.any(np.abs(avg) <= 1e-300):
        raise TailFitError("tail densities change sign", {"averages": avg.tolist(), "radii": rad.tolist()})
    log_a, log_r = np.log(np.abs(avg)), np.log(rad)
    if tail_exponent is None:
        slope, _ = np.polyfit(log_r, log_a, 1)
        p = -float(slope)
    else:
        p = float(tail_exponent)
    if not p > 4.0:
        raise TailFitError(
            f"tail exponent {p:.3f} does not give an integrable tail",
            {"exponent": p, "averages": avg.tolist(), "radii": rad.tolist()},
        )
    amplitude = float(sign[0] * np.exp(np.mean(log_a + p * log_r)))
    tail = 2.0 * np.pi**2 * amplitude * R ** (4.0 - p) / (p - 4.0)
    return float(tail), amplitude, p


def topological_charge(curv: CurvatureField, grid: GridSpec, full_output: bool = False, **kwargs):
    """``-1/(8 pi^2) int tr(F ^ F)`` by midpoint quadrature with tail extrapolation."""
    result = integrate_density(curv, grid, wedge_trace_density, **kwargs)
    return result if full_output else result.value


def yang_mills_value(curv: CurvatureField, grid: GridSpec, full_output: bool = False, **kwargs):
    """``int |F|^2`` with ``|F|^2 = sum_{i<j} ||F_ij||_F^2``; equals ``8 pi^2 k``
    for anti-self-dual fields (normalisation constant 1)."""
    result = integrate_density(curv, grid, pointwise_norm_sq, **kwargs)
    return result if full_output else result.value


DENSITIES = {
    "norm": lambda F: np.sqrt(pointwise_norm_sq(F)),
    "action": pointwise_norm_sq,
    "charge": wedge_trace_density,
}


def radial_profile(curv: CurvatureField, radii, quantity: str = "norm", center=None) -> np.ndarray:
    """Density averaged over the 24-cell directions on spheres of the given radii."""
    if quantity not in DENSITIES:
        raise InvalidParameterError(f"unknown quantity {quantity!r}")
    center = np.zeros(4) if center is None else np.asarray(center, dtype=float)
    radii = np.asarray(radii, dtype=float)
    pts = center + radii[:, None, None] * sphere_directions()
    return np.mean(DENSITIES[quantity](curv(pts)), axis=-1)


def decay_fit(
    curv: CurvatureField,
    r_min: float,
    r_max: float,
    samples: int = 16,
    quantity: str = "norm",
    center=None,
) -> float:
    """Least-squares slope of log(shell-averaged density) against log r.

    ``quantity='norm'`` fits the pointwise curvature norm ``|F|``;
    ``'action'`` fits ``|F|^2``, whose exponent is twice as large.
    """
    if not r_min < r_max:
        raise InvalidParameterError("need r_min < r_max")
    if samples < 3:
        raise InvalidParameterError("need at least 3 shells")
    radii = np.geomspace(r_min, r_max, samples)
    profile = radial_profile(curv, radii, quantity, center)
    if np.any(profile <= 0):
        if np.allclose(profile, profile[0]):
            return 0.0
        raise InvalidParameterError("density must be positive to fit a power law")
    slope, _ = np.polyfit(np.log(radii), np.log(profile), 1)
    return float(slope)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_field_csv(curv: CurvatureField, grid: GridSpec, stream, threads: Optional[int] = None) -> int:
    """One row per grid point: ``x1,x2,x3,x4,density,asd_rel`` (density is ``|F|^2``)."""

    def work(index):
        pts, _ = grid.slab(index)
        if len(pts) == 0:
            return []
        F = curv(pts)
        dens = pointwise_norm_sq(F)
        rel = asd_relative(F)
        return [[*map(_fmt, p), _fmt(d), _fmt(r)] for p, d, r in zip(pts, dens, rel)]

    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x1", "x2", "x3", "x4", "density", "asd_rel"])
    rows = 0
    for block in _parallel_map(work, range(grid.n_per_axis), threads):
        writer.writerows(block)
        rows += len(block)
    return rows
