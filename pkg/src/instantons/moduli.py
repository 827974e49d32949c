"""Dimension counts for instanton moduli."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError


def _check_int(name: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class ModuliQuery:
    r: int
    k: int
    b1: int = 0
    b_plus: int = 0

    def __post_init__(self):
        _check_int("r", self.r, 2)
        _check_int("k", self.k, 1)
        _check_int("b1", self.b1, 0)
        _check_int("b_plus", self.b_plus, 0)


def moduli_dimension(q: ModuliQuery) -> int:
    """Expected dimension ``4rk - (r^2 - 1)(1 - b1 + b+)`` of irreducible SU(r) instantons.

    This is an index, so a negative value is returned unchanged.
    """
    return 4 * q.r * q.k - (q.r * q.r - 1) * (1 - q.b1 + q.b_plus)


def thooft_family_dim(k: int) -> int:
    """Parameter count of the 't Hooft ansatz: a center and a size per singularity."""
    return 5 * _check_int("k", k, 1)


def adhm_framed_dim(r: int, c: int) -> int:
    """Real dimension of framed solutions modulo U(c) at a regular point."""
    _check_int("r", r, 1)
    _check_int("c", c, 1)
    data = 4 * c * c + 4 * r * c
    complex_eq, real_eq, orbit = 2 * c * c, c * c, c * c
    return data - complex_eq - real_eq - orbit
