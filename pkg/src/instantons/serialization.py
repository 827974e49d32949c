"""JSON codecs for the CLI's inputs and outputs.

Complex matrices are nested row lists of ``{"re": x, "im": y}`` objects.
Floats are written with Python's shortest round-trip repr, so a value read
back is bit-identical to the one written.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adhm import ADHMData
from .core import as_lie_value
from .errors import InvalidParameterError
from .explicit import ThooftParams
from .reductions import HitchinConfig, MonopoleConfig, NahmTriple, PolynomialField


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_json(path) -> object:
    with open(path, encoding="utf-8") as fh:
        return parse_json(fh.read(), str(path))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def load_schema(name: str) -> dict:
    """Shipped JSON Schema, e.g. ``report_nahm`` or ``input_adhm``."""
    try:
        text = resources.files("instantons").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidParameterError(f"no schema named {name!r}") from None
    return json.loads(text)


def _expect_object(obj, where: str, required, optional=()) -> dict:
    if not isinstance(obj, dict):
        raise InvalidParameterError(f"{where}: expected a JSON object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise InvalidParameterError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise InvalidParameterError(f"{where}: missing key(s) {', '.join(map(repr, missing))}")
    return obj


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise InvalidParameterError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _integer(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidParameterError(f"{where}: expected an integer, got {v!r}")
    return v


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def complex_from_json(obj, where: str) -> complex:
    obj = _expect_object(obj, where, ("re", "im"))
    return complex(_number(obj["re"], f"{where}.re"), _number(obj["im"], f"{where}.im"))


def matrix_to_json(m) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def matrix_from_json(obj, where: str, shape: Optional[tuple] = None) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(row, list) for row in obj):
        raise InvalidParameterError(f"{where}: expected a non-empty list of rows")
    width = len(obj[0])
    if any(len(row) != width for row in obj):
        raise InvalidParameterError(f"{where}: rows have different lengths")
    m = np.array([[complex_from_json(z, f"{where}[{a}][{b}]") for b, z in enumerate(row)] for a, row in enumerate(obj)])
    if shape is not None and m.shape != shape:
        raise InvalidParameterError(f"{where}: expected shape {shape}, got {m.shape}")
    return m


# --- ADHM data ---------------------------------------------------------------------------


def adhm_to_json(d: ADHMData) -> dict:
    return {
        "c": d.c,
        "r": d.r,
        "B1": matrix_to_json(d.B1),
        "B2": matrix_to_json(d.B2),
        "i": matrix_to_json(d.i),
        "j": matrix_to_json(d.j),
    }


def adhm_from_json(obj) -> ADHMData:
    obj = _expect_object(obj, "adhm", ("c", "r", "B1", "B2", "i", "j"))
    c, r = _integer(obj["c"], "c"), _integer(obj["r"], "r")
    if c < 1 or r < 1:
        raise InvalidParameterError("c and r must be positive")
    return ADHMData(
        matrix_from_json(obj["B1"], "B1", (c, c)),
        matrix_from_json(obj["B2"], "B2", (c, c)),
        matrix_from_json(obj["i"], "i", (c, r)),
        matrix_from_json(obj["j"], "j", (r, c)),
    )


# --- 't Hooft parameters ---------------------------------------------------------------


def thooft_to_json(p: ThooftParams) -> dict:
    return {"centers": [list(c) for c in p.centers], "sizes": list(p.sizes)}


def thooft_from_json(obj) -> ThooftParams:
    obj = _expect_object(obj, "thooft", ("centers", "sizes"))
    if not isinstance(obj["centers"], list) or not all(isinstance(c, list) for c in obj["centers"]):
        raise InvalidParameterError("centers: expected a list of points")
    if not isinstance(obj["sizes"], list):
        raise InvalidParameterError("sizes: expected a list of numbers")
    centers = [[_number(v, f"centers[{a}]") for v in c] for a, c in enumerate(obj["centers"])]
    sizes = [_number(v, f"sizes[{a}]") for a, v in enumerate(obj["sizes"])]
    if len(centers) != len(sizes):
        raise InvalidParameterError(f"sizes: expected {len(centers)} entries to match centers, got {len(sizes)}")
    return ThooftParams(centers, sizes)


# --- Nahm initial value problems ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NahmProblem:
    initial: NahmTriple
    s1: float
    steps: int
    zeta: tuple = (0j, 1 + 0j, 1j)


def nahm_to_json(p: NahmProblem) -> dict:
    T = p.initial
    return {
        "s0": T.s,
        "s1": p.s1,
        "steps": p.steps,
        "T2": matrix_to_json(T.T2),
        "T3": matrix_to_json(T.T3),
        "T4": matrix_to_json(T.T4),
        "zeta": [complex_to_json(z) for z in p.zeta],
    }


def nahm_from_json(obj) -> NahmProblem:
    obj = _expect_object(obj, "nahm", ("s0", "s1", "steps", "T2", "T3", "T4"), ("zeta",))
    steps = _integer(obj["steps"], "steps")
    if steps < 1:
        raise InvalidParameterError("steps: must be at least 1")
    T2 = matrix_from_json(obj["T2"], "T2")
    mats = [T2] + [matrix_from_json(obj[n], n, T2.shape) for n in ("T3", "T4")]
    triple = NahmTriple(*mats, s=_number(obj["s0"], "s0"))
    zeta = NahmProblem.zeta
    if "zeta" in obj:
        if not isinstance(obj["zeta"], list) or not obj["zeta"]:
            raise InvalidParameterError("zeta: expected a non-empty list")
        zeta = tuple(complex_from_json(z, f"zeta[{a}]") for a, z in enumerate(obj["zeta"]))
    return NahmProblem(triple, _number(obj["s1"], "s1"), steps, zeta)


# --- reduction configurations ------------------------------------------------------------


def polynomial_to_json(p: PolynomialField) -> list:
    return [{"coeff": matrix_to_json(c), "powers": [int(v) for v in pw]} for c, pw in zip(p.coeffs, p.powers)]


def polynomial_from_json(obj, where: str, rank: int, dim: int) -> PolynomialField:
    if not isinstance(obj, list):
        raise InvalidParameterError(f"{where}: expected a list of terms")
    coeffs, powers = [], []
    for n, term in enumerate(obj):
        tw = f"{where}[{n}]"
        term = _expect_object(term, tw, ("coeff", "powers"))
        m = matrix_from_json(term["coeff"], f"{tw}.coeff", (rank, rank))
        try:
            as_lie_value(m)
        except InvalidParameterError as exc:
            raise InvalidParameterError(f"{tw}.coeff: {exc}") from None
        pw = term["powers"]
        if not isinstance(pw, list) or len(pw) != dim:
            raise InvalidParameterError(f"{tw}.powers: expected {dim} exponents")
        pw = [_integer(v, f"{tw}.powers") for v in pw]
        if any(v < 0 for v in pw):
            raise InvalidParameterError(f"{tw}.powers: exponents must be non-negative")
        coeffs.append(m)
        powers.append(pw)
    if not coeffs:
        return PolynomialField.zero(rank, dim)
    return PolynomialField(np.array(coeffs), np.array(powers))


def reduction_to_json(config) -> dict:
    if isinstance(config, MonopoleConfig):
        return {
            "kind": "monopole",
            "rank": config.rank,
            "A": [polynomial_to_json(f) for f in config.A],
            "phi": polynomial_to_json(config.phi),
        }
    return {
        "kind": "hitchin",
        "rank": config.rank,
        "A": [polynomial_to_json(f) for f in config.A],
        "higgs": [polynomial_to_json(f) for f in config.higgs],
    }


def reduction_from_json(obj):
    if not isinstance(obj, dict) or obj.get("kind") not in ("monopole", "hitchin"):
        raise InvalidParameterError("kind: expected 'monopole' or 'hitchin'")
    if obj["kind"] == "monopole":
        obj = _expect_object(obj, "monopole", ("kind", "rank", "A", "phi"))
        dim, n_a = 3, 3
    else:
        obj = _expect_object(obj, "hitchin", ("kind", "rank", "A", "higgs"))
        dim, n_a = 2, 2
    rank = _integer(obj["rank"], "rank")
    if rank < 1:
        raise InvalidParameterError("rank: must be positive")
    if not isinstance(obj["A"], list) or len(obj["A"]) != n_a:
        raise InvalidParameterError(f"A: expected {n_a} components")
    A = [polynomial_from_json(p, f"A[{n}]", rank, dim) for n, p in enumerate(obj["A"])]
    if obj["kind"] == "monopole":
        return MonopoleConfig(A, polynomial_from_json(obj["phi"], "phi", rank, dim), rank)
    if not isinstance(obj["higgs"], list) or len(obj["higgs"]) != 2:
        raise InvalidParameterError("higgs: expected 2 components")
    higgs = [polynomial_from_json(p, f"higgs[{n}]", rank, dim) for n, p in enumerate(obj["higgs"])]
    return HitchinConfig(A, higgs, rank)
