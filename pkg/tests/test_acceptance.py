"""One test per acceptance criterion, at the stated tolerances.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import record_acceptance
from instantons.adhm import (
    adhm_curvature,
    adhm_curvature_field,
    adhm_residuals,
    basic_adhm_data,
    framed_tangent_dimension,
    is_costable,
    is_regular,
    is_stable,
    random_adhm_data,
    solve_adhm,
)
from instantons.cli import main
from instantons.core import SIGMA, pointwise_norm_sq, wedge_trace_density
from instantons.explicit import ThooftParams, basic_instanton, thooft_connection
from instantons.fields import (
    CurvatureField,
    GridSpec,
    asd_relative,
    decay_fit,
    field_sweep,
    topological_charge,
    yang_mills_value,
)
from instantons.moduli import ModuliQuery, adhm_framed_dim, moduli_dimension, thooft_family_dim
from instantons.reductions import (
    NahmTriple,
    abelian_hitchin,
    abelian_monopole,
    bogomolny_component_residual,
    bogomolny_residual,
    hitchin_component_residual,
    hitchin_residual,
    invariant_drift,
    nahm_integrate,
    pole_solution,
    random_hitchin_config,
    random_monopole_config,
)
from instantons.serialization import NahmProblem, adhm_to_json, dumps, nahm_to_json, thooft_to_json

DEFAULT_GRID = GridSpec(extent=8.0, spacing=0.25)
BASIC = CurvatureField.from_connection(basic_instanton())
THOOFT_K2 = ThooftParams([[3.0, 0.0, 0.0, 0.0], [-3.0, 0.0, 0.0, 0.0]], [1.0, 1.0])


def test_criterion_1_charge_quantization():
    start = time.perf_counter()
    q = topological_charge(BASIC, DEFAULT_GRID, full_output=True, threads=1)
    elapsed = time.perf_counter() - start
    ok = abs(q.value - 1.0) <= 0.01 and elapsed < 120 and q.tail != 0.0
    record_acceptance(1, "basic instanton charge 1.00 +- 0.01", ok, f"charge {q.value:.6f}, tail {q.tail:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_2_yang_mills_value():
    ym = yang_mills_value(BASIC, DEFAULT_GRID, threads=1)
    rel = abs(ym / (8 * math.pi**2) - 1.0)
    ok = rel <= 0.01
    record_acceptance(2, "YM = 8 pi^2 within 1%", ok, f"YM {ym:.5f}, 8pi^2 {8 * math.pi**2:.5f}, rel {rel:.2e}")
    assert ok


def test_criterion_3_asd_certificates():
    rng = np.random.default_rng(3)
    x = rng.uniform(-3, 3, size=(100, 4))
    analytic = float(np.max(asd_relative(BASIC(x))))
    y = rng.uniform(-3, 3, size=(100, 4))
    adhm = float(np.max(asd_relative(adhm_curvature(basic_adhm_data(), y))))
    ok = analytic < 1e-10 and adhm < 1e-10
    record_acceptance(3, "ASD certificates < 1e-10", ok, f"analytic {analytic:.2e}, ADHM {adhm:.2e}")
    assert ok


def test_criterion_4_thooft_two_instantons():
    grid = DEFAULT_GRID.with_exclusions(THOOFT_K2.centers, 0.1)
    curv = CurvatureField.from_connection(thooft_connection(THOOFT_K2))
    sweep = field_sweep(curv, grid, {"charge": wedge_trace_density}, with_asd=True)
    charge, asd = sweep["charge"].value, sweep["asd"][0]
    ok = asd < 1e-6 and abs(charge - 2.0) <= 0.05
    record_acceptance(4, "'t Hooft k=2 ASD < 1e-6, charge 2.00 +- 0.05", ok, f"charge {charge:.5f}, ASD max {asd:.2e}")
    assert ok


@pytest.fixture(scope="module")
def solved_c2():
    return solve_adhm(random_adhm_data(2, 2, np.random.default_rng(0), scale=2.0), tol=1e-10)


def test_criterion_5_adhm_pipeline(solved_c2):
    d = basic_adhm_data()
    rc, rr = adhm_residuals(d)
    basic_ok = not rc.any() and not rr.any() and is_stable(d) and is_costable(d) and is_regular(d)

    x = np.random.default_rng(5).uniform(-3, 3, size=(20, 4))
    dens = pointwise_norm_sq(adhm_curvature(d, x))
    dens0 = pointwise_norm_sq(adhm_curvature(d, np.zeros((1, 4))))[0]
    # the norm |F| follows (1+|x|^2)^-2, so the action density ratio is its square
    profile = 1.0 / (1.0 + np.sum(x * x, axis=-1)) ** 2
    ratio_err = float(np.max(np.abs(np.sqrt(dens / dens0) - profile)))

    residual = math.sqrt(solved_c2.objective)
    charge = topological_charge(adhm_curvature_field(solved_c2.data), DEFAULT_GRID)
    ok = basic_ok and ratio_err < 1e-6 and residual < 1e-10 and abs(charge - 2.0) <= 0.05
    detail = f"basic exact {basic_ok}, profile err {ratio_err:.1e}, c=2 residual {residual:.1e}, charge {charge:.5f}"
    record_acceptance(5, "ADHM pipeline", ok, detail)
    assert ok


def test_criterion_6_dimension_formulas(solved_c2):
    formulas = all(
        moduli_dimension(ModuliQuery(2, k)) == 8 * k - 3
        and thooft_family_dim(k) == 5 * k
        and moduli_dimension(ModuliQuery(3, k, 1, 2)) == 12 * k - 8 * 2
        for k in range(1, 101)
    )
    kernel = {
        (2, 1): framed_tangent_dimension(basic_adhm_data(), threshold=1e-8)[0],
        (2, 2): framed_tangent_dimension(solved_c2.data, threshold=1e-8)[0],
    }
    kernel_ok = all(dim == adhm_framed_dim(r, c) == 4 * r * c for (r, c), dim in kernel.items())
    ok = formulas and kernel_ok
    record_acceptance(6, "dimension formulas and kernel oracle", ok, f"k=1..100 exact {formulas}, kernel dims {kernel}")
    assert ok


def test_criterion_7_nahm_flow():
    start = NahmTriple.from_stack(pole_solution(1.0), 1.0)

    def error(n):
        traj = nahm_integrate(start, 2.0, n)
        return float(np.max(np.abs(traj.T - pole_solution(traj.s)))), traj

    err100, traj = error(100)
    endpoint = float(np.max(np.abs(traj.T[-1] - SIGMA / 4j)))
    errs = [error(n)[0] for n in (10, 20, 40)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    drift = invariant_drift(traj, (0.0, 1.0, 1j))
    ok = err100 < 1e-9 and endpoint < 1e-9 and all(abs(p - 4.0) <= 0.2 for p in orders) and drift < 1e-8
    detail = f"max error {err100:.1e}, orders {', '.join(f'{p:.3f}' for p in orders)}, drift {drift:.1e}"
    record_acceptance(7, "Nahm pole solution, RK4 order, spectral drift", ok, detail)
    assert ok


def test_criterion_8_reduction_consistency():
    rng = np.random.default_rng(8)
    g3 = GridSpec(dimension=3, extent=1.0, spacing=0.5, region="cube")
    g2 = GridSpec(dimension=2, extent=1.0, spacing=0.25, region="cube")
    gap = 0.0
    for _ in range(200):
        m, h = random_monopole_config(rng), random_hitchin_config(rng)
        for a, b in (
            (bogomolny_residual(m, g3), bogomolny_component_residual(m, g3)),
            (hitchin_residual(h, g2), hitchin_component_residual(h, g2)),
        ):
            gap = max(gap, abs(a[0] - b[0]), abs(a[1] - b[1]))
    # linear fields: a wide stencil keeps the 1/h amplification of rounding small
    big3, big2 = GridSpec(dimension=3, extent=2.0, spacing=0.5), GridSpec(dimension=2, extent=2.0, spacing=0.25)
    abelian = max(bogomolny_residual(abelian_monopole(), big3, h=0.1)[0], hitchin_residual(abelian_hitchin(), big2, h=0.1)[0])
    ok = gap <= 1e-12 and abelian < 1e-14
    record_acceptance(8, "reduction consistency and abelian solutions", ok, f"gap {gap:.1e} over 400 configs, abelian {abelian:.1e}")
    assert ok


def test_criterion_9_decay_law():
    slope = decay_fit(BASIC, 5.0, 50.0, quantity="norm")
    ok = abs(slope + 4.0) <= 0.1
    record_acceptance(9, "decay slope -4.0 +- 0.1 on [5, 50]", ok, f"slope {slope:.4f}")
    assert ok


def test_criterion_10_cli_determinism(tmp_path, capsys):
    inputs = {
        "thooft": thooft_to_json(THOOFT_K2),
        "adhm": adhm_to_json(basic_adhm_data()),
        "nahm": nahm_to_json(NahmProblem(NahmTriple.from_stack(pole_solution(1.0), 1.0), 2.0, 100)),
    }
    for name, obj in inputs.items():
        (tmp_path / f"{name}.json").write_text(dumps(obj))
    coarse = ["--extent", "4", "--spacing", "0.5"]
    runs = {
        "thooft": ["thooft", "--input", tmp_path / "thooft.json"] + coarse,
        "adhm-check": ["adhm-check", "--input", tmp_path / "adhm.json", "--format", "json"],
        "adhm-field": ["adhm-field", "--input", tmp_path / "adhm.json"] + coarse,
        "adhm-solve": ["adhm-solve", "--seed", "0"],
        "nahm": ["nahm", "--input", tmp_path / "nahm.json"],
        "reduce-check": ["reduce-check", "--samples", "3", "--extent", "1", "--spacing", "0.5", "--format", "json"],
        "moduli-dim": ["moduli-dim", "--r", "2", "--k", "4", "--format", "json"],
        "charge": ["charge", "--source", "adhm", "--input", tmp_path / "adhm.json", "--format", "json"] + coarse,
    }
    identical = {}
    for name, argv in runs.items():
        seen = set()
        for threads in (1, 2, 8):
            out, rep = tmp_path / f"{name}-{threads}.out", tmp_path / f"{name}-{threads}.json"
            code = main([str(a) for a in argv] + ["--threads", str(threads), "--output", str(out), "--report", str(rep)])
            stdout = capsys.readouterr().out
            assert code == 0, name
            json.loads(rep.read_text())
            seen.add((out.read_bytes(), rep.read_bytes(), stdout))
        identical[name] = len(seen) == 1
    ok = all(identical.values())
    record_acceptance(10, "CLI outputs byte-identical for 1, 2, 8 threads", ok, f"{sum(identical.values())}/{len(identical)} commands identical")
    assert ok
