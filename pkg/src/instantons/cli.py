"""Command-line entry point: ``instantons <command> [options]``.

Every command prints a short human summary on stdout.  ``--report PATH``
writes the machine-readable JSON report; ``--output PATH`` writes the
command's data product (field or trajectory CSV, solved ADHM JSON), or the
report itself when ``--format json`` is given.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import adhm, explicit, fields, moduli, reductions
from .core import pointwise_norm_sq, wedge_trace_density
from .errors import InstantonError, InvalidParameterError, NonRegularDataError, ToleranceNotMetError
from .serialization import (
    NahmProblem,
    adhm_from_json,
    adhm_to_json,
    dumps,
    load_json,
    nahm_from_json,
    reduction_from_json,
    thooft_from_json,
)

SCHEMA_VERSION = 1
COMMANDS = ("thooft", "adhm-check", "adhm-field", "adhm-solve", "nahm", "reduce-check", "moduli-dim", "charge")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    report: Optional[str] = None
    format: str = "csv"
    extent: float = 8.0
    spacing: float = 0.25
    sample_spacing: float = 1.0
    exclude_radius: float = 0.1
    tol: float = 1e-10
    seed: int = 0
    threads: Optional[int] = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidParameterError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise InvalidParameterError("--format must be csv or json")
        for name in ("spacing", "sample_spacing"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"--{name.replace('_', '-')} must be positive")
        if not self.extent > self.spacing:
            raise InvalidParameterError("--extent must exceed --spacing")
        if self.exclude_radius < 0:
            raise InvalidParameterError("--exclude-radius must be non-negative")
        if not self.tol > 0:
            raise InvalidParameterError("--tol must be positive")
        if self.threads is not None and self.threads < 1:
            raise InvalidParameterError("--threads must be at least 1")

    def grid(self, dimension: int = 4) -> fields.GridSpec:
        return fields.GridSpec(dimension=dimension, extent=self.extent, spacing=self.spacing)

    def sample_grid(self, dimension: int = 4) -> fields.GridSpec:
        return fields.GridSpec(dimension=dimension, extent=self.extent, spacing=self.sample_spacing)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidParameterError(message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--input", help="JSON input file")
    p.add_argument("--output", help="data product (CSV/JSON) path")
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--extent", type=float, default=8.0, help="half-width of the integration box")
    p.add_argument("--spacing", type=float, default=0.25, help="quadrature grid spacing")
    p.add_argument("--sample-spacing", type=float, default=1.0, help="spacing of CSV field dumps")
    p.add_argument("--exclude-radius", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (env INSTANTON_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="instantons", description="Numerical checks for Yang-Mills instantons on R^4.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("thooft", help="'t Hooft multi-instanton: field CSV, charge, ASD report")
    _common(p)
    p = sub.add_parser("adhm-check", help="ADHM residuals, stability and regularity")
    _common(p)
    p = sub.add_parser("adhm-field", help="ADHM instanton: field CSV, charge, ASD report")
    _common(p)
    p = sub.add_parser("adhm-solve", help="solve the ADHM equations from a seed")
    _common(p)
    p.add_argument("--c", type=int, default=2, help="charge of a random seed")
    p.add_argument("--r", type=int, default=2, help="rank of a random seed")
    p.add_argument("--scale", type=float, default=2.0, help="entry scale of a random seed")
    p.add_argument("--max-iters", type=int, default=10_000)
    p = sub.add_parser("nahm", help="integrate Nahm's equations")
    _common(p)
    p.add_argument("--drift-tol", type=float, default=1e-8)
    p = sub.add_parser("reduce-check", help="Bogomolny / Hitchin residual report")
    _common(p)
    p.add_argument("--samples", type=int, default=20, help="random configurations when no input is given")
    p.add_argument("--fd-step", type=float, default=1e-3, help="finite-difference step")
    p = sub.add_parser("moduli-dim", help="expected moduli dimension")
    _common(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b1", type=int, default=0)
    p.add_argument("--b-plus", type=int, default=0)
    p = sub.add_parser("charge", help="topological charge of a field")
    _common(p)
    p.add_argument("--source", choices=("basic", "scaled", "thooft", "adhm"), default="basic")
    p.add_argument("--lam", type=float, default=1.0, help="size of the scaled instanton")
    return parser


_COMMON_KEYS = {
    "input", "output", "report", "format", "extent", "spacing", "sample_spacing",
    "exclude_radius", "tol", "seed", "threads",
}


def parse_config(argv) -> RunConfig:
    argv = list(argv)
    parser = build_parser()
    if not argv:
        raise InvalidParameterError(parser.format_usage().strip())
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    if command is None:
        raise InvalidParameterError(parser.format_usage().strip())
    common = {k: ns.pop(k) for k in _COMMON_KEYS}
    return RunConfig(command=command, options=ns, **common)


# --- commands ------------------------------------------------------------------------


def _quadrature_json(q: fields.Quadrature) -> dict:
    return {
        "value": q.value,
        "bulk": q.bulk,
        "tail": q.tail,
        "excluded_correction": q.excluded_correction,
        "tail_exponent": q.tail_exponent,
        "n_points": q.n_points,
    }


def _grid_json(cfg: RunConfig, exclusions: int = 0) -> dict:
    return {
        "extent": cfg.extent,
        "spacing": cfg.spacing,
        "exclude_radius": cfg.exclude_radius,
        "excluded_balls": exclusions,
    }


def _field_report(cfg: RunConfig, curv: fields.CurvatureField, centers=()) -> tuple[dict, fields.GridSpec]:
    grid = cfg.grid()
    if centers and cfg.exclude_radius > 0:
        grid = grid.with_exclusions(centers, cfg.exclude_radius)
    sweep = fields.field_sweep(
        curv, grid, {"charge": wedge_trace_density, "action": pointwise_norm_sq}, with_asd=True, threads=cfg.threads
    )
    charge = sweep["charge"].value
    report = {
        "grid": _grid_json(cfg, len(grid.excluded)),
        "charge": _quadrature_json(sweep["charge"]),
        "yang_mills": _quadrature_json(sweep["action"]),
        "yang_mills_over_8pi2": sweep["action"].value / (8 * math.pi**2),
        "nearest_integer": int(round(charge)),
        "integer_deviation": abs(charge - round(charge)),
        "asd_max_rel": sweep["asd"][0],
        "asd_rms_rel": sweep["asd"][1],
    }
    return report, grid


def _write_field_dump(cfg: RunConfig, curv, centers=()):
    grid = cfg.sample_grid()
    if centers and cfg.exclude_radius > 0:
        grid = grid.with_exclusions(centers, cfg.exclude_radius)
    buf = io.StringIO()
    fields.write_field_csv(curv, grid, buf, cfg.threads)
    return buf.getvalue()


def _asd_gate(report: dict, threshold: float):
    if report["asd_max_rel"] > threshold:
        raise ToleranceNotMetError(f"ASD residual {report['asd_max_rel']:.3e} exceeds {threshold:.1e}")


def _need_input(cfg: RunConfig, what: str):
    if not cfg.input:
        raise InvalidParameterError(f"{cfg.command} needs --input with {what}")
    return load_json(cfg.input)


def _load_adhm(cfg: RunConfig) -> adhm.ADHMData:
    return adhm_from_json(load_json(cfg.input)) if cfg.input else adhm.basic_adhm_data()


def cmd_thooft(cfg: RunConfig):
    params = thooft_from_json(_need_input(cfg, "'t Hooft parameters"))
    curv = fields.CurvatureField.from_connection(explicit.thooft_connection(params))
    report, _ = _field_report(cfg, curv, params.centers)
    report.update(k=params.k, parameters=params.degrees_of_freedom)
    summary = [
        f"'t Hooft ansatz, k = {params.k}",
        f"charge      {report['charge']['value']:.6f}",
        f"YM / 8pi^2  {report['yang_mills_over_8pi2']:.6f}",
        f"ASD max rel {report['asd_max_rel']:.3e}",
    ]
    return report, summary, (lambda: _write_field_dump(cfg, curv, params.centers)), (lambda: _asd_gate(report, 1e-6))


def cmd_adhm_check(cfg: RunConfig):
    d = _load_adhm(cfg)
    rc, rr = adhm.adhm_residuals(d)
    reg = adhm.regularity_report(d, cfg.tol)
    res = {"complex": float(np.linalg.norm(rc)), "real": float(np.linalg.norm(rr))}
    report = {"c": d.c, "r": d.r, "residuals": res, **reg}
    report["expected_dimension"] = moduli.adhm_framed_dim(d.r, d.c)
    report["tangent_dimension"] = adhm.framed_tangent_dimension(d)[0] if reg["regular"] else None
    summary = [
        f"ADHM data c = {d.c}, r = {d.r}",
        f"residuals   complex {res['complex']:.3e}  real {res['real']:.3e}",
        f"stable {reg['stable']}  costable {reg['costable']}  regular {reg['regular']}",
    ]

    def gate():
        if not reg["regular"]:
            raise NonRegularDataError("ADHM data is not regular")
        if max(res.values()) > cfg.tol:
            raise ToleranceNotMetError(f"ADHM residual {max(res.values()):.3e} exceeds {cfg.tol:.1e}")

    return report, summary, None, gate


def cmd_adhm_field(cfg: RunConfig):
    d = _load_adhm(cfg)
    if not adhm.is_regular(d, cfg.tol):
        raise NonRegularDataError("ADHM data is not regular")
    curv = adhm.adhm_curvature_field(d)
    report, _ = _field_report(cfg, curv)
    res = [float(np.linalg.norm(m)) for m in adhm.adhm_residuals(d)]
    report.update(c=d.c, r=d.r, residuals={"complex": res[0], "real": res[1]})
    summary = [
        f"ADHM instanton c = {d.c}, r = {d.r}",
        f"charge      {report['charge']['value']:.6f}",
        f"YM / 8pi^2  {report['yang_mills_over_8pi2']:.6f}",
        f"ASD max rel {report['asd_max_rel']:.3e}",
    ]

    def gate():
        if max(res) > cfg.tol:
            raise ToleranceNotMetError(f"ADHM residual {max(res):.3e} exceeds {cfg.tol:.1e}")
        _asd_gate(report, 1e-6)

    return report, summary, (lambda: _write_field_dump(cfg, curv)), gate


def cmd_adhm_solve(cfg: RunConfig):
    o = cfg.options
    if cfg.input:
        seed = adhm_from_json(load_json(cfg.input))
    else:
        seed = adhm.random_adhm_data(o["c"], o["r"], np.random.default_rng(cfg.seed), o["scale"])
    sol = adhm.solve_adhm(seed, tol=cfg.tol, max_iters=o["max_iters"])
    reg = adhm.regularity_report(sol.data, cfg.tol)
    report = {
        "c": sol.data.c,
        "r": sol.data.r,
        "seed": None if cfg.input else cfg.seed,
        "iterations": sol.iterations,
        "residual": math.sqrt(sol.objective),
        "regular": reg["regular"],
        "data": adhm_to_json(sol.data),
    }
    summary = [
        f"ADHM solve c = {sol.data.c}, r = {sol.data.r}",
        f"iterations  {sol.iterations}",
        f"residual    {math.sqrt(sol.objective):.3e}",
        f"regular     {reg['regular']}",
    ]

    def gate():
        if not reg["regular"]:
            raise NonRegularDataError("solution is not regular")

    return report, summary, (lambda: dumps(adhm_to_json(sol.data))), gate


def _default_nahm() -> NahmProblem:
    T = reductions.pole_solution(1.0)
    return NahmProblem(reductions.NahmTriple.from_stack(T, 1.0), 2.0, 100)


def cmd_nahm(cfg: RunConfig):
    prob = nahm_from_json(load_json(cfg.input)) if cfg.input else _default_nahm()
    traj = reductions.nahm_integrate(prob.initial, prob.s1, prob.steps)
    drift = reductions.invariant_drift(traj, prob.zeta)
    ah = reductions.antihermitian_drift(traj)
    report = {
        "rank": traj.rank,
        "s0": float(traj.s[0]),
        "s1": float(traj.s[-1]),
        "steps": prob.steps,
        "zeta": [[z.real, z.imag] for z in map(complex, prob.zeta)],
        "invariant_drift": drift,
        "antihermitian_drift": ah,
    }
    summary = [
        f"Nahm flow rank {traj.rank}, s in [{traj.s[0]:g}, {traj.s[-1]:g}], {prob.steps} steps",
        f"spectral drift       {drift:.3e}",
        f"anti-hermitian drift {ah:.3e}",
    ]

    def dump():
        buf = io.StringIO()
        reductions.write_trajectory_csv(traj, buf)
        return buf.getvalue()

    def gate():
        if drift > cfg.options["drift_tol"]:
            raise ToleranceNotMetError(f"spectral drift {drift:.3e} exceeds {cfg.options['drift_tol']:.1e}")

    return report, summary, dump, gate


def _reduction_entry(name, config, grid_extent, spacing, h, threads):
    if isinstance(config, reductions.MonopoleConfig):
        grid = fields.GridSpec(dimension=3, extent=grid_extent, spacing=spacing)
        lifted = reductions.bogomolny_residual(config, grid, h, threads)
        comp = reductions.bogomolny_component_residual(config, grid, h)
        kind = "monopole"
    else:
        grid = fields.GridSpec(dimension=2, extent=grid_extent, spacing=spacing)
        lifted = reductions.hitchin_residual(config, grid, h, threads)
        comp = reductions.hitchin_component_residual(config, grid, h)
        kind = "hitchin"
    gap = max(abs(lifted[0] - comp[0]), abs(lifted[1] - comp[1]))
    return {
        "name": name,
        "kind": kind,
        "max_rel": lifted[0],
        "rms_rel": lifted[1],
        "component_max_rel": comp[0],
        "component_rms_rel": comp[1],
        "consistency_gap": gap,
    }


def cmd_reduce_check(cfg: RunConfig):
    o = cfg.options
    if cfg.input:
        configs = [("input", reduction_from_json(load_json(cfg.input)))]
    else:
        rng = np.random.default_rng(cfg.seed)
        configs = [("abelian-monopole", reductions.abelian_monopole()), ("abelian-hitchin", reductions.abelian_hitchin())]
        for n in range(o["samples"]):
            configs.append((f"random-monopole-{n}", reductions.random_monopole_config(rng)))
            configs.append((f"random-hitchin-{n}", reductions.random_hitchin_config(rng)))
    entries = [_reduction_entry(name, c, cfg.extent, cfg.spacing, o["fd_step"], cfg.threads) for name, c in configs]
    worst = max(e["consistency_gap"] for e in entries)
    report = {"h": o["fd_step"], "extent": cfg.extent, "spacing": cfg.spacing, "configs": entries, "max_consistency_gap": worst}
    summary = [f"{len(entries)} configurations, lifted vs component gap {worst:.3e}"]
    summary += [f"  {e['name']:<22} max_rel {e['max_rel']:.3e}" for e in entries[:4]]

    def gate():
        if worst > 1e-12:
            raise ToleranceNotMetError(f"lifted and component residuals differ by {worst:.3e}")

    return report, summary, None, gate


def cmd_moduli_dim(cfg: RunConfig):
    o = cfg.options
    q = moduli.ModuliQuery(o["r"], o["k"], o["b1"], o["b_plus"])
    dim = moduli.moduli_dimension(q)
    report = {"r": q.r, "k": q.k, "b1": q.b1, "b_plus": q.b_plus, "dimension": dim}
    return report, [str(dim)], None, None


def cmd_charge(cfg: RunConfig):
    o = cfg.options
    source, centers = o["source"], ()
    if source == "basic":
        conn = explicit.basic_instanton()
    elif source == "scaled":
        if not o["lam"] > 0:
            raise InvalidParameterError("--lam must be positive")
        conn = explicit.scaled_instanton(o["lam"])
    elif source == "thooft":
        params = thooft_from_json(_need_input(cfg, "'t Hooft parameters"))
        conn, centers = explicit.thooft_connection(params), params.centers
    else:
        d = _load_adhm(cfg)
        if not adhm.is_regular(d, cfg.tol):
            raise NonRegularDataError("ADHM data is not regular")
        curv = adhm.adhm_curvature_field(d)
        conn = None
    if conn is not None:
        curv = fields.CurvatureField.from_connection(conn)
    grid = cfg.grid()
    if centers and cfg.exclude_radius > 0:
        grid = grid.with_exclusions(centers, cfg.exclude_radius)
    q = fields.topological_charge(curv, grid, full_output=True, threads=cfg.threads)
    report = {"source": source, "grid": _grid_json(cfg, len(grid.excluded)), "charge": _quadrature_json(q)}
    return report, [repr(q.value)], None, None


HANDLERS = {
    "thooft": cmd_thooft,
    "adhm-check": cmd_adhm_check,
    "adhm-field": cmd_adhm_field,
    "adhm-solve": cmd_adhm_solve,
    "nahm": cmd_nahm,
    "reduce-check": cmd_reduce_check,
    "moduli-dim": cmd_moduli_dim,
    "charge": cmd_charge,
}


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        report, summary, dump, gate = HANDLERS[cfg.command](cfg)
        document = {"schema_version": SCHEMA_VERSION, "command": cfg.command, **report}
        if cfg.report:
            _write(cfg.report, dumps(document))
        if cfg.output:
            if cfg.format == "json":
                _write(cfg.output, dumps(document))
            elif dump is not None:
                _write(cfg.output, dump())
            else:
                raise InvalidParameterError(f"{cfg.command} has no CSV product; use --format json")
        for line in summary:
            print(line, file=stdout)
        if gate is not None:
            gate()
    except InstantonError as exc:
        print(f"error: {exc}", file=stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
