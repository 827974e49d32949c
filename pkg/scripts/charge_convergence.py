"""Topological charge and Yang-Mills value of scaled instantons against grid spacing.

    python3 scripts/charge_convergence.py --spacings 1.0 0.5 0.25 --sizes 0.5 1 2
"""

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass

from instantons.core import pointwise_norm_sq, wedge_trace_density
from instantons.explicit import scaled_instanton
from instantons.fields import CurvatureField, GridSpec, field_sweep


@dataclass(frozen=True)
class ChargeConvergenceConfig:
    spacings: tuple = (1.0, 0.5, 0.25)
    sizes: tuple = (0.5, 1.0, 2.0)
    extent: float = 8.0
    threads: int = 1


def run(cfg: ChargeConvergenceConfig):
    rows = []
    for lam in cfg.sizes:
        curv = CurvatureField.from_connection(scaled_instanton(lam))
        for h in cfg.spacings:
            start = time.perf_counter()
            sweep = field_sweep(
                curv,
                GridSpec(extent=cfg.extent, spacing=h),
                {"charge": wedge_trace_density, "action": pointwise_norm_sq},
                threads=cfg.threads,
            )
            rows.append(
                {
                    "lam": lam,
                    "spacing": h,
                    "charge": sweep["charge"].value,
                    "tail": sweep["charge"].tail,
                    "ym_over_8pi2": sweep["action"].value / (8 * math.pi**2),
                    "seconds": time.perf_counter() - start,
                }
            )
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--spacings", type=float, nargs="+", default=list(ChargeConvergenceConfig.spacings))
    p.add_argument("--sizes", type=float, nargs="+", default=list(ChargeConvergenceConfig.sizes))
    p.add_argument("--extent", type=float, default=ChargeConvergenceConfig.extent)
    p.add_argument("--threads", type=int, default=ChargeConvergenceConfig.threads)
    p.add_argument("--csv", help="also write the table here")
    a = p.parse_args(argv)
    rows = run(ChargeConvergenceConfig(tuple(a.spacings), tuple(a.sizes), a.extent, a.threads))
    print(f"{'lam':>5} {'h':>6} {'charge':>10} {'tail':>10} {'YM/8pi^2':>10} {'sec':>7}")
    for r in rows:
        print(f"{r['lam']:5.2f} {r['spacing']:6.3f} {r['charge']:10.6f} {r['tail']:10.2e} {r['ym_over_8pi2']:10.6f} {r['seconds']:7.1f}")
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
