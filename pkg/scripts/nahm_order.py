"""RK4 error and spectral drift on the exact pole solution of Nahm's equations.

    python3 scripts/nahm_order.py --steps 10 20 40 80 160
"""

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from instantons.reductions import NahmTriple, invariant_drift, nahm_integrate, pole_solution


@dataclass(frozen=True)
class NahmOrderConfig:
    steps: tuple = (10, 20, 40, 80, 160)
    s0: float = 1.0
    s1: float = 2.0
    zeta: tuple = (0.0, 1.0, 1j)


def run(cfg: NahmOrderConfig):
    start = NahmTriple.from_stack(pole_solution(cfg.s0), cfg.s0)
    rows, prev = [], None
    for n in cfg.steps:
        traj = nahm_integrate(start, cfg.s1, n)
        err = float(np.max(np.abs(traj.T - pole_solution(traj.s))))
        order = math.log2(prev / err) if prev is not None and err > 0 else float("nan")
        rows.append((n, err, order, invariant_drift(traj, cfg.zeta)))
        prev = err
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, nargs="+", default=list(NahmOrderConfig.steps))
    a = p.parse_args(argv)
    print(f"{'steps':>6} {'max error':>11} {'order':>7} {'drift':>10}")
    for n, err, order, drift in run(NahmOrderConfig(tuple(a.steps))):
        print(f"{n:6d} {err:11.3e} {order:7.3f} {drift:10.2e}")


if __name__ == "__main__":
    sys.exit(main())
