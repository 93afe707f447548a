#!/usr/bin/env python3
"""Optimality gap vs horizon on the desk QP for both algorithms.

    python3 scripts/rate_sweep.py --seeds 5 --out runs/rates.csv
"""
import argparse
import csv
import warnings
from pathlib import Path

import numpy as np

from csoa.bench import DeskQP, desk_qp_solution
from csoa.metrics import fit_rate
from csoa.sets import L1BallSet
from csoa.solvers import ManualSchedule, ScheduleWarning, run, schedule_theorem1

FW = ManualSchedule(eta0=1.0, delta=1.0, upsilon0=0.5, rho0=1.0, eta_power=0.75,
                    upsilon_power=0.25, rho_power=0.5)


def sweep(algorithm, qp, make_schedule, horizons, seeds):
    f_star = desk_qp_solution(qp)[1]
    rows = []
    for T in horizons:
        rs = [run(algorithm, qp, make_schedule(T), T, seed=s, keep_trace=False) for s in seeds]
        gaps = [r.avg_objective - f_star for r in rs]
        viol = [float(r.avg_constraints.max()) for r in rs]
        rows.append(dict(algorithm=algorithm, T=T, gap_mean=np.mean(gaps), gap_std=np.std(gaps),
                         max_avg_violation=max(viol)))
        print(f"{algorithm:8s} T={T:<7d} gap {np.mean(gaps):.4g} +- {np.std(gaps):.2g}  "
              f"max avg H {max(viol):.3g}")
    fit = fit_rate(horizons, [r["gap_mean"] for r in rows])
    print(f"{algorithm:8s} slope {fit.slope:.3f} (r2 {fit.r2:.3f})")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--max-exp", type=int, default=5, help="largest horizon is 10^max_exp")
    ap.add_argument("--out", default="runs/rates.csv")
    args = ap.parse_args()
    horizons = [10 ** k for k in range(2, args.max_exp + 1)]
    seeds = range(args.seeds)

    qp = DeskQP()
    c = qp.exact_constants()

    def t1(T):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ScheduleWarning)
            return schedule_theorem1(c, T)

    rows = sweep("csoa", qp, t1, horizons, seeds)
    rows += sweep("fw_csoa", DeskQP(feasible_set=L1BallSet(2, 1.0)), lambda T: FW, horizons, seeds)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
