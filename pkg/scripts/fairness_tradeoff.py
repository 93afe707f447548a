#!/usr/bin/env python3
"""Held-out p%-rule and accuracy against the covariance budget c on the
synthetic fairness data, plus the unconstrained baseline.

    python3 scripts/fairness_tradeoff.py --T 100000 --budgets 0.01,0.05,0.2,1.0
"""
import argparse
import math

from csoa.metrics import accuracy, p_percent
from csoa.problems import SyntheticFairnessConfig, gen_synthetic_fairness
from csoa.solvers import ManualSchedule, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budgets", default="0.01,0.05,0.2,1.0")
    ap.add_argument("--upsilon0", type=float, default=10.0)
    args = ap.parse_args()

    sched = ManualSchedule(eta0=0.15, delta=0.01, upsilon0=args.upsilon0)
    print(f"{'c':>8s} {'p%':>6s} {'acc':>6s} {'cov':>8s} {'avg h+':>9s} {'avg h-':>9s}")
    for c in [float(v) for v in args.budgets.split(",")]:
        prob = gen_synthetic_fairness(SyntheticFairnessConfig(phi=math.pi / 4, c=c), args.seed)
        if sched.upsilon(args.T) >= c:
            print(f"{c:8.3g}  skipped: upsilon(T)={sched.upsilon(args.T):.3g} >= c")
            continue
        r = run("csoa", prob, sched, args.T, seed=args.seed, keep_trace=False)
        w = r.state.x
        print(f"{c:8.3g} {p_percent(w, prob.X_test, prob.s_test):6.1f} "
              f"{accuracy(w, prob.X_test, prob.y_test):6.3f} {prob.covariance(w):8.4f} "
              f"{r.avg_constraints[0]:9.4f} {r.avg_constraints[1]:9.4f}")
    prob = gen_synthetic_fairness(SyntheticFairnessConfig(phi=math.pi / 4), args.seed)
    r = run("csoa", prob.without_constraints(), sched, args.T, seed=args.seed, keep_trace=False)
    w = r.state.x
    print(f"{'none':>8s} {p_percent(w, prob.X_test, prob.s_test):6.1f} "
          f"{accuracy(w, prob.X_test, prob.y_test):6.3f} {prob.covariance(w):8.4f}")


if __name__ == "__main__":
    main()
