"""Command-line experiment driver.

Verbs: ``run``, ``sweep``, ``datagen``, ``report``, ``check``. Exit codes:
0 success, 1 failed check, 2 configuration error, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from . import __version__
from .bench import DeskQP, desk_qp_solution, finite_diff_check
from .core import ConfigError, NumericalAbort, ProblemConstants, estimate_constants
from .metrics import accuracy, fit_rate, p_percent_detail
from .problems import (SyntheticFairnessConfig, gen_synthetic_fairness, gen_synthetic_mc,
                       gen_synthetic_raw, ingest_csv)
from .sets import BoxSet, L1BallSet, L2BallSet
from .solvers import ManualSchedule, run, schedule_theorem1, schedule_theorem2
from .trace import TraceWriter, read_trace

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3
OUTPUT_ENV = "CSOA_OUTPUT_DIR"
PROBLEM_KINDS = ("desk_qp", "fairness_synthetic", "fairness_csv", "matrix_completion")
SCHEDULE_KINDS = ("theorem1", "theorem2", "manual")


# ----------------------------------------------------------------------------- config


@dataclass
class ProblemSpec:
    kind: str = "desk_qp"
    params: Dict[str, Any] = field(default_factory=dict)
    csv: Optional[str] = None
    schema: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0


@dataclass
class ScheduleSpec:
    kind: str = "theorem1"
    eta0: Optional[float] = None
    delta: Optional[float] = None
    upsilon0: Optional[float] = None
    rho0: float = 1.0
    eta_power: float = 0.5
    upsilon_power: float = 0.5
    rho_power: float = 0.5
    constants: Dict[str, float] = field(default_factory=dict)


@dataclass
class RunConfig:
    problem: ProblemSpec = field(default_factory=ProblemSpec)
    algorithm: str = "csoa"
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    T: int = 1000
    b: Optional[int] = None
    seed: Optional[int] = None
    trace_stride: Optional[int] = None
    output_dir: Optional[str] = None

    def validate(self, base_dir: Path = Path(".")):
        if self.seed is None:
            raise ConfigError("seed: required (pass --seed)")
        if self.problem.kind not in PROBLEM_KINDS:
            raise ConfigError(f"problem.kind: expected one of {PROBLEM_KINDS}, got {self.problem.kind!r}")
        if self.algorithm not in ("csoa", "fw_csoa"):
            raise ConfigError(f"algorithm: expected csoa or fw_csoa, got {self.algorithm!r}")
        if self.schedule.kind not in SCHEDULE_KINDS:
            raise ConfigError(f"schedule.kind: expected one of {SCHEDULE_KINDS}, got {self.schedule.kind!r}")
        if self.schedule.kind == "manual":
            for name in ("eta0", "delta", "upsilon0"):
                if getattr(self.schedule, name) is None:
                    raise ConfigError(f"schedule.{name}: required for a manual schedule")
        if not isinstance(self.T, int) or self.T < 0:
            raise ConfigError(f"T: expected a non-negative integer, got {self.T!r}")
        if self.b is not None and (not isinstance(self.b, int) or self.b < 1):
            raise ConfigError(f"b: expected a positive integer, got {self.b!r}")
        if self.trace_stride is not None and (not isinstance(self.trace_stride, int)
                                              or self.trace_stride < 1):
            raise ConfigError(f"trace_stride: expected a positive integer, got {self.trace_stride!r}")
        if self.problem.kind == "fairness_csv":
            if not self.problem.csv:
                raise ConfigError("problem.csv: required for fairness_csv")
            path = Path(self.problem.csv)
            if not path.is_absolute():
                path = base_dir / path
            if not path.exists():
                raise ConfigError(f"problem.csv: file not found: {path}")
            self.problem.csv = str(path)
        return self


def _build(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(f"{where}: unknown field")
        sub = {"problem": ProblemSpec, "schedule": ScheduleSpec}.get(key) if cls is RunConfig else None
        if sub:
            value = _build(sub, value, where)
        elif cls is ScheduleSpec and key not in ("kind", "constants") and value is not None:
            value = _number(value, where)
        kwargs[key] = value
    return cls(**kwargs)


def _number(value, where):
    # YAML 1.1 reads 1e-3 as a string
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def config_from_dict(data) -> RunConfig:
    return _build(RunConfig, data or {}, "")


def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: {k} is not a mapping")
    node[keys[-1]] = value


def parse_value(raw: str):
    """YAML scalar, except that ``1e-3``-style numbers (strings in YAML 1.1) become floats."""
    value = yaml.safe_load(raw)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    return value


def load_config(path=None, overrides=(), **flags) -> RunConfig:
    """YAML file, then ``key.path=value`` overrides, then explicit flags."""
    data: dict = {}
    base = Path(".")
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{p}: {exc}") from exc
        base = p.parent
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        _set_path(data, key.strip(), parse_value(raw))
    for key, value in flags.items():
        if value is not None:
            _set_path(data, key, value)
    return config_from_dict(data).validate(base)


# ------------------------------------------------------------------------ construction


def build_problem(cfg: RunConfig):
    spec = cfg.problem
    params = dict(spec.params)
    try:
        if spec.kind == "desk_qp":
            set_kind = params.pop("set", "l2")
            radius = float(params.pop("radius", 0.5))
            mu = params.get("mu", (0.5, 0.0))
            m = len(mu)
            xset = {"l2": lambda: L2BallSet(np.zeros(m), radius),
                    "l1": lambda: L1BallSet(m, radius),
                    "box": lambda: BoxSet(-radius * np.ones(m), radius * np.ones(m))}
            if set_kind not in xset:
                raise ConfigError(f"problem.params.set: expected l2, l1 or box, got {set_kind!r}")
            return DeskQP(radius=radius, feasible_set=xset[set_kind](), **params)
        if spec.kind == "fairness_synthetic":
            if cfg.b is not None:
                params["batch"] = cfg.b
            return gen_synthetic_fairness(SyntheticFairnessConfig(**params), seed=spec.seed)
        if spec.kind == "fairness_csv":
            if cfg.b is not None:
                params["batch"] = cfg.b
            return ingest_csv(spec.csv, spec.schema, seed=spec.seed, **params)
        if cfg.b is not None:
            params["b"] = cfg.b
        return gen_synthetic_mc(seed=spec.seed, **params)
    except TypeError as exc:
        raise ConfigError(f"problem.params: {exc}") from exc


def problem_constants(cfg: RunConfig, problem) -> ProblemConstants:
    over = dict(cfg.schedule.constants)
    if isinstance(problem, DeskQP) and not over:
        return problem.exact_constants()
    names = {f.name for f in fields(ProblemConstants)}
    if names - {"N"} <= set(over):
        over.setdefault("N", problem.n_constraints)
        return ProblemConstants(**over)
    if isinstance(problem, DeskQP):
        base = asdict(problem.exact_constants())
        base.update(over)
        return ProblemConstants(**base)
    return estimate_constants(problem, seed=cfg.seed, overrides=over or None)


def build_schedule(cfg: RunConfig, problem):
    s = cfg.schedule
    if s.kind == "manual":
        return ManualSchedule(eta0=s.eta0, delta=s.delta, upsilon0=s.upsilon0, rho0=s.rho0,
                              eta_power=s.eta_power, upsilon_power=s.upsilon_power,
                              rho_power=s.rho_power)
    c = problem_constants(cfg, problem)
    T = max(cfg.T, 1)
    if s.kind == "theorem1":
        return schedule_theorem1(c, T)
    return schedule_theorem2(c, T, delta=s.delta)


# ------------------------------------------------------------------------------- run


def _problem_metrics(problem, x) -> dict:
    out = {}
    if hasattr(problem, "s_bar"):
        Xe, se, ye = problem.X_test, problem.s_test, problem.y_test
        split = "test"
        if Xe is None:
            Xe, se, ye, split = problem.X, problem.s, problem.y, "train"
        out["covariance"] = problem.covariance(x)
        out["accuracy"] = accuracy(x, Xe, ye)
        try:
            pp = p_percent_detail(x, Xe, se)
            out["p_percent"] = pp.value
            out["p_percent_degenerate"] = pp.degenerate
        except ValueError as exc:
            out["p_percent_error"] = str(exc)
        out["eval_split"] = split
    if hasattr(problem, "normalized_error"):
        out["normalized_error"] = problem.normalized_error(x)
    if isinstance(problem, DeskQP) and problem.n_constraints <= 1:
        try:
            _, f_star, _, _ = desk_qp_solution(problem)
            out["f_star"] = f_star
        except NotImplementedError:
            pass
    return out


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n",
                          encoding="utf-8")


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


def execute(cfg: RunConfig, out_dir: Path) -> dict:
    """Run one configuration; writes ``trace.csv`` and ``summary.json``.

    Raises :class:`NumericalAbort` after flushing the partial trace and an
    aborted summary.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    schedule = build_schedule(cfg, problem)
    summary: Dict[str, Any] = {"version": __version__, "config": asdict(cfg),
                               "schedule": schedule.describe(max(cfg.T, 1)),
                               "n_constraints": problem.n_constraints}
    if hasattr(schedule, "issues"):
        summary["schedule_issues"] = schedule.issues(max(cfg.T, 1))
    trace_path = out_dir / "trace.csv"
    t0 = time.perf_counter()
    status = "ok"
    result = None
    with TraceWriter(trace_path, problem.n_constraints) as writer:
        try:
            result = run(cfg.algorithm, problem, schedule, cfg.T, cfg.seed,
                         trace_stride=cfg.trace_stride, sink=writer, keep_trace=False)
        except NumericalAbort as exc:
            status = "aborted"
            summary["error"] = str(exc)
            summary["abort_iteration"] = exc.iteration
    summary["wall_time_s"] = time.perf_counter() - t0
    summary["status"] = status
    if status == "aborted":
        _write_json(out_dir / "summary.json", summary)
        raise NumericalAbort(summary["error"])
    if cfg.T == 0:
        summary["status"] = "noop"
        summary["note"] = "T=0: no iterations were run"
    else:
        summary.update({
            "iterations": result.iterations,
            "hyperparams": asdict(result.hp),
            "avg_objective": result.avg_objective,
            "avg_constraints": result.avg_constraints.tolist(),
            "final_x": result.state.x.ravel().tolist() if result.state.x.size <= 100 else None,
            "max_lambda_norm": result.max_lambda_norm,
            "projection_calls": result.projection_calls,
            "lmo_calls": result.lmo_calls,
        })
        summary.update(_problem_metrics(problem, result.state.x))
        if "f_star" in summary:
            summary["gap"] = result.avg_objective - summary["f_star"]
    _write_json(out_dir / "summary.json", summary)
    return summary


def _resolve_out(cfg: RunConfig, explicit=None) -> Path:
    if explicit:
        return Path(explicit)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return default_output_dir() / f"{cfg.problem.kind}-{cfg.algorithm}-seed{cfg.seed}"


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _resolve_out(cfg, args.output_dir)
    summary = execute(cfg, out)
    print(f"{summary['status']}: wrote {out / 'trace.csv'} and {out / 'summary.json'}")
    if summary.get("avg_constraints") is not None:
        print(f"  avg objective {summary['avg_objective']:.6g}, "
              f"avg constraints {summary['avg_constraints']}")
    return EXIT_OK


# ----------------------------------------------------------------------------- sweep

SWEEP_AXES = {"T": "T", "b": "b", "upsilon0": "schedule.upsilon0"}


def _sweep_job(job):
    cfg_dict, out_dir = job
    cfg = config_from_dict(cfg_dict).validate()
    return execute(cfg, Path(out_dir))


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = [parse_value(v) for v in args.values.split(",") if v.strip()]
    if len(values) < 1:
        raise ConfigError("--values: need at least one value")
    if args.axis not in SWEEP_AXES:
        raise ConfigError(f"--axis: expected one of {sorted(SWEEP_AXES)}")
    out = _resolve_out(cfg, args.output_dir)
    seeds = [cfg.seed + k for k in range(args.seeds)]
    jobs = []
    base = asdict(cfg)
    for v in values:
        for s in seeds:
            d = copy.deepcopy(base)
            _set_path(d, SWEEP_AXES[args.axis], v)
            d["seed"] = s
            d["output_dir"] = None
            config_from_dict(d).validate()
            jobs.append((d, str(out / f"{args.axis}={v}" / f"seed={s}")))
    if args.workers == 1 or len(jobs) == 1:
        summaries = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            summaries = list(pool.map(_sweep_job, jobs))
    rows = []
    k = 0
    for v in values:
        group = summaries[k:k + len(seeds)]
        k += len(seeds)
        row = {"value": v, "n": len(group)}
        for key in ("avg_objective", "gap", "p_percent", "normalized_error"):
            vals = [g[key] for g in group if g.get(key) is not None]
            if vals:
                row[f"{key}_mean"] = float(np.mean(vals))
                row[f"{key}_std"] = float(np.std(vals))
        cons = [g["avg_constraints"] for g in group if g.get("avg_constraints") is not None]
        if cons:
            arr = np.array(cons)
            for i in range(arr.shape[1]):
                row[f"h{i + 1}_avg_mean"] = float(arr[:, i].mean())
                row[f"h{i + 1}_avg_std"] = float(arr[:, i].std())
        rows.append(row)
    out.mkdir(parents=True, exist_ok=True)
    cols = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: (format(r[c], ".17g") if isinstance(r.get(c), float) else r.get(c, ""))
                        for c in cols})
    print(f"wrote {out / 'sweep.csv'}")
    if args.axis == "T" and len(values) >= 3 and all("gap_mean" in r for r in rows):
        try:
            fit = fit_rate([float(r["value"]) for r in rows], [r["gap_mean"] for r in rows])
        except ValueError as exc:
            print(f"rate fit skipped: {exc}")
        else:
            _write_json(out / "rate_fit.json", asdict(fit))
            print(f"fitted slope {fit.slope:.4f} (r2 {fit.r2:.3f})")
    return EXIT_OK


# --------------------------------------------------------------------------- datagen


def cmd_datagen(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    params: dict = {}
    for item in args.set or ():
        key, raw = item.split("=", 1)
        params[key] = parse_value(raw)
    try:
        if args.kind == "fairness":
            feats, y, s = gen_synthetic_raw(SyntheticFairnessConfig(**params), args.seed)
            with open(out, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["x1", "x2", "y", "s"])
                for (a, b), yi, si in zip(feats, y, s):
                    w.writerow([format(a, ".17g"), format(b, ".17g"), int(yi), int(si)])
        else:
            p = gen_synthetic_mc(seed=args.seed, **params)
            np.savez(out, obs_rows=p.obs_rows, obs_cols=p.obs_cols, obs_vals=p.obs_vals,
                     X_star=p.X_star, alpha=p.alpha, beta=p.beta)
    except TypeError as exc:
        raise ConfigError(f"--set: {exc}") from exc
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------- report


def _series_names(paths):
    stems = [Path(p).stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    return [str(Path(p).parent.name or p) + "/" + Path(p).stem for p in paths]


def cmd_report(args) -> int:
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "csoa"
    traces = []
    for p in args.traces:
        recs = read_trace(p)
        if not recs:
            raise ConfigError(f"{p}: trace has no rows")
        traces.append(recs)
    widths = {len(r[0].h) for r in traces}
    if len(widths) > 1:
        cols = {p: f"{len(r[0].h)} constraint column(s)" for p, r in zip(args.traces, traces)}
        raise ConfigError(f"traces do not share a schema: {cols}")
    names = _series_names(args.traces)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def fig(fname, ylabel, series):
        f, ax = plt.subplots(figsize=(6, 4))
        for label, t, y in series:
            ax.plot(t, y, label=label, linewidth=1.2)
        ax.set_xlabel("iteration t")
        ax.set_ylabel(ylabel)
        if args.logx:
            ax.set_xscale("log")
        if args.logy:
            ax.set_yscale("symlog", linthresh=1e-6)
        if len(series) > 1:
            ax.legend(fontsize=8)
        f.tight_layout()
        f.savefig(out / fname, format="svg", metadata={"Date": None})
        plt.close(f)

    obj = [(n, [r.t for r in rec], [r.obj_avg for r in rec]) for n, rec in zip(names, traces)]
    fig("objective.svg", "running average objective", obj)
    vio = []
    for n, rec in zip(names, traces):
        for i in range(len(rec[0].h)):
            label = n if len(rec[0].h) == 1 else f"{n} h{i + 1}"
            vio.append((label, [r.t for r in rec], [r.h_avg[i] for r in rec]))
    if vio:
        fig("violation.svg", "running average constraint", vio)
    print(f"wrote SVG plots to {out}")
    return EXIT_OK


# ----------------------------------------------------------------------------- check


def check_suite(seed=0) -> List[tuple]:
    """``(name, value, threshold, passed)`` rows for the gradient and invariant checks."""
    rows = []
    qp = DeskQP()
    rows.append(("finite_diff desk_qp", finite_diff_check(qp, seed=seed), 1e-6))
    fair = gen_synthetic_fairness(SyntheticFairnessConfig(n_samples=400), seed=seed)
    rows.append(("finite_diff fairness", finite_diff_check(fair, seed=seed), 1e-4))
    mc = gen_synthetic_mc(m=20, n=30, r=3, b=20, seed=seed)
    rows.append(("finite_diff matrix_completion", finite_diff_check(mc, seed=seed), 1e-6))
    rng = np.random.default_rng(seed)
    l1 = L1BallSet(6, 1.5)
    worst = 0.0
    for _ in range(100):
        d = rng.standard_normal(6)
        worst = max(worst, abs(l1.lmo(d) @ d - (l1.vertices() @ d).min()))
    rows.append(("l1 lmo vs enumeration", worst, 0.0))
    nuc = mc.feasible_set.__class__(12, 9, 2.0, seed=seed)
    worst = 0.0
    for k in range(20):
        d = rng.standard_normal((12, 9))
        sig = np.linalg.svd(d, compute_uv=False)[0]
        worst = max(worst, abs(float(np.sum(nuc.lmo(d, k) * d)) + 2.0 * sig) / (2.0 * sig))
    rows.append(("nuclear lmo vs svd", worst, 1e-6))
    x = rng.standard_normal(fair.shape)
    h = fair.constraints(x)
    rows.append(("fairness h+ + h- = -2c", abs(h[0] + h[1] + 2 * fair.c), 1e-12))
    return [(n, v, thr, v <= thr) for n, v, thr in rows]


def cmd_check(args) -> int:
    rows = check_suite(args.seed)
    for name, v, thr, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {v:.3e} (threshold {thr:.0e})")
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL


# ------------------------------------------------------------------------------ main


def _load(args) -> RunConfig:
    flags = {"seed": args.seed, "algorithm": args.algorithm, "T": args.T, "b": args.b,
             "trace_stride": args.trace_stride, "schedule.kind": args.schedule,
             "problem.kind": args.problem}
    return load_config(args.config, args.set or (), **flags)


def _add_run_flags(p):
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--seed", type=int, required=True, help="run seed (mandatory)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override any config field, e.g. schedule.eta0=0.1")
    p.add_argument("--algorithm", choices=("csoa", "fw_csoa"))
    p.add_argument("--problem", choices=PROBLEM_KINDS)
    p.add_argument("--schedule", choices=SCHEDULE_KINDS)
    p.add_argument("--T", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--trace-stride", type=int)
    p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or ./runs)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="csoa", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", help="run one configuration")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="run a configuration over several values of one axis")
    _add_run_flags(p)
    p.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", type=int, default=5, help="seeds per value (seed, seed+1, ...)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("datagen", help="write a synthetic dataset")
    p.add_argument("kind", choices=("fairness", "mc"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="generator parameter")
    p.set_defaults(func=cmd_datagen)
    p = sub.add_parser("report", help="SVG plots from trace CSVs")
    p.add_argument("traces", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--logx", action="store_true")
    p.add_argument("--logy", action="store_true")
    p.set_defaults(func=cmd_report)
    p = sub.add_parser("check", help="finite-difference and invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
