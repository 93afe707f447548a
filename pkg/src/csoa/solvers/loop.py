"""Outer iteration loop shared by both algorithms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ..core import ConfigError, HyperParams, SampleStream, SolverState
from ..trace import TraceRecord
from .csoa import csoa_step
from .fw_csoa import fw_csoa_step

ALGORITHMS = ("csoa", "fw_csoa")


class CountingSet:
    """Wraps a feasible set and counts projection and LMO calls."""

    def __init__(self, inner):
        self.inner = inner
        self.n_project = 0
        self.n_lmo = 0

    def project(self, x):
        self.n_project += 1
        return self.inner.project(x)

    def lmo(self, d, call_index=None):
        self.n_lmo += 1
        return self.inner.lmo(d, call_index=call_index)

    def __getattr__(self, name):
        return getattr(self.inner, name)


class _Kahan:
    """Compensated running sums of a short vector, in Python floats."""

    def __init__(self, n):
        self.s = [0.0] * n
        self.c = [0.0] * n

    def add(self, values):
        s, c = self.s, self.c
        for i, v in enumerate(values):
            y = v - c[i]
            t = s[i] + y
            c[i] = (t - s[i]) - y
            s[i] = t

    def mean(self, count):
        return [v / count for v in self.s]


@dataclass
class RunResult:
    state: SolverState
    hp: Optional[HyperParams]
    trace: List[TraceRecord] = field(default_factory=list)
    iterations: int = 0
    avg_objective: float = math.nan
    avg_constraints: np.ndarray = field(default_factory=lambda: np.zeros(0))
    max_lambda_norm: float = 0.0
    min_lambda: float = 0.0
    max_residual: float = 0.0
    projection_calls: int = 0
    lmo_calls: int = 0


def default_stride(T):
    return max(1, T // 200)


def run(algorithm: str, problem, schedule, T: int, seed: int, trace_stride: Optional[int] = None,
        x1=None, sink: Optional[Callable[[TraceRecord], None]] = None,
        check_invariants: bool = False, keep_trace: bool = True,
        on_step: Optional[Callable[[SolverState], None]] = None) -> RunResult:
    """Run ``T`` iterations of ``algorithm`` on ``problem``.

    ``schedule`` is a :class:`HyperParams` or any object with
    ``hyperparams(T, seed)``. ``F(x_t)`` and ``H(x_t)`` (exact or full-data)
    are accumulated at every iteration; every ``trace_stride`` iterations (and
    at ``T``) a :class:`TraceRecord` is appended and passed to ``sink``.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    xset = problem.feasible_set
    if algorithm == "csoa" and not xset.has_projection:
        raise ConfigError(f"csoa needs a projection; {type(xset).__name__} has none")
    if algorithm == "fw_csoa" and not xset.has_lmo:
        raise ConfigError(f"fw_csoa needs an LMO; {type(xset).__name__} has none")
    T = int(T)
    if T < 0:
        raise ConfigError("T must be >= 0")
    n_con = problem.n_constraints
    x1 = problem.initial_point() if x1 is None else np.array(x1, dtype=float)
    if not xset.contains(x1):
        raise ConfigError("initial point is not in the feasible set")
    state = SolverState.initial(x1, n_con, tracking=algorithm == "fw_csoa")
    if T == 0:
        return RunResult(state=state, hp=None)

    hp = schedule if isinstance(schedule, HyperParams) else schedule.hyperparams(T, seed)
    hp.validate(algorithm)
    stride = trace_stride or default_stride(T)
    step = csoa_step if algorithm == "csoa" else fw_csoa_step
    counted = CountingSet(xset)
    stream = SampleStream(problem, seed)
    acc = _Kahan(1 + n_con)
    result = RunResult(state=state, hp=hp)
    full_values = getattr(problem, "full_values", None)
    if full_values is None:
        def full_values(x):
            return problem.objective(x), np.asarray(problem.constraints(x), dtype=float).tolist()
    max_lam = 0.0
    min_lam = 0.0
    max_res = 0.0

    for t in range(1, T + 1):
        x, lam = state.x, state.lam
        f_val, h_vals = full_values(x)
        acc.add([f_val, *h_vals])
        lam_norm = math.sqrt(float(lam @ lam))
        if lam_norm > max_lam:
            max_lam = lam_norm
        if check_invariants:
            if n_con:
                min_lam = min(min_lam, float(lam.min()))
            max_res = max(max_res, xset.residual(x))
        if t % stride == 0 or t == T:
            avg = acc.mean(t)
            rec = TraceRecord(t, f_val, avg[0], tuple(h_vals), tuple(avg[1:]), lam_norm,
                              hp.eta, hp.upsilon)
            if keep_trace:
                result.trace.append(rec)
            if sink is not None:
                sink(rec)
        state = step(state, hp, problem, stream(t), counted)
        if on_step is not None:
            on_step(state)

    if check_invariants:
        if n_con:
            min_lam = min(min_lam, float(state.lam.min()))
        max_res = max(max_res, xset.residual(state.x))
    avg = acc.mean(T)
    result.state = state
    result.iterations = T
    result.avg_objective = avg[0]
    result.avg_constraints = np.array(avg[1:])
    result.max_lambda_norm = max_lam
    result.min_lambda = min_lam
    result.max_residual = max_res
    result.projection_calls = counted.n_project
    result.lmo_calls = counted.n_lmo
    return result
