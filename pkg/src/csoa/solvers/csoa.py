"""One iteration of the projected conservative primal-dual method."""
from __future__ import annotations

import math
import warnings

import numpy as np

from ..core import HyperParams, NumericalAbort, SolverState, primal_grad_aug_lagrangian


def dual_update(lam, h_vals, hp: HyperParams):
    """``[(1 - eta^2 delta) lam + eta (h + upsilon)]_+``.

    A negative decay factor (only reachable with hand-picked parameters) is
    clamped to zero.
    """
    decay = 1.0 - hp.eta * hp.eta * hp.delta
    if decay < 0:
        warnings.warn(f"dual decay factor {decay:.3g} < 0 clamped to 0", RuntimeWarning,
                      stacklevel=3)
        decay = 0.0
    return np.maximum(decay * lam + hp.eta * (h_vals + hp.upsilon), 0.0)


def evaluate(problem, x, ctx):
    try:
        return problem.oracle(x, ctx)
    except (FloatingPointError, ValueError) as exc:
        raise NumericalAbort(str(exc), ctx.t) from exc


def ensure_finite(g, h, t):
    # one reduction per array; NaN/inf in obj_grad or constr_jac propagates into g
    if not math.isfinite(float(np.vdot(g, g)) + float(h @ h)):
        raise NumericalAbort("oracle returned non-finite values", t)


def csoa_step(state: SolverState, hp: HyperParams, problem, ctx, feasible_set=None) -> SolverState:
    """``x <- P(x - eta grad_x L)`` and the dual ascent step, both at the pre-update
    ``x_t`` and under the single sample in ``ctx``."""
    xset = problem.feasible_set if feasible_set is None else feasible_set
    ev = evaluate(problem, state.x, ctx)
    g = primal_grad_aug_lagrangian(ev, state.lam, check=False)
    ensure_finite(g, ev.constr_vals, ctx.t)
    try:
        x_new = xset.project(state.x - hp.eta * g)
    except (FloatingPointError, ValueError) as exc:
        raise NumericalAbort(f"projection failed: {exc}", ctx.t) from exc
    return SolverState(x=x_new, lam=dual_update(state.lam, ev.constr_vals, hp), t=state.t + 1)
