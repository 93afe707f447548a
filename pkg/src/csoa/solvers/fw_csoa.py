"""One iteration of the projection-free variant with momentum gradient tracking."""
from __future__ import annotations

from ..core import HyperParams, NumericalAbort, SolverState, primal_grad_aug_lagrangian
from ..sets import LMOError
from .csoa import dual_update, ensure_finite, evaluate


def tracked_gradient(d_prev, g, g_prev, rho):
    """``(1 - rho) d_prev + g - (1 - rho) g_prev``."""
    keep = 1.0 - rho
    return keep * d_prev + g - keep * g_prev


def fw_csoa_step(state: SolverState, hp: HyperParams, problem, ctx, feasible_set=None) -> SolverState:
    """Track the Lagrangian gradient with both iterates under the same sample,
    move toward the LMO vertex by ``eta`` and take the dual step at ``x_t``."""
    xset = problem.feasible_set if feasible_set is None else feasible_set
    ev = evaluate(problem, state.x, ctx)
    ev_prev = evaluate(problem, state.x_prev, ctx)
    g = primal_grad_aug_lagrangian(ev, state.lam, check=False)
    g_prev = primal_grad_aug_lagrangian(ev_prev, state.lam_prev, check=False)
    ensure_finite(g, ev.constr_vals, ctx.t)
    ensure_finite(g_prev, ev_prev.constr_vals, ctx.t)
    d = tracked_gradient(state.d, g, g_prev, hp.rho)
    try:
        s = xset.lmo(d, call_index=ctx.t)
    except (LMOError, FloatingPointError, ValueError) as exc:
        raise NumericalAbort(f"linear minimization failed: {exc}", ctx.t) from exc
    x_new = state.x + hp.eta * (s - state.x)
    return SolverState(x=x_new, lam=dual_update(state.lam, ev.constr_vals, hp), t=state.t + 1,
                       d=d, x_prev=state.x, lam_prev=state.lam)
