"""Evaluation quantities: p%-rule, normalized completion error, constraint
violation summaries and log-log rate fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np


@dataclass
class PPercent:
    value: float
    rate_s1: float
    rate_s0: float
    degenerate: bool = False

    def __float__(self):
        return self.value


def p_percent_detail(weights, X_test, s_test) -> PPercent:
    """``100 * min(r, 1/r)`` with ``r = P(w^T x >= 0 | s=1) / P(w^T x >= 0 | s=0)``.

    A group with no positive predictions gives 0 and sets ``degenerate``.
    """
    X_test = np.asarray(X_test, dtype=float)
    s_test = np.asarray(s_test)
    pos = X_test @ np.asarray(weights, dtype=float) >= 0
    g1, g0 = s_test == 1, s_test == 0
    if not g1.any() or not g0.any():
        raise ValueError("both sensitive groups must be nonempty")
    r1 = float(pos[g1].mean())
    r0 = float(pos[g0].mean())
    if r1 == 0.0 or r0 == 0.0:
        both = r1 == r0
        return PPercent(100.0 if both else 0.0, r1, r0, degenerate=True)
    r = r1 / r0
    return PPercent(100.0 * min(r, 1.0 / r), r1, r0)


def p_percent(weights, X_test, s_test) -> float:
    return p_percent_detail(weights, X_test, s_test).value


def accuracy(weights, X, y) -> float:
    pred = (np.asarray(X) @ np.asarray(weights)) >= 0
    return float(np.mean(pred == (np.asarray(y) == 1)))


def normalized_error(X, M_obs) -> float:
    """``sum_I (X_ij - M_ij)^2 / sum_I M_ij^2``.

    ``M_obs`` is ``(rows, cols, values)`` for the observed cells.
    """
    rows, cols, vals = M_obs
    vals = np.asarray(vals, dtype=float)
    den = math.fsum(vals * vals)
    if den == 0:
        raise ValueError("observed entries of M are all zero")
    r = np.asarray(X)[np.asarray(rows), np.asarray(cols)] - vals
    return math.fsum(r * r) / den


@dataclass
class ConstraintViolation:
    running_avg_final: float
    max_instantaneous: float
    fraction_violated: float
    recomputed_avg: float


def _trace_columns(trace):
    """``(h_rows, h_avg_final)`` from TraceRecords or a DataFrame of a trace CSV."""
    if hasattr(trace, "columns"):
        hcols = [c for c in trace.columns if c.startswith("h") and not c.endswith("_avg")
                 and c[1:].isdigit()]
        h = trace[hcols].to_numpy(dtype=float)
        avg_cols = [f"{c}_avg" for c in hcols]
        avg = trace[avg_cols].to_numpy(dtype=float)[-1] if all(
            c in trace.columns for c in avg_cols) and len(trace) else None
        return h, avg
    recs = list(trace)
    if not recs:
        return np.zeros((0, 0)), None
    h = np.array([r.h for r in recs], dtype=float).reshape(len(recs), -1)
    avg = np.array(recs[-1].h_avg, dtype=float)
    return h, avg


def violation_summary(trace, tol: float = 0.0) -> Dict[str, object]:
    """Per-constraint violation statistics of a trace.

    ``running_avg_final`` is the final running average column when the trace
    carries one, otherwise the compensated mean of the instantaneous rows;
    ``recomputed_avg`` is always the latter. ``certified`` holds when every
    running average is ``<= tol``.
    """
    h, avg = _trace_columns(trace)
    if h.shape[0] == 0:
        raise ValueError("empty trace")
    out: List[ConstraintViolation] = []
    for i in range(h.shape[1]):
        col = h[:, i]
        rec = math.fsum(col) / len(col)
        out.append(ConstraintViolation(
            running_avg_final=float(avg[i]) if avg is not None else rec,
            max_instantaneous=float(col.max()),
            fraction_violated=float(np.mean(col > 0)),
            recomputed_avg=rec))
    return {"constraints": out,
            "certified": all(c.running_avg_final <= tol for c in out)}


@dataclass
class RateFit:
    horizons: List[float]
    gaps: List[float]
    slope: float
    intercept: float
    r2: float
    excluded: List[float] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.excluded)


def fit_rate(horizons: Sequence[float], gaps: Sequence[float]) -> RateFit:
    """Least-squares fit of ``log gap = intercept + slope * log T``.

    Nonpositive gaps are dropped and listed in ``excluded``.
    """
    T = np.asarray(horizons, dtype=float)
    G = np.asarray(gaps, dtype=float)
    if T.shape != G.shape or T.ndim != 1:
        raise ValueError("horizons and gaps must be equal-length vectors")
    if np.any(np.diff(T) <= 0):
        raise ValueError("horizons must be strictly increasing")
    keep = G > 0
    excluded = T[~keep].tolist()
    T, G = T[keep], G[keep]
    if len(T) < 3:
        raise ValueError(f"need >= 3 positive gaps, have {len(T)}")
    if math.log10(T[-1] / T[0]) < 2 - 1e-12:
        raise ValueError("horizons must span at least two decades")
    lx, ly = np.log(T), np.log(G)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(T.tolist(), G.tolist(), float(slope), float(intercept), r2, excluded)
