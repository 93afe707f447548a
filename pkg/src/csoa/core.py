"""Domain types, the stochastic oracle contract and augmented-Lagrangian gradients.

A problem instance is an object exposing

* ``feasible_set`` -- a :class:`csoa.sets.FeasibleSet`,
* ``n_constraints`` -- number of expectation constraints ``N``,
* ``draw(rng, count)`` -- ``count`` sample handles (one drawn theta each),
* ``oracle(x, ctx)`` -- :class:`OracleEval` at ``x`` under the sample in ``ctx``,
* ``sample_values(x, ctx)`` -- ``(f(x, theta), h(x, theta))``,
* ``objective(x)`` / ``constraints(x)`` -- exact or full-data ``F`` and ``H``,
* ``full_gradients(x)`` -- ``(grad F, Jacobian of H)``,
* ``initial_point()`` and optionally ``slater_point``.

The oracle receives the sample through a :class:`SampleContext`, so the same
theta can be evaluated at two query points (needed by the Frank-Wolfe variant).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration or inconsistent inputs."""


class NumericalAbort(RuntimeError):
    """A run hit a non-finite value or a failed set operation."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


def derive_seed(*keys: int) -> int:
    """64-bit seed material derived from a tuple of non-negative integers."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, np.uint64)[0])


class SampleContext(NamedTuple):
    """One drawn theta.

    ``sample_id`` is whatever handle the problem's ``draw`` produced (a data
    row, an index set, ...); ``rng_tag`` is the seed material of the block the
    draw came from.
    """

    t: int
    sample_id: Any
    rng_tag: int = 0


class SampleStream:
    """Per-iteration sample contexts derived from ``(run_seed, t)``.

    Draws are generated in blocks of ``block_size`` iterations; block ``k`` is
    seeded from ``derive_seed(seed, k)``, so any iteration can be regenerated
    independently of the order in which iterations are requested.
    """

    def __init__(self, problem, seed: int, block_size: Optional[int] = None):
        self.problem = problem
        self.seed = int(seed)
        self.block_size = int(block_size or getattr(problem, "block_size", 1024))
        self._block_index = -1
        self._block = None
        self._tag = 0

    def _load(self, k):
        self._tag = derive_seed(self.seed, k)
        rng = np.random.default_rng(self._tag)
        self._block = self.problem.draw(rng, self.block_size)
        self._block_index = k

    def context(self, t: int) -> SampleContext:
        if t < 1:
            raise ValueError("iterations are 1-based")
        k, offset = divmod(t - 1, self.block_size)
        if k != self._block_index:
            self._load(k)
        return SampleContext(t, self._block[offset], self._tag)

    __call__ = context


@dataclass
class OracleEval:
    """Stochastic first-order information at one point for one theta.

    ``obj_grad`` has the shape of x; ``constr_vals`` has shape ``(N,)``;
    ``constr_jac`` has shape ``(N,) + x.shape`` (row i is grad h_i).
    """

    obj_grad: np.ndarray
    constr_vals: np.ndarray
    constr_jac: np.ndarray

    @property
    def n_constraints(self) -> int:
        return self.constr_vals.shape[0]

    def check(self, shape=None) -> None:
        if shape is not None and self.obj_grad.shape != tuple(shape):
            raise ValueError(
                f"objective gradient has shape {self.obj_grad.shape}, expected {tuple(shape)}")
        n = self.constr_vals.shape[0]
        if self.constr_jac.shape != (n,) + self.obj_grad.shape:
            raise ValueError(
                f"constraint Jacobian has shape {self.constr_jac.shape}, "
                f"expected {(n,) + self.obj_grad.shape}")
        # a NaN or inf anywhere makes the sum non-finite
        total = self.obj_grad.sum() + self.constr_vals.sum() + self.constr_jac.sum()
        if not math.isfinite(total):
            raise FloatingPointError("oracle returned non-finite values")


@dataclass
class ProblemConstants:
    """Moment, Lipschitz and geometry constants used by the step-size schedules.

    ``B`` and ``C`` are derived: ``B = max(sigma_f, sigma_h * sqrt(N))`` and
    ``C = 2 * G_f * D / slater_sigma`` (the dual-norm bound).
    """

    sigma_f: float
    sigma_h: float
    sigma_lambda: float
    G_f: float
    G_h: float
    L_f: float
    L_h: float
    D: float
    slater_sigma: float
    N: int

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "slater_sigma":
                if not v > 0:
                    raise ValueError("slater_sigma must be > 0")
                continue
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{f.name} must be finite and >= 0, got {v!r}")
        if self.D <= 0:
            raise ValueError("D must be > 0")
        if self.B <= 0:
            raise ValueError("B = max(sigma_f, sigma_h*sqrt(N)) must be > 0")

    @property
    def B(self) -> float:
        return max(self.sigma_f, self.sigma_h * math.sqrt(self.N))

    @property
    def C(self) -> float:
        return 2.0 * self.G_f * self.D / self.slater_sigma

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.update(B=self.B, C=self.C)
        return out


@dataclass
class HyperParams:
    """Step size, dual regularisation, tightening, momentum, horizon and seed."""

    eta: float
    delta: float
    upsilon: float
    rho: float = 1.0
    T: int = 0
    seed: int = 0

    def validate(self, algorithm: str = "csoa") -> None:
        if not self.eta > 0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        if self.delta < 0 or self.upsilon < 0:
            raise ConfigError("delta and upsilon must be >= 0")
        if algorithm == "fw_csoa":
            if self.eta > 1:
                raise ConfigError(f"fw_csoa needs eta <= 1, got {self.eta}")
            if not 0 < self.rho <= 1:
                raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")


@dataclass
class SolverState:
    """Primal/dual iterate at iteration ``t``.

    ``d``, ``x_prev`` and ``lam_prev`` are only carried by the Frank-Wolfe variant.
    """

    x: np.ndarray
    lam: np.ndarray
    t: int = 1
    d: Optional[np.ndarray] = None
    x_prev: Optional[np.ndarray] = None
    lam_prev: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, x1, n_constraints: int, tracking: bool = False) -> "SolverState":
        x1 = np.array(x1, dtype=float)
        lam = np.zeros(n_constraints)
        if not tracking:
            return cls(x=x1, lam=lam)
        # x_0 = x_1, lambda_0 = lambda_1 = 0, d_0 = 0
        return cls(x=x1, lam=lam, d=np.zeros_like(x1), x_prev=x1.copy(), lam_prev=lam.copy())


def _check_lambda(ev: OracleEval, lam: np.ndarray) -> None:
    if lam.shape != (ev.n_constraints,):
        raise ValueError(
            f"dual vector has shape {lam.shape}, oracle reports {ev.n_constraints} constraints")
    if not math.isfinite(lam.sum()):
        raise FloatingPointError("non-finite dual vector")


def primal_grad_aug_lagrangian(ev: OracleEval, lam: np.ndarray, check: bool = True) -> np.ndarray:
    """``grad f(x, theta) + J^T lambda``; the dual penalty has no x-gradient.

    With ``check=False`` the validation is skipped and, when ``N = 0``, the
    oracle's array is returned without copying (solver hot path).
    """
    if check:
        _check_lambda(ev, lam)
    n = lam.shape[0]
    if n == 0:
        return ev.obj_grad.copy() if check else ev.obj_grad
    g = ev.obj_grad
    return g + np.dot(lam, ev.constr_jac.reshape(n, -1)).reshape(g.shape)


def dual_grad_aug_lagrangian(ev: OracleEval, lam: np.ndarray, hp: HyperParams) -> np.ndarray:
    """``h(x, theta) + upsilon - delta * eta * lambda``."""
    _check_lambda(ev, lam)
    return ev.constr_vals + hp.upsilon - (hp.delta * hp.eta) * lam


def aug_lagrangian_value(f_val: float, h_vals: np.ndarray, lam: np.ndarray,
                         hp: HyperParams) -> float:
    """Scalar stochastic augmented Lagrangian from sampled ``f`` and ``h`` values."""
    return float(f_val + lam @ (h_vals + hp.upsilon) - 0.5 * hp.delta * hp.eta * (lam @ lam))


def estimate_constants(problem, n_samples: int = 1000, safety: float = 1.2, seed: int = 0,
                       slater_point=None, n_points: int = 32,
                       overrides: Optional[dict] = None) -> ProblemConstants:
    """Empirical :class:`ProblemConstants` for ``problem``.

    Second-moment bounds take the root-mean-square over drawn samples at each of
    ``n_points`` feasible points (half on the set's boundary) and keep the
    largest, times ``safety``. Lipschitz constants come from the largest full
    gradient norms over those points; smoothness constants from same-sample
    gradient differences between consecutive points. The Slater margin is
    ``-max_i H_i`` at the declared strictly feasible point. Any field given in
    ``overrides`` replaces the estimate.
    """
    overrides = dict(overrides or {})
    names = [f.name for f in dataclasses.fields(ProblemConstants)]
    unknown = set(overrides) - set(names)
    if unknown:
        raise ConfigError(f"unknown constant override(s): {sorted(unknown)}")
    n_con = problem.n_constraints
    if all(k in overrides for k in names if k != "N"):
        overrides.setdefault("N", n_con)
        return ProblemConstants(**overrides)
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")

    rng = np.random.default_rng(derive_seed(seed, 0xC0))
    xset = problem.feasible_set
    points = xset.sample_points(rng, n_points)
    samples = problem.draw(rng, n_samples)
    ctxs = [SampleContext(0, s) for s in samples]

    sig_f2 = sig_h2 = sig_l2 = 0.0
    G_f = G_h = L_f = L_h = 0.0
    prev = None
    for x in points:
        gf2 = gh2 = hl2 = 0.0
        for ctx in ctxs:
            ev = problem.oracle(x, ctx)
            gf2 += float(np.sum(ev.obj_grad ** 2))
            if n_con:
                jac = ev.constr_jac.reshape(n_con, -1)
                gh2 += float(np.max(np.sum(jac ** 2, axis=1)))
                hl2 += float(np.max(ev.constr_vals ** 2))
        sig_f2 = max(sig_f2, gf2 / len(ctxs))
        sig_h2 = max(sig_h2, gh2 / len(ctxs))
        sig_l2 = max(sig_l2, hl2 / len(ctxs))
        gF, jH = problem.full_gradients(x)
        G_f = max(G_f, float(np.linalg.norm(gF)))
        if n_con:
            G_h = max(G_h, float(np.max(np.linalg.norm(jH.reshape(n_con, -1), axis=1))))
        if prev is not None:
            dist = float(np.linalg.norm(x - prev))
            if dist > 0:
                for ctx in ctxs[:50]:
                    a, b = problem.oracle(x, ctx), problem.oracle(prev, ctx)
                    L_f = max(L_f, float(np.linalg.norm(a.obj_grad - b.obj_grad)) / dist)
                    if n_con:
                        diff = (a.constr_jac - b.constr_jac).reshape(n_con, -1)
                        L_h = max(L_h, float(np.max(np.linalg.norm(diff, axis=1))) / dist)
        prev = x

    if "slater_sigma" in overrides or n_con == 0:
        slater = overrides.get("slater_sigma", math.inf)
    else:
        xs = slater_point if slater_point is not None else getattr(problem, "slater_point", None)
        if xs is None:
            raise ConfigError("a strictly feasible point is required to estimate the Slater margin")
        H = np.asarray(problem.constraints(np.asarray(xs, dtype=float)))
        worst = int(np.argmax(H))
        slater = -float(H[worst])
        if slater <= 0:
            raise ValueError(
                f"declared Slater point is not strictly feasible: constraint {worst} "
                f"has H = {H[worst]:.6g} >= 0")

    est = dict(
        sigma_f=safety * math.sqrt(sig_f2), sigma_h=safety * math.sqrt(sig_h2),
        sigma_lambda=safety * math.sqrt(sig_l2), G_f=safety * G_f, G_h=safety * G_h,
        L_f=safety * L_f, L_h=safety * L_h, D=xset.diameter, slater_sigma=slater, N=n_con,
    )
    est.update(overrides)
    return ProblemConstants(**est)
