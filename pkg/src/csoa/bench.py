"""Desk-scale ground truth: a quadratic test problem with closed-form optimum,
a brute-force reference solver and finite-difference gradient checks."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .core import ConfigError, OracleEval, ProblemConstants, SampleContext, derive_seed
from .sets import BoxSet, L1BallSet, L2BallSet


def support(xset, v) -> float:
    """``max_{x in set} <v, x>`` for the vector sets."""
    v = np.asarray(v, dtype=float)
    if isinstance(xset, L2BallSet):
        return float(v @ xset.center + xset.radius * np.linalg.norm(v))
    if isinstance(xset, L1BallSet):
        return float(xset.radius * np.max(np.abs(v)))
    if isinstance(xset, BoxSet):
        return float(np.sum(np.maximum(v * xset.lower, v * xset.upper)))
    raise NotImplementedError(f"no support function for {type(xset).__name__}")


def _max_distance(xset, p) -> float:
    """``max_{x in set} ||x - p||``."""
    if isinstance(xset, L2BallSet):
        return float(np.linalg.norm(xset.center - p) + xset.radius)
    if isinstance(xset, L1BallSet):
        verts = xset.vertices()
    elif isinstance(xset, BoxSet):
        verts = np.array(list(itertools.product(*zip(xset.lower, xset.upper))))
    else:
        raise NotImplementedError(type(xset).__name__)
    return float(np.max(np.linalg.norm(verts - p, axis=1)))


class DeskQP:
    """``min E||x - theta||^2  s.t.  E[A x - b + nu] <= 0``, ``x`` in a ball.

    ``theta ~ N(mu, I)`` and ``nu ~ N(0, noise^2 I)``, so ``F(x) = ||x - mu||^2 + m``
    and ``H(x) = A x - b`` in closed form.
    """

    block_size = 4096

    def __init__(self, mu=(0.5, 0.0), A=((4.0, 0.0),), b=(1.0,), radius=0.5, noise=0.5,
                 feasible_set=None, x1=None, slater_point=None):
        self.mu = np.array(mu, dtype=float)
        m = self.mu.shape[0]
        self.A = np.array(A, dtype=float).reshape(-1, m)
        self.b = np.array(b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A and b disagree on the number of constraints")
        self.A.flags.writeable = False
        self.noise = float(noise)
        self.radius = float(radius)
        self.feasible_set = feasible_set if feasible_set is not None else L2BallSet(np.zeros(m), radius)
        self.n_constraints = self.A.shape[0]
        self._x1 = np.zeros(m) if x1 is None else np.array(x1, dtype=float)
        if slater_point is None and self.n_constraints == 1:
            a = self.A[0]
            if isinstance(self.feasible_set, L2BallSet):
                c = self.feasible_set.center
                slater_point = c - self.feasible_set.radius * a / np.linalg.norm(a)
            else:
                slater_point = self.feasible_set.lmo(a)
        self.slater_point = slater_point

    @property
    def dim(self):
        return self.mu.shape[0]

    @property
    def shape(self):
        return self.mu.shape

    def draw(self, rng, count):
        m, n = self.dim, self.n_constraints
        z = rng.standard_normal((count, m + n))
        z[:, :m] += self.mu
        z[:, m:] *= self.noise
        return z

    def oracle(self, x, ctx):
        s = ctx.sample_id
        m = self.dim
        return OracleEval(2.0 * (x - s[:m]), self.A @ x - self.b + s[m:], self.A)

    def sample_values(self, x, ctx):
        s = ctx.sample_id
        m = self.dim
        r = x - s[:m]
        return float(r @ r), self.A @ x - self.b + s[m:]

    def full_values(self, x):
        r = x - self.mu
        return float(r @ r) + self.dim, (self.A @ x - self.b).tolist()

    def objective(self, x):
        r = x - self.mu
        return float(r @ r) + self.dim

    def constraints(self, x):
        return self.A @ x - self.b

    def full_gradients(self, x):
        return 2.0 * (x - self.mu), self.A

    def initial_point(self):
        return self._x1.copy()

    def exact_constants(self) -> ProblemConstants:
        """Analytic bounds: suprema over the feasible set of the oracle moments."""
        xs, m, N = self.feasible_set, self.dim, self.n_constraints
        far = _max_distance(xs, self.mu)
        if N:
            row_norms = np.linalg.norm(self.A, axis=1)
            h_abs = max(max(support(xs, a) - bi, support(xs, -a) + bi)
                        for a, bi in zip(self.A, self.b))
            margin = self.slater_margin()
        else:
            row_norms = np.zeros(1)
            h_abs = 0.0
            margin = math.inf
        return ProblemConstants(
            sigma_f=2.0 * math.sqrt(far ** 2 + m),
            sigma_h=float(row_norms.max()),
            sigma_lambda=math.sqrt(h_abs ** 2 + self.noise ** 2) if N else 0.0,
            G_f=2.0 * far, G_h=float(row_norms.max()), L_f=2.0, L_h=0.0,
            D=xs.diameter, slater_sigma=margin, N=N,
        )

    def slater_margin(self) -> float:
        """Largest ``sigma`` with ``H(x) + sigma <= 0`` for some member ``x``."""
        if self.n_constraints == 0:
            return math.inf
        if self.n_constraints == 1:
            return float(self.b[0] + support(self.feasible_set, -self.A[0]))
        if self.slater_point is None:
            raise NotImplementedError("Slater margin for N > 1 needs an explicit slater_point")
        return float(-np.max(self.constraints(np.asarray(self.slater_point))))


def _project_halfspace_ball(mu, a, beta, center, radius):
    """Euclidean projection of ``mu`` onto ``{<a,x> <= beta} ∩ Ball(center, radius)``."""
    na2 = float(a @ a)
    x = mu - max(0.0, (a @ mu - beta) / na2) * a
    if np.linalg.norm(x - center) <= radius:
        return x
    y = center + radius * (mu - center) / np.linalg.norm(mu - center)
    if a @ y <= beta:
        return y
    # both active: closest point of the sphere-hyperplane intersection
    c0 = center - ((a @ center - beta) / na2) * a
    r0 = math.sqrt(max(radius ** 2 - float((c0 - center) @ (c0 - center)), 0.0))
    mh = mu - ((a @ mu - beta) / na2) * a
    dirv = mh - c0
    nd = float(np.linalg.norm(dirv))
    if nd == 0:
        # mu projects onto the circle's centre; every circle point is optimal
        dirv = np.zeros_like(a)
        k = int(np.argmin(np.abs(a)))
        dirv[k] = 1.0
        dirv -= (dirv @ a) / na2 * a
        nd = float(np.linalg.norm(dirv))
    return c0 + r0 * dirv / nd


def desk_qp_solution(qp: DeskQP, upsilon: float = 0.0):
    """``(x*, F(x*), x*_upsilon, F(x*_upsilon))`` in closed form.

    Single constraint only. For sets other than a Euclidean ball the halfspace
    projection of ``mu`` must already lie in the set.
    """
    if qp.n_constraints > 1:
        raise NotImplementedError("closed form covers N <= 1; use brute_force_solve")

    def solve(ups):
        if qp.n_constraints == 0:
            x = qp.mu.copy()
            if isinstance(qp.feasible_set, L2BallSet):
                x = qp.feasible_set.project(x)
        else:
            a, beta = qp.A[0], qp.b[0] - ups
            if ups > 0 and ups >= qp.slater_margin():
                raise ValueError(
                    f"upsilon={ups} is not below the Slater margin {qp.slater_margin():.6g}")
            if isinstance(qp.feasible_set, L2BallSet):
                x = _project_halfspace_ball(qp.mu, a, beta, qp.feasible_set.center,
                                            qp.feasible_set.radius)
            else:
                x = qp.mu - max(0.0, (a @ qp.mu - beta) / (a @ a)) * a
        if not qp.feasible_set.contains(x, 1e-12):
            raise NotImplementedError(
                "the set constraint is active; no closed form for this set")
        return x, qp.objective(x)

    x0, f0 = solve(0.0)
    xu, fu = solve(float(upsilon))
    return x0, f0, xu, fu


def _bounding_box(xset):
    if isinstance(xset, BoxSet):
        return xset.lower.copy(), xset.upper.copy()
    if isinstance(xset, L2BallSet):
        return xset.center - xset.radius, xset.center + xset.radius
    if isinstance(xset, L1BallSet):
        return -np.full(xset.shape, xset.radius), np.full(xset.shape, xset.radius)
    raise NotImplementedError(type(xset).__name__)


def kkt_residual(problem, x, lam) -> float:
    """Stationarity + complementarity + primal feasibility certificate."""
    gF, J = problem.full_gradients(x)
    H = np.asarray(problem.constraints(x))
    g = gF + (lam @ J if len(lam) else 0.0)
    stat = np.linalg.norm(x - problem.feasible_set.project(x - g))
    return float(stat + np.sum(np.abs(lam * H)) + np.linalg.norm(np.maximum(H, 0.0)))


def brute_force_solve(problem, mode="grid", resolution=1e-3, points_per_axis=None,
                      max_iters=1_000_000, eta0=None, kkt_tol=1e-6, check_every=100):
    """Reference optimum ``(x, F(x))`` for small problems.

    ``grid``: lattice search over the set's bounding box keeping members with
    ``H <= 0``. The lattice is refined around the incumbent until its spacing
    reaches ``resolution``.

    ``projected_gradient``: deterministic full-gradient primal-dual iteration
    with decaying steps, stopped once the KKT residual is below ``kkt_tol``.
    Returns ``(x, F(x), residual)`` in this mode.
    """
    xset = problem.feasible_set
    m = xset.dim
    if mode == "grid":
        if m > 3:
            raise ConfigError("grid mode supports dimension <= 3")
        k = points_per_axis or {1: 2001, 2: 81, 3: 25}[m]
        k_max = {1: 2001, 2: 81, 3: 25}[m]
        box_lo, box_hi = _bounding_box(xset)
        lo, hi = box_lo, box_hi
        best = None
        while True:
            axes = [np.linspace(l, h, k) for l, h in zip(lo, hi)]
            spacing = max((h - l) / (k - 1) for l, h in zip(lo, hi))
            pts, vals = [], []
            for p in itertools.product(*axes):
                x = np.array(p)
                if not xset.contains(x, 0.0) or np.any(np.asarray(problem.constraints(x)) > 0):
                    continue
                pts.append(x)
                vals.append(problem.objective(x))
            if pts:
                i = int(np.argmin(vals))
                if best is None or vals[i] < best[1]:
                    best = (pts[i], vals[i])
            if best is None:
                raise ValueError("no feasible lattice point")
            if spacing <= resolution or not pts:
                return best
            # zoom onto every lattice point that could neighbour the optimum:
            # f within G * spacing * sqrt(m) of the incumbent
            pts, vals = np.array(pts), np.array(vals)
            G = max(float(np.linalg.norm(problem.full_gradients(x)[0])) for x in pts[::max(1, len(pts) // 64)])
            near = pts[vals <= best[1] + 2.0 * G * spacing * math.sqrt(m)]
            lo = np.maximum(near.min(axis=0) - 2 * spacing, box_lo)
            hi = np.minimum(near.max(axis=0) + 2 * spacing, box_hi)
            width = float(np.max(hi - lo))
            k = min(k_max, max(9, int(math.ceil(width / max(resolution, spacing / 8))) + 1))
            if width / (k - 1) >= 0.9 * spacing:
                # elongated candidate set; fall back to a window around the incumbent
                half = 4 * spacing
                lo = np.maximum(best[0] - half, box_lo)
                hi = np.minimum(best[0] + half, box_hi)
                k = min(k_max, max(9, int(math.ceil(2 * half / max(resolution, spacing / 8))) + 1))
    if mode != "projected_gradient":
        raise ConfigError(f"unknown mode {mode!r}")
    if not xset.has_projection:
        raise ConfigError("projected_gradient mode needs a set with a projection")
    x = xset.project(problem.initial_point())
    lam = np.zeros(problem.n_constraints)
    if eta0 is None:
        eta0 = 0.5 / max(1.0, _curvature_guess(problem, x))
    res = math.inf
    for t in range(1, max_iters + 1):
        eta = eta0 / math.sqrt(1.0 + t / 1e5)
        gF, J = problem.full_gradients(x)
        H = np.asarray(problem.constraints(x))
        g = gF + (lam @ J if len(lam) else 0.0)
        x = xset.project(x - eta * g)
        lam = np.maximum(lam + eta * H, 0.0)
        if t % check_every == 0:
            res = kkt_residual(problem, x, lam)
            if res <= kkt_tol:
                break
    return x, problem.objective(x), res


def _curvature_guess(problem, x, h=1e-4):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(x.shape)
    v /= np.linalg.norm(v)
    g1, _ = problem.full_gradients(x + h * v)
    g0, _ = problem.full_gradients(x - h * v)
    return float(np.linalg.norm(g1 - g0) / (2 * h)) * 2.0


def _rel_err(fd, g):
    scale = max(float(np.linalg.norm(g)), float(np.linalg.norm(fd)))
    if scale < 1e-8:
        return 0.0
    return float(np.linalg.norm(fd - g)) / scale


def finite_diff_check(problem, n_points=20, h_fd=1e-5, seed=0, n_directions=None):
    """Worst relative error between oracle gradients and central differences of
    the sampled ``f(., theta)`` and ``h_i(., theta)`` under the same theta.

    Small problems are differenced coordinatewise; otherwise along
    ``n_directions`` random unit directions (default 8 when ``dim > 50``).
    """
    if not 1e-7 <= h_fd <= 1e-3:
        raise ValueError("h_fd must lie in [1e-7, 1e-3]")
    rng = np.random.default_rng(derive_seed(seed, 0xFD))
    xset = problem.feasible_set
    shape = xset.shape
    dim = xset.dim
    if n_directions is None and dim > 50:
        n_directions = 8
    pts = xset.sample_points(rng, n_points, boundary_fraction=0.0)
    samples = problem.draw(rng, n_points)
    worst = 0.0
    for x, sid in zip(pts, samples):
        ctx = SampleContext(0, sid)
        ev = problem.oracle(x, ctx)
        if n_directions:
            dirs = rng.standard_normal((n_directions,) + shape)
            dirs /= np.sqrt(np.sum(dirs ** 2, axis=tuple(range(1, dirs.ndim)), keepdims=True))
        else:
            dirs = np.eye(dim).reshape((dim,) + shape)
        fd_f = np.empty(len(dirs))
        fd_h = np.empty((len(dirs), problem.n_constraints))
        for k, v in enumerate(dirs):
            fp, hp = problem.sample_values(x + h_fd * v, ctx)
            fm, hm = problem.sample_values(x - h_fd * v, ctx)
            fd_f[k] = (fp - fm) / (2 * h_fd)
            fd_h[k] = (np.asarray(hp) - np.asarray(hm)) / (2 * h_fd)
        flat = dirs.reshape(len(dirs), -1)
        worst = max(worst, _rel_err(fd_f, flat @ ev.obj_grad.ravel()))
        jac = ev.constr_jac.reshape(problem.n_constraints, -1)
        for i in range(problem.n_constraints):
            worst = max(worst, _rel_err(fd_h[:, i], flat @ jac[i]))
    return worst
