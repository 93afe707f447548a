"""Feasible sets: Euclidean projections for CSOA and linear minimization oracles
for the projection-free variant."""
from __future__ import annotations

import math
import warnings

import numpy as np

from .core import derive_seed


class LMOError(RuntimeError):
    """Power iteration failed to converge inside the nuclear-norm LMO."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _zero_direction_warning(name):
    warnings.warn(f"{name}.lmo called with a zero direction; returning the canonical vertex",
                  RuntimeWarning, stacklevel=3)


class FeasibleSet:
    """Compact convex set with a known Euclidean diameter bound.

    Subclasses set ``has_projection`` / ``has_lmo`` and implement the
    corresponding operations.
    """

    has_projection = False
    has_lmo = False
    shape: tuple = ()

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError(f"{type(self).__name__} has no projection")

    def lmo(self, d, call_index=None):
        raise NotImplementedError(f"{type(self).__name__} has no linear minimization oracle")

    def residual(self, x) -> float:
        """Membership violation; 0 for members."""
        raise NotImplementedError

    def contains(self, x, tol=1e-9) -> bool:
        return self.residual(x) <= tol

    def sample_points(self, rng, n, boundary_fraction=0.5):
        """``n`` members; about ``boundary_fraction`` of them on the boundary."""
        raise NotImplementedError

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")
        if not math.isfinite(float(np.vdot(x, x))):
            raise FloatingPointError("non-finite input")
        return x


class BoxSet(FeasibleSet):
    has_projection = True
    has_lmo = True

    def __init__(self, lower, upper):
        self.lower = np.array(lower, dtype=float)
        self.upper = np.array(upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower must be <= upper elementwise")
        self.shape = self.lower.shape

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def project(self, x):
        return np.clip(self._check(x), self.lower, self.upper)

    def lmo(self, d, call_index=None):
        d = self._check(d)
        if not d.any():
            _zero_direction_warning("BoxSet")
        # upper bound on ties
        return np.where(d > 0, self.lower, self.upper)

    def residual(self, x):
        x = np.asarray(x, dtype=float)
        return float(max(0.0, np.max(self.lower - x), np.max(x - self.upper)))

    def sample_points(self, rng, n, boundary_fraction=0.5):
        pts = self.lower + rng.random((n, self.dim)) * (self.upper - self.lower)
        k = int(round(n * boundary_fraction))
        corners = rng.random((k, self.dim)) < 0.5
        pts[:k] = np.where(corners, self.upper, self.lower)
        return list(pts)


class L2BallSet(FeasibleSet):
    has_projection = True
    has_lmo = True

    def __init__(self, center, radius):
        self.center = np.array(center, dtype=float)
        if self.center.ndim != 1:
            raise ValueError("center must be a vector")
        if not radius > 0:
            raise ValueError("radius must be > 0")
        self.radius = float(radius)
        self.shape = self.center.shape

    @property
    def diameter(self):
        return 2.0 * self.radius

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {x.shape}")
        v = x - self.center
        nv = math.sqrt(float(v @ v))
        if not math.isfinite(nv):
            raise FloatingPointError("non-finite input")
        if nv <= self.radius:
            return x.copy()
        return self.center + (self.radius / nv) * v

    def lmo(self, d, call_index=None):
        d = self._check(d)
        nd = float(np.linalg.norm(d))
        if nd == 0:
            _zero_direction_warning("L2BallSet")
            s = self.center.copy()
            s[0] -= self.radius
            return s
        return self.center - (self.radius / nd) * d

    def residual(self, x):
        return max(0.0, float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) - self.radius)

    def sample_points(self, rng, n, boundary_fraction=0.5):
        m = self.dim
        g = rng.standard_normal((n, m))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / m)
        r[: int(round(n * boundary_fraction))] = self.radius
        return list(self.center + r[:, None] * g)


class L1BallSet(FeasibleSet):
    """``{x : ||x||_1 <= radius}``; LMO only."""

    has_lmo = True

    def __init__(self, dim, radius):
        if not radius > 0:
            raise ValueError("radius must be > 0")
        self.radius = float(radius)
        self.shape = (int(dim),)

    @property
    def diameter(self):
        return 2.0 * self.radius

    def lmo(self, d, call_index=None):
        d = self._check(d)
        i = int(np.argmax(np.abs(d)))  # first index on ties
        s = np.zeros(self.shape)
        if d[i] == 0:
            _zero_direction_warning("L1BallSet")
        s[i] = -self.radius if d[i] >= 0 else self.radius
        return s

    def residual(self, x):
        return max(0.0, float(np.abs(np.asarray(x, dtype=float)).sum()) - self.radius)

    def vertices(self):
        eye = np.eye(self.dim) * self.radius
        return np.vstack([eye, -eye])

    def sample_points(self, rng, n, boundary_fraction=0.5):
        m = self.dim
        e = rng.exponential(size=(n, m))
        pts = e / e.sum(axis=1, keepdims=True) * np.where(rng.random((n, m)) < 0.5, -1.0, 1.0)
        scale = rng.random(n) ** (1.0 / m)
        scale[: int(round(n * boundary_fraction))] = 1.0
        return list(self.radius * scale[:, None] * pts)


class NuclearBallSet(FeasibleSet):
    """``{X : ||X||_* <= radius}`` over ``rows x cols`` matrices; LMO only.

    The LMO returns ``-radius * u v^T`` for the top singular pair of the
    direction, found by power iteration on ``D^T D``. The start vector is drawn
    from ``(seed, call_index)``; without a call index an internal counter is used.
    """

    has_lmo = True

    def __init__(self, rows, cols, radius, tol=1e-10, max_iters=500, seed=0, block=1):
        if not radius > 0:
            raise ValueError("radius must be > 0")
        if int(block) < 1:
            raise ValueError("block must be >= 1")
        self.shape = (int(rows), int(cols))
        self.radius = float(radius)
        self.tol = float(tol)
        self.max_iters = int(max_iters)
        self.seed = int(seed)
        self.block = int(block)
        self._calls = 0
        self.last_iterations = 0

    @property
    def diameter(self):
        return 2.0 * self.radius

    def top_singular_pair(self, d, call_index=None):
        """``(u, sigma, v)`` with ``u^T d v = sigma > 0``.

        ``block > 1`` iterates a ``block``-dimensional subspace and extracts the
        top Ritz pair each sweep, which copes with nearly equal leading
        singular values.
        """
        if call_index is None:
            call_index = self._calls
            self._calls += 1
        rng = np.random.default_rng(derive_seed(self.seed, call_index))
        k = min(self.block, d.shape[1])
        if k == 1:
            v = self._power(d, rng)
        else:
            v = self._subspace(d, rng, k)
        u = d @ v
        sigma = float(np.linalg.norm(u))
        return u / sigma, sigma, v

    def _power(self, d, rng):
        v = rng.standard_normal(d.shape[1])
        v /= np.linalg.norm(v)
        lam_prev = 0.0
        for k in range(1, self.max_iters + 1):
            w = d.T @ (d @ v)
            lam = float(np.linalg.norm(w))
            if lam == 0.0:
                raise LMOError("start vector is in the null space of the direction", 0.0)
            v = w / lam
            if abs(lam - lam_prev) <= self.tol * lam:
                self.last_iterations = k
                return v
            lam_prev = lam
        w = d.T @ (d @ v)
        raise LMOError(f"power iteration did not converge in {self.max_iters} iterations",
                       float(np.linalg.norm(w - (v @ w) * v)))

    def _subspace(self, d, rng, k):
        V, _ = np.linalg.qr(rng.standard_normal((d.shape[1], k)))
        theta_prev = 0.0
        for it in range(1, self.max_iters + 1):
            W = d.T @ (d @ V)
            evals, evecs = np.linalg.eigh(V.T @ W)
            theta = float(evals[-1])
            if theta <= 0.0:
                raise LMOError("start block is in the null space of the direction", 0.0)
            v = V @ evecs[:, -1]
            if abs(theta - theta_prev) <= self.tol * theta:
                self.last_iterations = it
                return v / np.linalg.norm(v)
            theta_prev = theta
            V, _ = np.linalg.qr(W)
        w = d.T @ (d @ v)
        raise LMOError(f"subspace iteration did not converge in {self.max_iters} iterations",
                       float(np.linalg.norm(w - (v @ w) * v)))

    def lmo(self, d, call_index=None):
        d = self._check(d)
        if not d.any():
            _zero_direction_warning("NuclearBallSet")
            s = np.zeros(self.shape)
            s[0, 0] = -self.radius
            return s
        u, _, v = self.top_singular_pair(d, call_index)
        return -self.radius * np.outer(u, v)

    def residual(self, x):
        return max(0.0, float(np.linalg.norm(np.asarray(x, dtype=float), "nuc")) - self.radius)

    def sample_points(self, rng, n, boundary_fraction=0.5):
        m, k = self.shape
        out = []
        n_bd = int(round(n * boundary_fraction))
        for i in range(n):
            r = int(rng.integers(1, min(m, k, 5) + 1))
            x = rng.standard_normal((m, r)) @ rng.standard_normal((r, k))
            x *= self.radius / np.linalg.norm(x, "nuc")
            if i >= n_bd:
                x *= rng.random()
            out.append(x)
        return out
