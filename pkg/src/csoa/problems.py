"""Benchmark problems: fairness-constrained logistic regression and structural
matrix completion, with their stochastic oracles and data generators."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import multivariate_normal

from .core import ConfigError, OracleEval, SampleContext, derive_seed
from .sets import L2BallSet, NuclearBallSet

# substream tags for derive_seed
_TAG_FAIR = 0xFA1
_TAG_MC = 0x3C
_TAG_SPLIT = 0x5B


# --------------------------------------------------------------------------- fairness


class FairClassificationProblem:
    """Logistic loss with a two-sided covariance budget ``|cov(s, x^T w)| <= c``.

    The budget is split into ``h+ = cov - c`` and ``h- = -cov - c``. ``s_bar``
    is the mean of ``s`` over the training rows and stays fixed. With
    ``constrained=False`` the problem has no constraints (same data, same set).
    Held-out rows, if any, are kept in ``X_test``/``y_test``/``s_test``.
    """

    block_size = 4096

    def __init__(self, X, y, s, c=0.05, radius=10.0, batch=1, X_test=None, y_test=None,
                 s_test=None, constrained=True, feature_names=None, X_val=None, y_val=None,
                 s_val=None):
        X = np.ascontiguousarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("need a nonempty 2-d feature matrix")
        y = np.asarray(y, dtype=float)
        s = np.asarray(s, dtype=float)
        if y.shape != (X.shape[0],) or s.shape != (X.shape[0],):
            raise ValueError("labels and sensitive attribute must have one entry per row")
        for name, v in (("y", y), ("s", s)):
            if not np.all((v == 0) | (v == 1)):
                raise ValueError(f"{name} must be binary 0/1")
        if not c > 0:
            raise ConfigError("c must be > 0")
        if int(batch) < 1 or int(batch) > X.shape[0]:
            raise ConfigError(f"batch must lie in [1, {X.shape[0]}]")
        self.X, self.y, self.s = X, y, s
        self.c = float(c)
        self.batch = int(batch)
        self.s_bar = float(s.mean())
        self.w = s - self.s_bar
        self.constrained = bool(constrained)
        self.n_constraints = 2 if constrained else 0
        self.feasible_set = L2BallSet(np.zeros(X.shape[1]), radius)
        self.X_test, self.y_test, self.s_test = X_test, y_test, s_test
        self.X_val, self.y_val, self.s_val = X_val, y_val, s_val
        self.feature_names = list(feature_names) if feature_names is not None else None
        for arr in (self.X, self.y, self.s, self.w):
            arr.flags.writeable = False
        # full-data covariance direction: cov(w) = <wx, w>
        self._wx = self.w @ X / X.shape[0]
        self._yx = y @ X / X.shape[0]
        self.slater_point = np.zeros(X.shape[1])

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def shape(self):
        return (self.X.shape[1],)

    def without_constraints(self) -> "FairClassificationProblem":
        return FairClassificationProblem(
            self.X, self.y, self.s, self.c, self.feasible_set.radius, self.batch, self.X_test,
            self.y_test, self.s_test, constrained=False, feature_names=self.feature_names,
            X_val=self.X_val, y_val=self.y_val, s_val=self.s_val)

    def draw(self, rng, count):
        return rng.integers(0, self.n_samples, size=(count, self.batch))

    def oracle(self, x, ctx: SampleContext) -> OracleEval:
        return fair_oracle(self, x, ctx)

    def sample_values(self, x, ctx):
        idx = ctx.sample_id
        z = self.X[idx] @ x
        loss = float(np.mean(np.logaddexp(0.0, z) - self.y[idx] * z))
        if not self.constrained:
            return loss, np.zeros(0)
        cov = float(self.w[idx] @ z) / len(idx)
        return loss, np.array([cov - self.c, -cov - self.c])

    def covariance(self, x) -> float:
        return float(self._wx @ x)

    def full_values(self, x):
        z = self.X @ x
        # softplus(z) = log1p(exp(-|z|)) + max(z, 0); faster than logaddexp
        loss = float((np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)).sum()) / len(z) \
            - float(self._yx @ x)
        if not self.constrained:
            return loss, []
        cov = float(self.w @ z) / self.n_samples
        return loss, [cov - self.c, -cov - self.c]

    def objective(self, x):
        return self.full_values(x)[0]

    def constraints(self, x):
        return np.array(self.full_values(x)[1], dtype=float)

    def full_gradients(self, x):
        p = expit(self.X @ x)
        g = (p - self.y) @ self.X / self.n_samples
        if not self.constrained:
            return g, np.zeros((0, g.shape[0]))
        return g, np.vstack([self._wx, -self._wx])

    def initial_point(self):
        return np.zeros(self.X.shape[1])


def fair_oracle(problem: FairClassificationProblem, x, ctx: SampleContext) -> OracleEval:
    """Minibatch logistic gradient and covariance constraints under ``ctx``."""
    idx = ctx.sample_id
    Xi = problem.X[idx]
    z = Xi @ x
    k = len(idx)
    g = (expit(z) - problem.y[idx]) @ Xi / k
    if not problem.constrained:
        return OracleEval(g, np.zeros(0), np.zeros((0, g.shape[0])))
    wi = problem.w[idx]
    cov = float(wi @ z) / k
    row = wi @ Xi / k
    return OracleEval(g, np.array([cov - problem.c, -cov - problem.c]), np.array([row, -row]))


@dataclass
class SyntheticFairnessConfig:
    n_samples: int = 4000
    mean_pos: Sequence[float] = (2.0, 2.0)
    cov_pos: Sequence[Sequence[float]] = ((5.0, 1.0), (1.0, 5.0))
    mean_neg: Sequence[float] = (-2.0, -2.0)
    cov_neg: Sequence[Sequence[float]] = ((10.0, 1.0), (1.0, 3.0))
    phi: float = math.pi / 4
    test_fraction: float = 0.3
    c: float = 0.05
    radius: float = 10.0
    batch: int = 1
    standardize: bool = True
    intercept: bool = True

    def validate(self):
        if self.n_samples < 2:
            raise ConfigError("n_samples must be >= 2")
        for name in ("cov_pos", "cov_neg"):
            cov = np.asarray(getattr(self, name), dtype=float)
            if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
                raise ConfigError(f"{name} must be a symmetric 2x2 matrix")
            if np.linalg.eigvalsh(cov).min() <= 0:
                raise ConfigError(f"{name} must be positive definite")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in [0, 1)")


def rotation(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def gen_synthetic_raw(cfg: SyntheticFairnessConfig, seed: int):
    """``(features, y, s)`` before any preprocessing."""
    cfg.validate()
    rng = np.random.default_rng(derive_seed(seed, _TAG_FAIR))
    n = int(cfg.n_samples)
    y = rng.integers(0, 2, size=n)
    pos = multivariate_normal(mean=cfg.mean_pos, cov=cfg.cov_pos)
    neg = multivariate_normal(mean=cfg.mean_neg, cov=cfg.cov_neg)
    feats = np.empty((n, 2))
    n_pos = int(y.sum())
    feats[y == 1] = pos.rvs(size=n_pos, random_state=rng).reshape(n_pos, 2)
    feats[y == 0] = neg.rvs(size=n - n_pos, random_state=rng).reshape(n - n_pos, 2)
    rot = feats @ rotation(cfg.phi)
    p1, p0 = pos.pdf(rot), neg.pdf(rot)
    denom = p1 + p0
    prob = np.divide(p1, denom, out=np.full(n, 0.5), where=denom > 0)
    s = (rng.random(n) < prob).astype(int)
    return feats, y, s


def split_indices(n, seed, test_fraction, val_fraction=0.0):
    """Shuffled ``(train, val, test)`` index arrays; both fractions are of ``n``."""
    if test_fraction + val_fraction >= 1.0:
        raise ConfigError("test_fraction + val_fraction must be < 1")
    perm = np.random.default_rng(derive_seed(seed, _TAG_SPLIT)).permutation(n)
    n_test = int(round(test_fraction * n))
    n_val = int(round(val_fraction * n))
    return perm[n_test + n_val:], perm[n_test:n_test + n_val], perm[:n_test]


def standardize_columns(F):
    """Z-score each column; constant columns are only centred."""
    mean = F.mean(axis=0)
    std = F.std(axis=0)
    const = std == 0
    if const.any():
        warnings.warn(f"{int(const.sum())} constant feature column(s) left unscaled",
                      RuntimeWarning, stacklevel=2)
    std = np.where(const, 1.0, std)
    return (F - mean) / std


def _assemble(F, y, s, seed, test_fraction, val_fraction, c, radius, batch, standardize,
              intercept, names):
    F = np.asarray(F, dtype=float)
    if standardize:
        F = standardize_columns(F)
    if intercept:
        F = np.hstack([F, np.ones((F.shape[0], 1))])
        names = list(names) + ["intercept"]
    tr, va, te = split_indices(F.shape[0], seed, test_fraction, val_fraction)
    if len(tr) == 0:
        raise ConfigError("training split is empty")
    if len(tr) < batch:
        raise ConfigError(f"batch {batch} exceeds the {len(tr)} training rows")
    part = (lambda a, i: a[i] if len(i) else None)
    return FairClassificationProblem(
        F[tr], y[tr], s[tr], c=c, radius=radius, batch=batch,
        X_test=part(F, te), y_test=part(y, te), s_test=part(s, te),
        X_val=part(F, va), y_val=part(y, va), s_val=part(s, va), feature_names=names)


def gen_synthetic_fairness(cfg: Optional[SyntheticFairnessConfig] = None, seed: int = 0
                           ) -> FairClassificationProblem:
    """Two-Gaussian classification data whose sensitive attribute follows the class
    posterior evaluated at the features rotated by ``phi``."""
    cfg = cfg or SyntheticFairnessConfig()
    feats, y, s = gen_synthetic_raw(cfg, seed)
    return _assemble(feats, y, s, seed, cfg.test_fraction, 0.0, cfg.c, cfg.radius, cfg.batch,
                     cfg.standardize, cfg.intercept, ["x1", "x2"])


def _binary_column(df, col, positive):
    v = df[col]
    if positive is not None:
        return (v.astype(str).str.strip() == str(positive)).astype(int).to_numpy()
    num = np.asarray(v, dtype=object)
    ok = np.array([x in (0, 1) and not isinstance(x, str) for x in num])
    if not ok.all():
        bad = np.flatnonzero(~ok)
        rows = ", ".join(str(i + 2) for i in bad[:10])
        more = f" (+{len(bad) - 10} more)" if len(bad) > 10 else ""
        raise ValueError(f"column {col!r} is not binary 0/1 at line(s) {rows}{more}")
    return num.astype(int)


def ingest_csv(path, schema: dict, seed: int = 0, test_fraction: float = 0.3,
               val_fraction: float = 0.07, c: float = 0.05, radius: float = 10.0,
               batch: int = 1) -> FairClassificationProblem:
    """Load a fairness dataset from a headed, comma-separated UTF-8 file.

    ``schema`` keys: ``label_col``, ``sensitive_col``, ``feature_cols`` and
    optionally ``standardize`` (default True), ``intercept`` (default True),
    ``label_positive`` / ``sensitive_positive`` (value mapped to 1 when the
    column is not already 0/1). Non-numeric feature columns are one-hot
    encoded. Error messages cite file line numbers (header is line 1).
    """
    import pandas as pd

    for key in ("label_col", "sensitive_col", "feature_cols"):
        if key not in schema:
            raise ConfigError(f"schema is missing {key!r}")
    df = pd.read_csv(path, encoding="utf-8", skipinitialspace=True)
    if len(df) == 0:
        raise ValueError(f"{path}: no data rows")
    feature_cols = list(schema["feature_cols"])
    wanted = [schema["label_col"], schema["sensitive_col"], *feature_cols]
    missing = [col for col in wanted if col not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing column(s) {missing}; found {list(df.columns)}")
    na = df[wanted].isna().any(axis=1).to_numpy()
    if na.any():
        rows = ", ".join(str(i + 2) for i in np.flatnonzero(na)[:10])
        raise ValueError(f"{path}: empty values at line(s) {rows}")
    y = _binary_column(df, schema["label_col"], schema.get("label_positive"))
    s = _binary_column(df, schema["sensitive_col"], schema.get("sensitive_positive"))
    feats = pd.get_dummies(df[feature_cols], dtype=float)
    return _assemble(feats.to_numpy(dtype=float), y, s, seed, test_fraction, val_fraction, c,
                     radius, batch, bool(schema.get("standardize", True)),
                     bool(schema.get("intercept", True)), list(feats.columns))


# --------------------------------------------------------------------- matrix completion


class MatrixCompletionProblem:
    """``min 1/2 sum_I (X_ij - M_ij)^2`` s.t. ``1/2 sum_{I^c} X_ij^2 <= beta``,
    ``||X||_* <= alpha``.

    The oracle samples ``b`` observed and ``b`` unobserved cells without
    replacement and rescales by ``|I|/b`` and ``|I^c|/b``.

    ``scaling="mean"`` divides objective and constraint by ``|I|`` and
    ``|I^c|`` (same minimizer and feasible set, per-entry units). Tuned step
    parameters depend on this choice.
    """

    block_size = 64
    n_constraints = 1

    def __init__(self, shape, obs_rows, obs_cols, obs_vals, alpha, beta, b=200, X_star=None,
                 lmo_tol=1e-10, lmo_max_iters=500, seed=0, scaling="sum", lmo_block=1):
        m, n = (int(shape[0]), int(shape[1]))
        self.obs_rows = np.asarray(obs_rows, dtype=np.intp)
        self.obs_cols = np.asarray(obs_cols, dtype=np.intp)
        self.obs_vals = np.asarray(obs_vals, dtype=float)
        if not (self.obs_rows.shape == self.obs_cols.shape == self.obs_vals.shape):
            raise ValueError("observed rows, cols and values must align")
        mask = np.zeros((m, n), dtype=bool)
        mask[self.obs_rows, self.obs_cols] = True
        if mask.sum() != len(self.obs_rows):
            raise ValueError("duplicate observed cells")
        self.mask = mask
        self.comp_rows, self.comp_cols = np.nonzero(~mask)
        self.n_obs = len(self.obs_rows)
        self.n_comp = len(self.comp_rows)
        b = int(b)
        if b < 1 or b > self.n_obs or b > self.n_comp:
            raise ConfigError(f"b={b} must lie in [1, min(|I|={self.n_obs}, |I^c|={self.n_comp})]")
        self.b = b
        if scaling not in ("sum", "mean"):
            raise ConfigError(f"scaling must be 'sum' or 'mean', got {scaling!r}")
        self.scaling = scaling
        self.f_scale = 1.0 if scaling == "sum" else 1.0 / self.n_obs
        self.h_scale = 1.0 if scaling == "sum" else 1.0 / self.n_comp
        # per-sample multipliers of the minibatch sums
        self._so = self.n_obs / b * self.f_scale
        self._sc = self.n_comp / b * self.h_scale
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.feasible_set = NuclearBallSet(m, n, alpha, tol=lmo_tol, max_iters=lmo_max_iters,
                                           seed=seed, block=lmo_block)
        self.M = np.zeros((m, n))
        self.M[self.obs_rows, self.obs_cols] = self.obs_vals
        self.X_star = X_star
        self.m_energy = math.fsum(self.obs_vals ** 2)

    @property
    def shape(self):
        return self.feasible_set.shape

    def draw(self, rng, count):
        return [(rng.choice(self.n_obs, self.b, replace=False),
                 rng.choice(self.n_comp, self.b, replace=False)) for _ in range(count)]

    def oracle(self, X, ctx: SampleContext) -> OracleEval:
        return mc_oracle(self, X, ctx)

    def sample_values(self, X, ctx):
        io, ic = ctx.sample_id
        r = X[self.obs_rows[io], self.obs_cols[io]] - self.obs_vals[io]
        xc = X[self.comp_rows[ic], self.comp_cols[ic]]
        f = 0.5 * float(r @ r) * self._so
        h = 0.5 * float(xc @ xc) * self._sc - self.beta * self.h_scale
        return f, np.array([h])

    def full_values(self, X):
        r = X[self.obs_rows, self.obs_cols] - self.obs_vals
        xc = X[self.comp_rows, self.comp_cols]
        return (0.5 * float(r @ r) * self.f_scale,
                [(0.5 * float(xc @ xc) - self.beta) * self.h_scale])

    def objective(self, X):
        return self.full_values(X)[0]

    def constraints(self, X):
        return np.array(self.full_values(X)[1])

    def full_gradients(self, X):
        g = np.where(self.mask, X - self.M, 0.0) * self.f_scale
        jac = np.where(self.mask, 0.0, X)[None] * self.h_scale
        return g, jac

    def normalized_error(self, X):
        r = X[self.obs_rows, self.obs_cols] - self.obs_vals
        return math.fsum(r * r) / self.m_energy

    def error_from_objective(self, f_val):
        """Normalized error implied by a full objective value."""
        return 2.0 * f_val / (self.f_scale * self.m_energy)

    def initial_point(self):
        return np.zeros(self.shape)


def mc_oracle(problem: MatrixCompletionProblem, X, ctx: SampleContext) -> OracleEval:
    """Rescaled minibatch gradient of the observed fit and of the unobserved energy."""
    if X.shape != problem.shape:
        raise ValueError(f"expected shape {problem.shape}, got {X.shape}")
    io, ic = ctx.sample_id
    ro, co = problem.obs_rows[io], problem.obs_cols[io]
    rc, cc = problem.comp_rows[ic], problem.comp_cols[ic]
    so, sc = problem._so, problem._sc
    g = np.zeros(problem.shape)
    g[ro, co] = (X[ro, co] - problem.obs_vals[io]) * so
    xc = X[rc, cc]
    jac = np.zeros((1,) + problem.shape)
    jac[0, rc, cc] = xc * sc
    h = 0.5 * float(xc @ xc) * sc - problem.beta * problem.h_scale
    return OracleEval(g, np.array([h]), jac)


@dataclass
class SyntheticMCConfig:
    m: int = 200
    n: int = 300
    r: int = 10
    gamma: float = 1e-3
    sparsities: Sequence[float] = (0.7, 0.5)
    subsample_rates: Sequence[float] = (0.01, 0.9)
    b: int = 200
    max_attempts: int = 10
    lmo_max_iters: int = 500
    lmo_block: int = 4
    scaling: str = "sum"


def gen_synthetic_mc(m=200, n=300, r=10, gamma=1e-3, sparsities=(0.7, 0.5),
                     subsample_rates=(0.01, 0.9), seed=0, b=200, max_attempts=10,
                     lmo_max_iters=500, lmo_block=4, scaling="sum") -> MatrixCompletionProblem:
    """Sparse low-rank ``X* = X_L X_R`` observed on a biased subset with noise.

    ``sparsities`` are the zero probabilities of the two factors; the observed
    set takes exactly ``round(rate0 * #zeros)`` zero cells and
    ``round(rate1 * #nonzeros)`` nonzero cells of ``X*``. ``alpha = ||X*||_*``,
    ``beta = 1/2 sum_{I^c} X*^2``.
    """
    if not 1 <= r <= min(m, n):
        raise ConfigError(f"rank r={r} must lie in [1, min(m, n)={min(m, n)}]")
    if gamma < 0:
        raise ConfigError("gamma must be >= 0")
    for attempt in range(max_attempts):
        rng = np.random.default_rng(derive_seed(seed, _TAG_MC, attempt))
        XL = np.where(rng.random((m, r)) < sparsities[0], 0.0, rng.random((m, r)))
        XR = np.where(rng.random((r, n)) < sparsities[1], 0.0, rng.random((r, n)))
        X_star = XL @ XR
        nz = X_star != 0
        if nz.any():
            break
    else:
        raise RuntimeError(f"X* was all zero in {max_attempts} attempts")
    zero_idx = np.flatnonzero(~nz)
    nz_idx = np.flatnonzero(nz)
    k0 = int(round(subsample_rates[0] * len(zero_idx)))
    k1 = int(round(subsample_rates[1] * len(nz_idx)))
    obs = np.sort(np.concatenate([rng.choice(zero_idx, k0, replace=False),
                                  rng.choice(nz_idx, k1, replace=False)]))
    Z = rng.standard_normal((m, n))
    W = gamma * (np.linalg.norm(X_star) / np.linalg.norm(Z)) * Z
    rows, cols = np.unravel_index(obs, (m, n))
    vals = X_star[rows, cols] + W[rows, cols]
    mask = np.zeros((m, n), dtype=bool)
    mask[rows, cols] = True
    alpha = float(np.linalg.norm(X_star, "nuc"))
    beta = 0.5 * math.fsum(X_star[~mask] ** 2)
    prob = MatrixCompletionProblem((m, n), rows, cols, vals, alpha, beta, b=b, X_star=X_star,
                                   seed=seed, lmo_max_iters=lmo_max_iters, lmo_block=lmo_block,
                                   scaling=scaling)
    prob.noise = W
    return prob
