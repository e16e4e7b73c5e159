"""Probability kernels shared by the whole package.

Multivariate Gaussian (joint / conditional / sampling / log-pdf), categorical
pmf and sampling, the logistic link, and enumeration of level combinations
for sets of categorical variables.  Everything is a pure function over
immutable parameter objects; random draws consume a caller-owned
``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import expit

from .errors import EnumerationCapError, NumericsError

LOG_2PI = math.log(2.0 * math.pi)

# Guarded stand-in for log(0) of a categorical cell.  Large-negative but far
# from the float64 overflow edge, so sums of several sentinels stay finite.
LOG_ZERO = -1.0e30

# Hard cap on the enumerated product space of missing discrete levels.
ENUMERATION_CAP = 4096


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def ensure_spd(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Validate/repair a covariance matrix; return ``(cov, lower_cholesky)``.

    The matrix is symmetrized, and if the Cholesky factorization fails a
    ridge of ``1e-8 * trace / dim`` is added once.  A second failure raises
    ``NumericsError``.
    """
    cov = _symmetrize(np.asarray(cov, dtype=float))
    try:
        return cov, np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    ridge = 1e-8 * np.trace(cov) / cov.shape[0]
    repaired = cov + ridge * np.eye(cov.shape[0])
    try:
        return repaired, np.linalg.cholesky(repaired)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(
            f"covariance is not positive definite even after ridge {ridge:g}"
        ) from exc


@dataclass(frozen=True)
class GaussianParams:
    """Mean vector and SPD covariance of the continuous covariate block."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        if mean.ndim != 1:
            raise NumericsError("gaussian mean must be a vector")
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise NumericsError(
                f"covariance shape {cov.shape} does not match mean of size {mean.size}"
            )
        rel = np.max(np.abs(cov - cov.T)) if cov.size else 0.0
        scale = max(np.max(np.abs(cov)), 1.0) if cov.size else 1.0
        if rel > 1e-10 * scale:
            raise NumericsError("covariance is not symmetric to 1e-10 relative tolerance")
        cov, chol = ensure_spd(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))


@dataclass(frozen=True)
class CategoricalParams:
    """Probability vector over levels ``1..M`` of one discrete covariate."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 2:
            raise NumericsError("categorical needs a probability vector of length >= 2")
        if np.any(probs < 0):
            raise NumericsError("categorical probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise NumericsError(f"categorical probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def n_levels(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class ConditionalGaussian:
    """Gaussian law of the missing block given the observed block."""

    mean: np.ndarray
    cov: np.ndarray
    mis_idx: tuple[int, ...]
    obs_idx: tuple[int, ...]

    def __post_init__(self):
        cov, chol = ensure_spd(self.cov)
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))


def sigmoid_logodds(beta: np.ndarray, x: np.ndarray) -> float:
    """P(y=1 | x) under the logistic model with design ``[1, x]``.

    Computed so that ``sigmoid_logodds(beta, x)`` for the two outcome signs
    sums to exactly 1.0 and no overflow occurs for |log-odds| up to ~700.
    """
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    if beta.size != x.size + 1:
        raise NumericsError(
            f"beta has {beta.size} entries but needs {x.size + 1} (intercept + covariates)"
        )
    eta = beta[0] + float(beta[1:] @ x)
    return float(sigmoid(eta))


def sigmoid(eta):
    """Numerically stable logistic function with exact complement symmetry."""
    eta = np.asarray(eta, dtype=float)
    t = expit(-np.abs(eta))
    return np.where(eta >= 0, 1.0 - t, t)


def bernoulli_loglik(eta, y):
    """log P(y | log-odds eta) = y*eta - log(1 + exp(eta)), stable both tails."""
    eta = np.asarray(eta, dtype=float)
    return y * eta - np.logaddexp(0.0, eta)


def gaussian_logpdf(g: GaussianParams, x: np.ndarray) -> float:
    """Log density of ``x`` under ``g``, via the cached Cholesky factor."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.dim,):
        raise NumericsError(f"point of shape {x.shape} does not match dimension {g.dim}")
    from scipy.linalg import solve_triangular

    z = solve_triangular(g.chol, x - g.mean, lower=True)
    return -0.5 * (g.dim * LOG_2PI + g.log_det + float(z @ z))


def gaussian_conditional(
    g: GaussianParams,
    obs_idx,
    obs_vals,
    mis_idx,
) -> ConditionalGaussian:
    """Condition ``g`` on observed coordinates.

    mean = mu_mis + S_mo S_oo^-1 (x_obs - mu_obs)
    cov  = S_mm - S_mo S_oo^-1 S_om

    With no observed coordinates this is the marginal of the missing block.
    """
    obs_idx = tuple(int(i) for i in obs_idx)
    mis_idx = tuple(int(i) for i in mis_idx)
    if sorted(obs_idx + mis_idx) != list(range(g.dim)):
        raise NumericsError("obs_idx and mis_idx must partition the coordinates")
    mu, cov = g.mean, g.cov
    mi = np.asarray(mis_idx, dtype=int)
    if not obs_idx:
        return ConditionalGaussian(mu[mi], cov[np.ix_(mi, mi)], mis_idx, obs_idx)
    oi = np.asarray(obs_idx, dtype=int)
    obs_vals = np.asarray(obs_vals, dtype=float)
    s_oo = cov[np.ix_(oi, oi)]
    s_mo = cov[np.ix_(mi, oi)]
    try:
        gain = np.linalg.solve(s_oo, s_mo.T).T  # S_mo S_oo^-1
    except np.linalg.LinAlgError as exc:
        raise NumericsError("observed block of the covariance is singular") from exc
    mean = mu[mi] + gain @ (obs_vals - mu[oi])
    cov_c = cov[np.ix_(mi, mi)] - gain @ s_mo.T
    return ConditionalGaussian(mean, cov_c, mis_idx, obs_idx)


def conditional_gain(g: GaussianParams, obs_idx, mis_idx):
    """Shared pieces of ``gaussian_conditional`` for a whole missingness pattern.

    Returns ``(gain, cond_cov)`` so per-sample conditional means are
    ``mu_mis + gain @ (x_obs - mu_obs)`` without refactorizing per sample.
    """
    oi = np.asarray(tuple(obs_idx), dtype=int)
    mi = np.asarray(tuple(mis_idx), dtype=int)
    cov = g.cov
    if oi.size == 0:
        return np.zeros((mi.size, 0)), cov[np.ix_(mi, mi)].copy()
    s_oo = cov[np.ix_(oi, oi)]
    s_mo = cov[np.ix_(mi, oi)]
    try:
        gain = np.linalg.solve(s_oo, s_mo.T).T
    except np.linalg.LinAlgError as exc:
        raise NumericsError("observed block of the covariance is singular") from exc
    return gain, _symmetrize(cov[np.ix_(mi, mi)] - gain @ s_mo.T)


def gaussian_sample(g: GaussianParams, rng: np.random.Generator) -> np.ndarray:
    """One draw: ``mean + L z`` with ``z`` standard normal and ``L`` the Cholesky factor."""
    z = rng.standard_normal(g.dim)
    return g.mean + g.chol @ z


def categorical_sample(c: CategoricalParams, rng: np.random.Generator) -> int:
    """One level in ``1..M`` by inverse CDF on a single uniform."""
    u = rng.random()
    return int(np.searchsorted(np.cumsum(c.probs), u, side="right")) + 1


def categorical_sample_many(c: CategoricalParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized inverse-CDF sampling of ``n`` levels."""
    u = rng.random(n)
    return np.searchsorted(np.cumsum(c.probs), u, side="right").astype(np.int64) + 1


def categorical_logpmf(c: CategoricalParams, level: int) -> float:
    """log theta(level); zero-probability levels map to the ``LOG_ZERO`` sentinel."""
    if not 1 <= level <= c.n_levels:
        raise NumericsError(f"level {level} outside 1..{c.n_levels}")
    p = c.probs[level - 1]
    return float(np.log(p)) if p > 0.0 else LOG_ZERO


def categorical_log_probs(c: CategoricalParams) -> np.ndarray:
    """Vector of log pmf values with the zero-probability sentinel applied."""
    with np.errstate(divide="ignore"):
        lp = np.log(c.probs)
    return np.where(c.probs > 0.0, lp, LOG_ZERO)


def enumerate_levels(cats: list[CategoricalParams], cap: int = ENUMERATION_CAP):
    """All level combinations of the given categorical variables.

    Returns ``(levels, log_prior)`` where ``levels`` is an ``(n_combos, k)``
    integer array of level codes and ``log_prior[c] = sum_j log theta_j(levels[c, j])``.
    Raises ``EnumerationCapError`` when the product space exceeds ``cap``.
    """
    if not cats:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(1)
    size = 1
    for c in cats:
        size *= c.n_levels
    if size > cap:
        raise EnumerationCapError(
            f"{size} combinations of missing discrete levels exceed the cap of {cap}; "
            "reduce the number of jointly missing discrete covariates or their levels"
        )
    levels = np.array(list(product(*(range(1, c.n_levels + 1) for c in cats))), dtype=np.int64)
    log_prior = np.zeros(levels.shape[0])
    for j, c in enumerate(cats):
        log_prior += categorical_log_probs(c)[levels[:, j] - 1]
    return levels, log_prior
