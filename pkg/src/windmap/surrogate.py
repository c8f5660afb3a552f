"""Gaussian-process regression and the evaluation metrics built on it.

Exact GP inference with an isotropic squared-exponential kernel; targets are
standardized and inputs normalized to the unit box before fitting.
Hyperparameters (length scale, signal deviation) come from multi-start
quasi-Newton minimization of the negative log marginal likelihood with
analytic gradients.  Also: UCB acquisition, ordinary least squares with
fit-quality metrics, Spearman rank correlation, and deterministic k-fold
splits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.optimize import minimize

from .errors import IllConditioned, RankDeficient, ZeroVariance

JITTER_BASE = 1e-8
JITTER_MAX = 1e-4
LOG_BOUNDS = (math.log(1e-2), math.log(1e1))
N_STARTS = 8


def kernel(x, x2, length_scale: float, signal: float):
    """Squared-exponential covariance sigma^2 exp(-|x - x'|^2 / (2 l^2))."""
    if length_scale <= 0 or signal <= 0:
        raise ValueError("length scale and signal deviation must be positive")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    d2 = _sq_dists(x, x2)
    k = signal**2 * np.exp(-d2 / (2.0 * length_scale**2))
    return k[0, 0] if k.size == 1 else k


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aa = (a * a).sum(axis=1)[:, None]
    bb = (b * b).sum(axis=1)[None, :]
    d2 = aa + bb - 2.0 * a @ b.T
    return np.maximum(d2, 0.0)


@dataclass
class GpModel:
    """Trained exact-inference GP with cached Cholesky factorization."""

    x_train: np.ndarray          # normalized inputs, (n, d)
    y_train: np.ndarray          # standardized targets, (n,)
    length_scale: float
    signal: float
    jitter: float
    x_low: np.ndarray            # input normalization record
    x_high: np.ndarray
    y_mean: float
    y_std: float
    chol: np.ndarray
    alpha: np.ndarray
    nll: float

    def normalize(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (x - self.x_low) / (self.x_high - self.x_low)

    def summary(self) -> dict:
        return {
            "length_scale": self.length_scale,
            "signal": self.signal,
            "jitter": self.jitter,
            "nll": self.nll,
            "n_train": int(self.x_train.shape[0]),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "x_low": self.x_low.tolist(),
            "x_high": self.x_high.tolist(),
        }

    def save_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def nll_and_grad(theta, x, y, jitter):
    """Negative log marginal likelihood and gradient in log-hyperparameters.

    theta = (log length_scale, log signal).  Returns +inf (zero gradient)
    when the factorization fails so the optimizer backs away.
    """
    log_l, log_s = theta
    l = math.exp(log_l)
    s = math.exp(log_s)
    n = x.shape[0]
    d2 = _sq_dists(x, x)
    k = s**2 * np.exp(-d2 / (2.0 * l**2))
    k_jit = k + jitter * np.eye(n)
    try:
        c, low = cho_factor(k_jit, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return np.inf, np.zeros(2)
    alpha = cho_solve((c, low), y, check_finite=False)
    log_det = 2.0 * np.log(np.diag(c)).sum()
    nll = 0.5 * float(y @ alpha) + 0.5 * log_det + 0.5 * n * math.log(2.0 * math.pi)
    # dNLL/dtheta_j = -0.5 tr((alpha alpha^T - K^-1) dK/dtheta_j)
    k_inv = cho_solve((c, low), np.eye(n), check_finite=False)
    inner = np.outer(alpha, alpha) - k_inv
    dk_dlog_l = k * (d2 / l**2)
    dk_dlog_s = 2.0 * k
    grad = np.array(
        [
            -0.5 * float((inner * dk_dlog_l).sum()),
            -0.5 * float((inner * dk_dlog_s).sum()),
        ]
    )
    return nll, grad


def _start_points():
    lo, hi = LOG_BOUNDS
    # fixed 4x2 grid of starts in log-hyperparameter space (deterministic)
    ls = np.linspace(lo + 0.1, hi - 0.1, 4)
    ss = np.linspace(lo + 0.5, hi - 0.5, 2)
    return [(l, s) for l in ls for s in ss][:N_STARTS]


def fit(x, y, input_bounds=None) -> GpModel:
    """Fit a GP to raw inputs/targets.

    Inputs are normalized to [0, 1]^d by ``input_bounds`` (pairs of lows and
    highs; inferred from the data when omitted), targets standardized.
    Degenerate columns and constant targets are handled; duplicated inputs
    surface as IllConditioned after jitter escalation.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least two training points")
    if y.shape != (n,):
        raise ValueError("inputs and targets disagree in length")

    if input_bounds is None:
        x_low = x.min(axis=0)
        x_high = x.max(axis=0)
    else:
        x_low = np.asarray(input_bounds[0], dtype=float)
        x_high = np.asarray(input_bounds[1], dtype=float)
    span = x_high - x_low
    x_high = np.where(span <= 0, x_low + 1.0, x_high)
    xn = (x - x_low) / (x_high - x_low)

    y_mean = float(y.mean())
    y_scale = float(y.std())
    y_std = y_scale if y_scale > 0 else 1.0
    yn = (y - y_mean) / y_std

    best = None
    for start in _start_points():
        res = minimize(
            nll_and_grad,
            np.asarray(start),
            args=(xn, yn, JITTER_BASE),
            jac=True,
            method="L-BFGS-B",
            bounds=[LOG_BOUNDS, LOG_BOUNDS],
        )
        if best is None or res.fun < best.fun:
            best = res
    log_l, log_s = best.x
    l, s = math.exp(log_l), math.exp(log_s)

    jitter = JITTER_BASE
    k = kernel(xn, xn, l, s)
    while True:
        try:
            c, low = cho_factor(k + jitter * np.eye(n), lower=True, check_finite=False)
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > JITTER_MAX:
                raise IllConditioned(
                    "kernel matrix not positive definite at maximum jitter; "
                    "deduplicate inputs and retry"
                ) from None
    alpha = cho_solve((c, low), yn, check_finite=False)
    nll = float(nll_and_grad((log_l, log_s), xn, yn, jitter)[0])
    return GpModel(
        x_train=xn,
        y_train=yn,
        length_scale=l,
        signal=s,
        jitter=jitter,
        x_low=x_low,
        x_high=x_high,
        y_mean=y_mean,
        y_std=y_std,
        chol=np.tril(c),
        alpha=alpha,
        nll=nll,
    )


def predict(model: GpModel, x):
    """Posterior mean and deviation at query points, de-standardized.

    Accepts a single point (d,) or a batch (m, d); returns floats for a
    single point, arrays for a batch.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xn = model.normalize(x)
    k_star = kernel(model.x_train, xn, model.length_scale, model.signal)
    k_star = np.atleast_2d(k_star)
    mu = k_star.T @ model.alpha
    v = solve_triangular(model.chol, k_star, lower=True, check_finite=False)
    var = model.signal**2 - (v * v).sum(axis=0)
    sigma = np.sqrt(np.maximum(var, 0.0))
    mu_out = mu * model.y_std + model.y_mean
    sigma_out = sigma * model.y_std
    if single:
        return float(mu_out[0]), float(sigma_out[0])
    return mu_out, sigma_out


def ucb(model: GpModel, x, kappa: float):
    """Upper confidence bound mu + kappa * sigma (for maximization)."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    mu, sigma = predict(model, x)
    return mu + kappa * sigma


def optimistic(model: GpModel, x, kappa: float):
    """Optimistic estimate mu - kappa * sigma (lower is better)."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    mu, sigma = predict(model, x)
    return mu - kappa * sigma


def linear_fit(x, y):
    """Ordinary least squares with intercept: (coefficients, R^2, RMSE).

    The coefficient vector starts with the intercept.  Raises RankDeficient
    when the design matrix loses column rank.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = x.shape
    if n <= d + 1:
        raise ValueError("need more samples than coefficients")
    design = np.column_stack([np.ones(n), x])
    rank = np.linalg.matrix_rank(design)
    if rank < d + 1:
        raise RankDeficient(f"design matrix rank {rank} < {d + 1}")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ coef
    ss_res = float((residuals**2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    rmse = math.sqrt(ss_res / n)
    return coef, r2, rmse


def _average_ranks(v: np.ndarray) -> np.ndarray:
    """Fractional ranks: ties share the average of their positions."""
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Spearman rank correlation via Pearson correlation of average ranks."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ValueError("need two equal-length vectors of size >= 2")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ZeroVariance("rank correlation undefined for constant input")
    ra = _average_ranks(a)
    rb = _average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra * rb).sum() / math.sqrt((ra * ra).sum() * (rb * rb).sum()))


def kfold(n: int, k: int, seed: int):
    """Deterministic shuffled k-fold partition: list of (train, test) indices."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i in range(k):
        test = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i])) if k > 1 else test
        out.append((train, test))
    return out


@dataclass
class FeatureSet:
    """Named numeric columns over an aligned sample list."""

    names: list
    values: np.ndarray  # (n, len(names))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != len(self.names):
            raise ValueError("values must be (n_samples, n_columns)")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", v)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def columns(self, names) -> np.ndarray:
        return np.column_stack([self.column(n) for n in names])

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.names) + "\n")
            for row in self.values:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def load_csv(cls, path) -> "FeatureSet":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            rows = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
        return cls(names=header, values=np.asarray(rows, dtype=float))
