"""Weighted linear and logistic regression, plus the Gaussian residual view
of a linear fit used by the continuous separation metric.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

WLS_RIDGE = 1e-8
IRLS_RIDGE = 1e-6
IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100
PROBA_CLIP = 1e-9
SIGMA_FLOOR = 1e-9

# relative threshold on |diag(R)| below which the design is treated as rank deficient
_RANK_RTOL = 1e-10


class SingleClassError(ValueError):
    """Raised when a classifier is asked to fit a target with one class.

    Callers wanting a probability anyway should use the class frequency.
    """


class DegenerateFitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LinearModel:
    coefficients: np.ndarray
    intercept: float
    residual_sigma: float
    ridge_fallback: bool = False

    @property
    def n_features(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class LogisticModel:
    coefficients: np.ndarray
    intercept: float
    converged: bool
    iterations: int

    @property
    def n_features(self) -> int:
        return len(self.coefficients)


def _design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def _check_weights(w, n: int) -> np.ndarray:
    if w is None:
        return np.ones(n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"weights have shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be strictly positive and finite")
    return w


def fit_wls(X, y, w=None) -> LinearModel:
    """Minimize ``sum(w * (y - X @ beta - b)**2)``.

    Solved by QR of the sqrt-weighted design. A rank-deficient design falls
    back to a ridge-regularized normal system (intercept unpenalized) and is
    flagged via ``ridge_fallback``. ``residual_sigma`` is the unweighted RMS
    residual on the training data.
    """
    X = _design(X)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n <= d:
        raise ValueError(f"need more rows than features (n={n}, d={d})")
    w = _check_weights(w, n)

    A = np.column_stack([X, np.ones(n)])
    sw = np.sqrt(w)
    Aw = A * sw[:, None]
    bw = y * sw
    Q, R = np.linalg.qr(Aw)
    diag = np.abs(np.diag(R))
    ridge = diag.min() <= _RANK_RTOL * max(diag.max(), 1.0)
    if not ridge:
        beta = np.linalg.solve(R, Q.T @ bw)
    else:
        penalty = np.full(d + 1, WLS_RIDGE)
        penalty[-1] = 0.0
        beta = np.linalg.solve(Aw.T @ Aw + np.diag(penalty), Aw.T @ bw)

    resid = y - A @ beta
    sigma = math.sqrt(float(np.mean(resid ** 2)))
    return LinearModel(beta[:-1].copy(), float(beta[-1]), sigma, ridge)


def predict_linear(m: LinearModel, X) -> np.ndarray:
    X = _design(X)
    if X.shape[1] != m.n_features:
        raise ValueError(f"X has {X.shape[1]} columns, model expects {m.n_features}")
    return X @ m.coefficients + m.intercept


def _sigmoid(z):
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(X, a, w=None) -> LogisticModel:
    """Weighted maximum-likelihood logistic regression by IRLS.

    Each Newton step solves ``(H + ridge * I) step = gradient``; the ridge only
    damps the step, so the fixed point is the unpenalized MLE. Iteration stops
    once ``max|step| < 1e-8`` or after 100 steps.
    """
    X = _design(X)
    a = np.asarray(a, dtype=float)
    n, d = X.shape
    if a.shape != (n,):
        raise ValueError(f"labels have shape {a.shape}, expected ({n},)")
    if not np.all(np.isin(a, (0.0, 1.0))):
        raise ValueError("logistic labels must be 0 or 1")
    if a.min() == a.max():
        raise SingleClassError(
            "only one class present; use the class frequency as the probability instead"
        )
    if n <= d:
        raise ValueError(f"need more rows than features (n={n}, d={d})")
    w = _check_weights(w, n)

    A = np.column_stack([X, np.ones(n)])
    beta = np.zeros(d + 1)
    damping = IRLS_RIDGE * np.eye(d + 1)
    converged = False
    it = 0
    for it in range(1, IRLS_MAX_ITER + 1):
        p = _sigmoid(A @ beta)
        grad = A.T @ (w * (a - p))
        hess = (A * (w * p * (1.0 - p))[:, None]).T @ A
        step = np.linalg.solve(hess + damping, grad)
        beta = beta + step
        if np.max(np.abs(step)) < IRLS_TOL:
            converged = True
            break
    return LogisticModel(beta[:-1].copy(), float(beta[-1]), converged, it)


def predict_proba(m: LogisticModel, X) -> np.ndarray:
    """P(a = 1 | x), clipped to ``[1e-9, 1 - 1e-9]``."""
    X = _design(X)
    if X.shape[1] != m.n_features:
        raise ValueError(f"X has {X.shape[1]} columns, model expects {m.n_features}")
    z = np.asarray(X @ m.coefficients + m.intercept, dtype=float)
    return np.clip(_sigmoid(z), PROBA_CLIP, 1.0 - PROBA_CLIP)


def _effective_sigma(m: LinearModel) -> float:
    if m.residual_sigma > 0:
        return m.residual_sigma
    warnings.warn(
        f"linear model has zero residual spread; using sigma={SIGMA_FLOOR}",
        DegenerateFitWarning,
        stacklevel=3,
    )
    return SIGMA_FLOOR


def gaussian_conditional_log_density(m: LinearModel, inputs, a) -> np.ndarray:
    """Log N(a; predict_linear(m, inputs), residual_sigma**2), row-wise."""
    sigma = _effective_sigma(m)
    mu = predict_linear(m, inputs)
    r = (np.asarray(a, dtype=float) - mu) / sigma
    return -0.5 * r ** 2 - math.log(sigma) - 0.5 * math.log(2 * math.pi)


def gaussian_conditional_density(m: LinearModel, inputs, a: float) -> float:
    """Gaussian pdf of ``a`` centred at the model's prediction for ``inputs``."""
    x = np.asarray(inputs, dtype=float).reshape(1, -1)
    return float(np.exp(gaussian_conditional_log_density(m, x, [a])[0]))
