"""Naive reference implementations.

These are intentionally simple and slow. They share no code paths with the
estimators they check, so tests and harness diagnostics can compare the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class DiscreteJoint:
    """Explicit distribution ``probs[y, y_hat, a]`` with value labels per axis."""

    probs: np.ndarray
    y_values: tuple = ()
    y_hat_values: tuple = ()
    a_values: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 3:
            raise ValueError("joint must be a 3-d array indexed [y, y_hat, a]")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("joint entries must be non-negative and sum to 1")
        object.__setattr__(self, "probs", p)
        for attr, size in zip(("y_values", "y_hat_values", "a_values"), p.shape):
            vals = tuple(getattr(self, attr)) or tuple(range(size))
            if len(vals) != size:
                raise ValueError(f"{attr} needs {size} labels")
            object.__setattr__(self, attr, vals)

    def sample(self, n: int, rng: np.random.Generator):
        """Draw ``n`` iid ``(y, y_hat, a)`` triples as three float arrays."""
        flat = rng.choice(self.probs.size, size=n, p=self.probs.reshape(-1))
        iy, iyh, ia = np.unravel_index(flat, self.probs.shape)
        return (
            np.asarray(self.y_values, dtype=float)[iy],
            np.asarray(self.y_hat_values, dtype=float)[iyh],
            np.asarray(self.a_values, dtype=float)[ia],
        )


def exact_conditional_mi(j: DiscreteJoint) -> float:
    """``I[Y_hat; A | Y]`` by full enumeration; zero-mass terms contribute 0."""
    P = j.probs
    total = 0.0
    for y in range(P.shape[0]):
        p_y = P[y].sum()
        if p_y == 0:
            continue
        for yh in range(P.shape[1]):
            p_yh_y = P[y, yh, :].sum() / p_y
            for a in range(P.shape[2]):
                p = P[y, yh, a]
                if p == 0:
                    continue
                p_a_y = P[y, :, a].sum() / p_y
                total += p * math.log((p / p_y) / (p_yh_y * p_a_y))
    # negative only through rounding
    return max(total, 0.0)


def exact_r_sep(j: DiscreteJoint) -> float:
    """Population value of the odds-ratio separation statistic.

    ``sum P(y, y_hat) * odds(a=1 | y, y_hat) / odds(a=1 | y)`` with the odds
    taken from exact conditionals. ``a`` must have exactly two values with
    the second playing the role of ``a = 1``.
    """
    P = j.probs
    if P.shape[2] != 2:
        raise ValueError("r_sep needs a binary sensitive attribute")
    total = 0.0
    for y in range(P.shape[0]):
        p1_y = P[y, :, 1].sum() / P[y].sum()
        for yh in range(P.shape[1]):
            p_cell = P[y, yh].sum()
            if p_cell == 0:
                continue
            p1 = P[y, yh, 1] / p_cell
            total += p_cell * (p1 / (1 - p1)) * ((1 - p1_y) / p1_y)
    return total


def gaussian_conditional_mi(cov) -> float:
    """``I[Y_hat; A | Y]`` for jointly Gaussian ``(y, y_hat, a)``.

    Equals ``0.5 * log(var(a | y) / var(a | y, y_hat))`` via Schur complements.
    """
    S = np.asarray(cov, dtype=float)
    if S.shape != (3, 3) or not np.allclose(S, S.T):
        raise ValueError("covariance must be a symmetric 3 x 3 matrix")
    if np.linalg.eigvalsh(S).min() <= 0:
        raise ValueError("covariance must be positive definite")
    var_a_given_y = S[2, 2] - S[2, 0] ** 2 / S[0, 0]
    B = S[:2, :2]
    c = S[:2, 2]
    var_a_given_both = S[2, 2] - c @ np.linalg.solve(B, c)
    return 0.5 * math.log(var_a_given_y / var_a_given_both)


def naive_neighbor_count(points, query, r: float) -> int:
    """Count reference rows strictly within Euclidean distance ``r`` of ``query``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    q = [float(v) for v in np.atleast_1d(np.asarray(query, dtype=float))]
    if len(q) != pts.shape[1]:
        raise ValueError(f"query has dimension {len(q)}, points have {pts.shape[1]}")
    count = 0
    for row in pts.tolist():
        s = 0.0
        for u, v in zip(q, row):
            s += (u - v) ** 2
        if math.sqrt(s) < r:
            count += 1
    return count


def naive_neighbor_weights(A, y, r: float) -> np.ndarray:
    """Radius-neighbor reweighing weights from literal pairwise counting, unnormalized."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    AY = np.hstack([A, y])
    out = np.empty(len(y))
    for i in range(len(y)):
        n_a = naive_neighbor_count(A, A[i], r)
        n_y = naive_neighbor_count(y, y[i], r)
        n_ay = naive_neighbor_count(AY, AY[i], r)
        out[i] = n_a * n_y / n_ay
    return out


def _gauss_jordan_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``M x = b`` by Gauss-Jordan elimination with partial pivoting."""
    n = len(b)
    aug = [list(map(float, M[i])) + [float(b[i])] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        if pv == 0:
            raise ValueError("singular system")
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
    return np.array([aug[i][n] for i in range(n)])


def naive_ols(X, y, w=None) -> tuple[np.ndarray, float]:
    """Weighted least squares through the normal equations; returns ``(coef, intercept)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    w = np.ones(len(y)) if w is None else np.asarray(w, dtype=float)
    A = np.column_stack([X, np.ones(len(y))])
    d = A.shape[1]
    M = np.zeros((d, d))
    b = np.zeros(d)
    for i in range(len(y)):
        M += w[i] * np.outer(A[i], A[i])
        b += w[i] * A[i] * y[i]
    beta = _gauss_jordan_solve(M, b)
    return beta[:-1], float(beta[-1])


def naive_logistic(X, a, w=None) -> tuple[np.ndarray, float]:
    """Weighted logistic MLE by quasi-Newton minimization of the negative log-likelihood."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    a = np.asarray(a, dtype=float)
    w = np.ones(len(a)) if w is None else np.asarray(w, dtype=float)
    A = np.column_stack([X, np.ones(len(a))])

    def nll(beta):
        z = A @ beta
        return float(np.sum(w * (np.logaddexp(0.0, z) - a * z)))

    def grad(beta):
        p = 1.0 / (1.0 + np.exp(-(A @ beta)))
        return A.T @ (w * (p - a))

    res = minimize(nll, np.zeros(A.shape[1]), jac=grad, method="BFGS", options={"gtol": 1e-10, "maxiter": 10_000})
    return res.x[:-1], float(res.x[-1])


def duplicate_rows(counts, *arrays):
    """Repeat row ``i`` of every array ``counts[i]`` times."""
    counts = np.asarray(counts, dtype=int)
    return tuple(np.repeat(np.asarray(arr), counts, axis=0) for arr in arrays)
