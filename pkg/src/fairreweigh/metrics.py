"""Accuracy and separation metrics for regression and classification.

The separation metrics compare a model of the sensitive attribute given
``(y, y_hat)`` against one given ``y`` alone, both fit in-sample on the
triples being scored:

* ``r_sep``: mean product of the two odds ratios (binary attribute).
* ``i_sep``: mean log-ratio of classifier probabilities (binary or
  categorical attribute).
* ``c_sep``: mean log-ratio of Gaussian residual densities from two linear
  fits (any real-valued attribute).

Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.stats import rankdata

from .models import (
    SingleClassError,
    fit_logistic,
    fit_wls,
    gaussian_conditional_log_density,
    predict_proba,
)


def _vec(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(-1)


def _pair(y, y_hat):
    y, y_hat = _vec(y), _vec(y_hat)
    if len(y) != len(y_hat):
        raise ValueError(f"length mismatch: {len(y)} vs {len(y_hat)}")
    if len(y) == 0:
        raise ValueError("need at least one sample")
    return y, y_hat


def mse(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.mean((y - y_hat) ** 2))


def r2(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if len(y) < 2 or ss_tot == 0.0:
        raise ValueError("R^2 is undefined for constant or single-sample targets")
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot


def bgl(y, y_hat, a) -> float:
    """Bounded group loss: the largest per-group MSE."""
    y, y_hat = _pair(y, y_hat)
    a = _vec(a)
    if len(a) != len(y):
        raise ValueError("sensitive attribute length mismatch")
    return max(mse(y[a == g], y_hat[a == g]) for g in np.unique(a))


# -- conditioning designs for the metric classifiers ------------------------

def _standardized(cols) -> np.ndarray:
    X = np.column_stack(cols)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - X.mean(axis=0)) / sd


def _cell_dummies(cols) -> np.ndarray:
    """Drop-first one-hot encoding of the joint value cell of ``cols``.

    A logistic fit on this design is saturated, so its probabilities equal
    the empirical conditional frequencies in each cell.
    """
    keys = np.column_stack(cols)
    _, cell = np.unique(keys, axis=0, return_inverse=True)
    cell = cell.reshape(-1)
    n_cells = int(cell.max()) + 1
    D = np.zeros((len(cell), n_cells))
    D[np.arange(len(cell)), cell] = 1.0
    return D[:, 1:]


def _designs(y, y_hat, discrete_inputs: bool):
    build = _cell_dummies if discrete_inputs else _standardized
    return build([y, y_hat]), build([y])


def _binary_proba(X, a) -> np.ndarray:
    return predict_proba(fit_logistic(X, a), X)


def _check_binary(a) -> np.ndarray:
    a = _vec(a)
    if not np.all(np.isin(a, (0.0, 1.0))):
        raise ValueError("r_sep needs a binary {0, 1} sensitive attribute")
    if a.min() == a.max():
        raise SingleClassError("sensitive attribute has a single class")
    return a


def r_sep(y, y_hat, a, discrete_inputs: bool = False) -> float:
    """Density-ratio separation estimate for a binary attribute; 1 is fair.

    ``discrete_inputs`` treats ``y`` and ``y_hat`` as categorical and uses
    saturated classifiers (exact conditional frequencies).
    """
    y, y_hat = _pair(y, y_hat)
    a = _check_binary(a)
    X_full, X_y = _designs(y, y_hat, discrete_inputs)
    p_full = _binary_proba(X_full, a)
    p_y = _binary_proba(X_y, a)
    return float(np.mean(p_full / (1.0 - p_full) * (1.0 - p_y) / p_y))


def _class_proba(X, a) -> np.ndarray:
    """Probability assigned to each row's observed class.

    Two classes use one logistic fit; more use one-vs-rest fits with the
    per-row probabilities renormalized to sum to one.
    """
    classes, idx = np.unique(a, return_inverse=True)
    idx = idx.reshape(-1)
    if len(classes) < 2:
        raise SingleClassError("sensitive attribute has a single class")
    if len(classes) == 2:
        p1 = _binary_proba(X, (idx == 1).astype(float))
        return np.where(idx == 1, p1, 1.0 - p1)
    P = np.column_stack([_binary_proba(X, (idx == k).astype(float)) for k in range(len(classes))])
    P /= P.sum(axis=1, keepdims=True)
    return P[np.arange(len(idx)), idx]


def i_sep(y, y_hat, a, discrete_inputs: bool = False) -> float:
    """Conditional-MI separation estimate for a discrete attribute; 0 is fair."""
    y, y_hat = _pair(y, y_hat)
    a = _vec(a)
    X_full, X_y = _designs(y, y_hat, discrete_inputs)
    q_full = _class_proba(X_full, a)
    q_y = _class_proba(X_y, a)
    return float(np.mean(np.log(q_full) - np.log(q_y)))


def c_sep(y, y_hat, a) -> float:
    """Continuous conditional-MI separation estimate; 0 is fair.

    Two unweighted least-squares fits predict ``a``: one from ``(y, y_hat)``
    and one from ``y``. Each row is scored under a Gaussian centred on the
    fit with the fit's RMS residual as spread. The sign of the result is
    meaningful and may be negative.
    """
    y, y_hat = _pair(y, y_hat)
    a = _vec(a)
    if len(a) != len(y):
        raise ValueError("sensitive attribute length mismatch")
    X_full = np.column_stack([y, y_hat])
    X_y = y[:, None]
    f_full = fit_wls(X_full, a)
    f_y = fit_wls(X_y, a)
    log_full = gaussian_conditional_log_density(f_full, X_full, a)
    log_y = gaussian_conditional_log_density(f_y, X_y, a)
    return float(np.mean(log_full - log_y))


def _rates(y, y_hat):
    pos, neg = y == 1, y == 0
    tpr = float(np.mean(y_hat[pos] == 1)) if pos.any() else None
    fpr = float(np.mean(y_hat[neg] == 1)) if neg.any() else None
    return tpr, fpr


def classification_metrics(y, y_hat, a=None) -> dict[str, float]:
    """Accuracy, F1 and, when both groups see both classes, AOD and EOD.

    ``eod = |TPR_0 - TPR_1|`` and ``aod = (|FPR_0 - FPR_1| + |TPR_0 - TPR_1|) / 2``.
    Undefined entries are left out of the result.
    """
    y, y_hat = _pair(y, y_hat)
    out = {"accuracy": float(np.mean(y == y_hat))}
    tp = np.sum((y == 1) & (y_hat == 1))
    fp = np.sum((y == 0) & (y_hat == 1))
    fn = np.sum((y == 1) & (y_hat == 0))
    if 2 * tp + fp + fn > 0:
        out["f1"] = float(2 * tp / (2 * tp + fp + fn))
    if a is None:
        return out
    a = _vec(a)
    groups = [a == 0, a == 1]
    if not all(g.any() for g in groups):
        return out
    (tpr0, fpr0), (tpr1, fpr1) = (_rates(y[g], y_hat[g]) for g in groups)
    if tpr0 is not None and tpr1 is not None:
        out["eod"] = abs(tpr0 - tpr1)
        if fpr0 is not None and fpr1 is not None:
            out["aod"] = 0.5 * (abs(fpr0 - fpr1) + abs(tpr0 - tpr1))
    return out


def pearson(u, v) -> float:
    u, v = _pair(u, v)
    if len(u) < 2:
        raise ValueError("correlation needs at least two samples")
    du, dv = u - u.mean(), v - v.mean()
    su, sv = math.sqrt(float(du @ du)), math.sqrt(float(dv @ dv))
    if su == 0 or sv == 0:
        raise ValueError("correlation is undefined for a constant vector")
    return float(np.clip((du @ dv) / (su * sv), -1.0, 1.0))


def spearman(u, v) -> float:
    u, v = _pair(u, v)
    return pearson(rankdata(u), rankdata(v))


# -- reports ---------------------------------------------------------------

@dataclass
class MetricReport:
    """Overall metrics plus per-sensitive-attribute fairness metrics."""

    overall: dict[str, float] = field(default_factory=dict)
    attributes: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {**self.overall, "attributes": {k: dict(v) for k, v in self.attributes.items()}}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "MetricReport":
        overall = {k: float(v) for k, v in obj.items() if k != "attributes"}
        attrs = {k: {m: float(x) for m, x in v.items()} for k, v in obj.get("attributes", {}).items()}
        return cls(overall, attrs)

    def flat(self) -> dict[str, float]:
        """Single-level mapping with keys like ``mse`` or ``gender.r_sep``."""
        out = dict(self.overall)
        for attr, vals in self.attributes.items():
            for name, value in vals.items():
                out[f"{attr}.{name}"] = value
        return out


def _try(fn, *args, **kwargs):
    try:
        value = fn(*args, **kwargs)
    except (ValueError, np.linalg.LinAlgError):
        return None
    return value if math.isfinite(value) else None


def _put(d, key, value):
    if value is not None:
        d[key] = value


def score(y, y_hat, sensitive: Mapping[str, tuple[np.ndarray, str]], task: str = "regression") -> MetricReport:
    """Compute every applicable metric.

    ``sensitive`` maps attribute name to ``(values, kind)`` with kind one of
    ``binary``, ``categorical`` or ``continuous``. Metrics that cannot be
    computed (for example a test split with one group) are omitted.
    """
    y, y_hat = _pair(y, y_hat)
    report = MetricReport()
    discrete_inputs = task == "classification"
    if task == "regression":
        report.overall["mse"] = mse(y, y_hat)
        _put(report.overall, "r2", _try(r2, y, y_hat))
    elif task == "classification":
        report.overall.update(classification_metrics(y, y_hat))
    else:
        raise ValueError(f"unknown task {task!r}")

    for name, (a, kind) in sensitive.items():
        a = _vec(a)
        vals: dict[str, float] = {}
        if kind in ("binary", "categorical") and task == "regression":
            _put(vals, "bgl", _try(bgl, y, y_hat, a))
        if kind == "binary":
            if task == "classification":
                cm = classification_metrics(y, y_hat, a)
                for key in ("aod", "eod"):
                    _put(vals, key, cm.get(key))
            _put(vals, "r_sep", _try(r_sep, y, y_hat, a, discrete_inputs))
        if kind in ("binary", "categorical"):
            _put(vals, "i_sep", _try(i_sep, y, y_hat, a, discrete_inputs))
        if kind in ("binary", "continuous"):
            _put(vals, "c_sep", _try(c_sep, y, y_hat, a))
        report.attributes[name] = vals
    return report
