"""Density-ratio sample reweighing towards separation.

Each training row gets ``w = rho(a) * rho(y) / rho(a, y)`` where the three
densities come from one estimator fit on the sensitive column(s), the target
and their concatenation. With exact frequency counts on discrete data this
is the classic reweighing scheme.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import ColumnKind, Dataset, DataError
from .density import DensitySpec, fit_density

WEIGHT_CAP = 1e6


class WeightCapWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WeighingConfig:
    """Which columns to balance and how to estimate densities.

    ``sensitive=None`` / ``target=None`` take the columns from the dataset's
    schema. Several sensitive columns are balanced jointly.
    """

    estimator: DensitySpec = field(default_factory=DensitySpec.kernel)
    sensitive: Sequence[str] | None = None
    target: str | None = None
    standardize_before_density: bool = True
    normalize_weights: bool = True

    def __post_init__(self):
        if self.sensitive is not None:
            object.__setattr__(self, "sensitive", tuple(self.sensitive))
            if not self.sensitive:
                raise ValueError("at least one sensitive column is required")
            if self.target is not None and self.target in self.sensitive:
                raise ValueError("target cannot also be a sensitive column")

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator.to_dict(),
            "sensitive": list(self.sensitive) if self.sensitive is not None else None,
            "target": self.target,
            "standardize_before_density": self.standardize_before_density,
            "normalize_weights": self.normalize_weights,
        }

    @classmethod
    def from_dict(cls, obj) -> "WeighingConfig":
        return cls(
            estimator=DensitySpec.from_dict(obj.get("estimator", {})),
            sensitive=obj.get("sensitive"),
            target=obj.get("target"),
            standardize_before_density=bool(obj.get("standardize_before_density", True)),
            normalize_weights=bool(obj.get("normalize_weights", True)),
        )


def _zscore(v: np.ndarray) -> np.ndarray:
    sd = v.std()
    return (v - v.mean()) / (sd if sd > 0 else 1.0)


def density_ratio_weights(A, y, spec: DensitySpec, normalize: bool = True) -> np.ndarray:
    """``rho(a_i) * rho(y_i) / rho(a_i, y_i)`` for every row.

    ``A`` is ``n x k`` (or a length-n vector), ``y`` length n. No rescaling of
    the inputs happens here.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    if len(A) != len(y):
        raise ValueError("sensitive and target lengths differ")
    AY = np.hstack([A, y])
    rho_a = fit_density(A, spec)(A)
    rho_y = fit_density(y, spec)(y)
    rho_ay = fit_density(AY, spec)(AY)
    w = rho_a * rho_y / rho_ay
    capped = w > WEIGHT_CAP
    if capped.any():
        warnings.warn(
            f"{int(capped.sum())} weights exceeded {WEIGHT_CAP:g} and were capped",
            WeightCapWarning,
            stacklevel=2,
        )
        w = np.minimum(w, WEIGHT_CAP)
    if normalize:
        w = w / w.mean()
    return w


def fair_reweigh(ds: Dataset, cfg: WeighingConfig = WeighingConfig()) -> np.ndarray:
    """Per-row weights for ``ds`` (normally the training split).

    When ``cfg.standardize_before_density`` is set and the estimator is not
    frequency counting, the target and continuous sensitive columns are
    z-scored with this dataset's own statistics before density fitting.
    """
    sensitive = list(cfg.sensitive) if cfg.sensitive is not None else ds.schema.sensitive
    target = cfg.target or ds.schema.target
    if not sensitive:
        raise DataError("no sensitive columns to reweigh on")
    if target in sensitive:
        raise DataError("target cannot also be a sensitive column")
    scale = cfg.standardize_before_density and cfg.estimator.kind != "frequency"

    cols = []
    for name in sensitive:
        v = ds[name]
        if scale and ds.schema.kind(name) is ColumnKind.SENSITIVE_CONTINUOUS:
            v = _zscore(v)
        cols.append(v)
    y = _zscore(ds[target]) if scale else ds[target]
    return density_ratio_weights(np.column_stack(cols), y, cfg.estimator, cfg.normalize_weights)


def classic_reweigh(ds: Dataset, sensitive: str, target: str) -> np.ndarray:
    """Frequency-count weights ``P(a) P(y) / P(a, y)`` for discrete columns."""
    a, y = ds[sensitive], ds[target]
    n = len(a)
    _, a_idx, a_counts = np.unique(a, return_inverse=True, return_counts=True)
    _, y_idx, y_counts = np.unique(y, return_inverse=True, return_counts=True)
    _, ay_idx, ay_counts = np.unique(np.column_stack([a, y]), axis=0, return_inverse=True, return_counts=True)
    p_a = a_counts[a_idx.reshape(-1)] / n
    p_y = y_counts[y_idx.reshape(-1)] / n
    p_ay = ay_counts[ay_idx.reshape(-1)] / n
    return p_a * p_y / p_ay


# -- exact check on explicit discrete distributions ---------------------------

def joint_reweighing_weights(joint) -> np.ndarray:
    """``W(a, y) = P(a) P(y) / P(a, y)`` from an explicit ``P(x, a, y)`` array.

    Cells with ``P(a, y) = 0`` carry no mass and get weight 1.
    """
    P = np.asarray(joint, dtype=float)
    p_ay = P.sum(axis=0)
    p_a = p_ay.sum(axis=1, keepdims=True)
    p_y = p_ay.sum(axis=0, keepdims=True)
    W = np.ones_like(p_ay)
    mask = p_ay > 0
    W[mask] = (p_a * p_y)[mask] / p_ay[mask]
    return W


def _cond_indep_gap(P: np.ndarray) -> float:
    p_xy = P.sum(axis=1)
    p_ay = P.sum(axis=0)
    p_y = P.sum(axis=(0, 1))
    safe = np.where(p_y > 0, p_y, 1.0)
    product = p_xy[:, None, :] * p_ay[None, :, :] / safe[None, None, :]
    return float(np.max(np.abs(P - product)))


def discrete_separation_check(joint, weights) -> float:
    """Largest separation gap of the weighted Bayes predictor on ``joint``.

    ``joint[x, a, y]`` is an explicit distribution with ``X`` independent of
    ``A`` given ``Y``; ``weights[a, y]`` are per-cell training weights. The
    predictor is ``P(y_hat | x, a)`` proportional to ``P(y_hat, x, a) W(a, y_hat)``
    over the target's support. Returns ``max |P(y_hat | a, y) - P(y_hat | y)|``
    over cells with positive mass.
    """
    P = np.asarray(joint, dtype=float)
    W = np.asarray(weights, dtype=float)
    if P.ndim != 3:
        raise ValueError("joint must be a 3-d array indexed [x, a, y]")
    if W.shape != P.shape[1:]:
        raise ValueError(f"weights have shape {W.shape}, expected {P.shape[1:]}")
    if np.any(P < 0) or abs(P.sum() - 1.0) > 1e-9:
        raise ValueError("joint must be non-negative and sum to 1")
    if _cond_indep_gap(P) > 1e-9:
        raise ValueError("joint violates X independent of A given Y")

    # predictor[x, a, y_hat]
    scores = P * W[None, :, :]
    totals = scores.sum(axis=2, keepdims=True)
    predictor = np.divide(scores, totals, out=np.zeros_like(scores), where=totals > 0)

    p_ay = P.sum(axis=0)
    p_y = P.sum(axis=(0, 1))
    gap = 0.0
    for y in range(P.shape[2]):
        if p_y[y] == 0:
            continue
        # P(y_hat | y) = sum_{x,a} predictor[x,a,:] P(x,a | y)
        given_y = np.tensordot(P[:, :, y], predictor, axes=([0, 1], [0, 1])) / p_y[y]
        for a in range(P.shape[1]):
            if p_ay[a, y] == 0:
                continue
            given_ay = P[:, a, y] @ predictor[:, a, :] / p_ay[a, y]
            gap = max(gap, float(np.max(np.abs(given_ay - given_y))))
    return gap
