"""Nonparametric density estimators: exact-match frequency, radius-neighbor
counting and product-Gaussian KDE.

All estimators are lazy: fitting only stores the reference points.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

EPS = 1e-12
DEFAULT_RADIUS = 0.5
DEFAULT_BANDWIDTH = 0.2

# rows of the reference set processed per block in pairwise scans
_BLOCK = 1024

Kind = Literal["frequency", "neighbor", "kernel"]


@dataclass(frozen=True)
class DensitySpec:
    kind: Kind
    radius: float = DEFAULT_RADIUS
    bandwidth: float = DEFAULT_BANDWIDTH

    def __post_init__(self):
        if self.kind not in ("frequency", "neighbor", "kernel"):
            raise ValueError(f"unknown density estimator {self.kind!r}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")

    @classmethod
    def frequency(cls) -> "DensitySpec":
        return cls("frequency")

    @classmethod
    def neighbor(cls, radius: float = DEFAULT_RADIUS) -> "DensitySpec":
        return cls("neighbor", radius=radius)

    @classmethod
    def kernel(cls, bandwidth: float = DEFAULT_BANDWIDTH) -> "DensitySpec":
        return cls("kernel", bandwidth=bandwidth)

    def to_dict(self) -> dict:
        if self.kind == "neighbor":
            return {"kind": "neighbor", "radius": self.radius}
        if self.kind == "kernel":
            return {"kind": "kernel", "bandwidth": self.bandwidth}
        return {"kind": "frequency"}

    @classmethod
    def from_dict(cls, obj) -> "DensitySpec":
        kind = obj.get("kind", "kernel")
        return cls(kind, radius=float(obj.get("radius", DEFAULT_RADIUS)), bandwidth=float(obj.get("bandwidth", DEFAULT_BANDWIDTH)))


@dataclass(frozen=True)
class DensityModel:
    spec: DensitySpec
    points: np.ndarray
    counts: Counter = field(default_factory=Counter)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __call__(self, queries) -> np.ndarray:
        return eval_many(self, queries)


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"points must be an n x d matrix, got shape {arr.shape}")
    return arr


def fit_density(points, spec: DensitySpec) -> DensityModel:
    """Store ``points`` (n x d, or a 1-d vector treated as n x 1) for ``spec``."""
    pts = _as_points(points)
    if pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError("density estimation needs at least one point of dimension >= 1")
    if not np.all(np.isfinite(pts)):
        raise ValueError("density reference points must be finite")
    pts = pts.copy()
    pts.flags.writeable = False
    counts = Counter(map(tuple, pts.tolist())) if spec.kind == "frequency" else Counter()
    return DensityModel(spec, pts, counts)


def eval_density(model: DensityModel, query) -> float:
    """Density (or neighbor count) of a single d-dimensional query."""
    q = np.asarray(query, dtype=float).reshape(-1)
    if q.shape[0] != model.dim:
        raise ValueError(f"query has dimension {q.shape[0]}, model has {model.dim}")
    return float(eval_many(model, q[None, :])[0])


def eval_many(model: DensityModel, queries) -> np.ndarray:
    """Vectorized :func:`eval_density` over the rows of ``queries``."""
    qs = _as_points(queries)
    if qs.shape[1] != model.dim:
        raise ValueError(f"queries have dimension {qs.shape[1]}, model has {model.dim}")
    kind = model.spec.kind
    if kind == "frequency":
        out = np.array([model.counts.get(tuple(row), 0) for row in qs.tolist()], dtype=float) / model.n
        return np.maximum(out, EPS)
    if kind == "neighbor":
        return _neighbor_counts(model.points, qs, model.spec.radius)
    return np.maximum(_gaussian_kde(model.points, qs, model.spec.bandwidth), EPS)


def _neighbor_counts(points: np.ndarray, queries: np.ndarray, radius: float) -> np.ndarray:
    out = np.zeros(len(queries))
    for start in range(0, len(queries), _BLOCK):
        q = queries[start:start + _BLOCK]
        dist = np.sqrt(np.sum((q[:, None, :] - points[None, :, :]) ** 2, axis=2))
        out[start:start + _BLOCK] = np.count_nonzero(dist < radius, axis=1)
    return out


def _gaussian_kde(points: np.ndarray, queries: np.ndarray, h: float) -> np.ndarray:
    n, d = points.shape
    norm = n * (h * math.sqrt(2 * math.pi)) ** d
    out = np.zeros(len(queries))
    for start in range(0, len(queries), _BLOCK):
        q = queries[start:start + _BLOCK]
        z2 = np.sum(((q[:, None, :] - points[None, :, :]) / h) ** 2, axis=2)
        out[start:start + _BLOCK] = np.exp(-0.5 * z2).sum(axis=1)
    return out / norm
