"""Deterministic synthetic data.

The vertical-jump generator draws, per row::

    gender ~ Bernoulli(0.7)
    age    ~ Normal(40, 15), redrawn while age <= 1
    height ~ Normal(1.75, 0.15) if gender else Normal(1.65, 0.10)
    power  ~ Normal(0.60, 0.15) if gender else Normal(0.50, 0.10)
    jump   = (height + power) * 40 / age

``power`` is hidden: it shapes ``jump`` but is not emitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .data import ColumnKind, Dataset, Schema

P_MALE = 0.7
AGE_MEAN, AGE_SD, AGE_MIN = 40.0, 15.0, 1.0
HEIGHT = {1: (1.75, 0.15), 0: (1.65, 0.10)}
POWER = {1: (0.60, 0.15), 0: (0.50, 0.10)}

JUMP_SCHEMA = Schema(
    (
        ("height", ColumnKind.FEATURE),
        ("gender", ColumnKind.SENSITIVE_BINARY),
        ("age", ColumnKind.SENSITIVE_CONTINUOUS),
        ("jump", ColumnKind.TARGET),
    )
)


@dataclass(frozen=True)
class SynthSpec:
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _jump_columns(rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    gender = (rng.random(n) < P_MALE).astype(float)
    age = rng.normal(AGE_MEAN, AGE_SD, n)
    bad = age <= AGE_MIN
    while bad.any():
        age[bad] = rng.normal(AGE_MEAN, AGE_SD, int(bad.sum()))
        bad = age <= AGE_MIN
    male = gender == 1
    height = np.where(male, HEIGHT[1][0], HEIGHT[0][0]) + np.where(male, HEIGHT[1][1], HEIGHT[0][1]) * rng.standard_normal(n)
    power = np.where(male, POWER[1][0], POWER[0][0]) + np.where(male, POWER[1][1], POWER[0][1]) * rng.standard_normal(n)
    jump = (height + power) * 40.0 / age
    return {"gender": gender, "age": age, "height": height, "power": power, "jump": jump}


def generate_jump(spec: SynthSpec | int, seed: int | None = None) -> Dataset:
    """The vertical-jump dataset: ``height`` feature, ``gender``/``age`` sensitive, ``jump`` target."""
    if not isinstance(spec, SynthSpec):
        spec = SynthSpec(int(spec), 0 if seed is None else seed)
    cols = _jump_columns(_rng(spec.seed), spec.n)
    del cols["power"]
    return Dataset.from_columns(JUMP_SCHEMA, cols)


# -- conditionally independent discrete populations ---------------------------

def _check_table(t, name: str, rows: int | None = None) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.allclose(t.sum(axis=-1), 1.0, atol=1e-12, rtol=0):
        raise ValueError(f"{name} must be non-negative and normalized along its last axis")
    if rows is not None and t.shape[0] != rows:
        raise ValueError(f"{name} needs one row per target value ({rows}), got {t.shape[0]}")
    return t


COND_INDEP_SCHEMA = Schema(
    (("x", ColumnKind.FEATURE), ("a", ColumnKind.SENSITIVE_CATEGORICAL), ("y", ColumnKind.TARGET))
)


def generate_cond_indep(p_y, p_x_given_y, p_a_given_y, n: int | None = None, seed: int = 0):
    """Population with ``X`` independent of ``A`` given ``Y``.

    ``p_x_given_y[y, x]`` and ``p_a_given_y[y, a]`` are row-normalized tables.
    With ``n=None`` return the exact joint array indexed ``[x, a, y]``;
    otherwise draw ``n`` rows as a :class:`Dataset` with integer codes.
    """
    p_y = _check_table(p_y, "p_y")
    px = _check_table(p_x_given_y, "p_x_given_y", len(p_y))
    pa = _check_table(p_a_given_y, "p_a_given_y", len(p_y))
    joint = np.einsum("y,yx,ya->xay", p_y, px, pa)
    if n is None:
        return joint
    rng = _rng(seed)
    y = rng.choice(len(p_y), size=n, p=p_y)
    # inverse-CDF draws from each row's conditional table
    x = (rng.random(n)[:, None] > np.cumsum(px, axis=1)[y]).sum(axis=1)
    a = (rng.random(n)[:, None] > np.cumsum(pa, axis=1)[y]).sum(axis=1)
    x = np.minimum(x, px.shape[1] - 1)
    a = np.minimum(a, pa.shape[1] - 1)
    return Dataset.from_columns(COND_INDEP_SCHEMA, {"x": x, "a": a, "y": y})


def random_cond_indep_joint(rng: np.random.Generator, n_x: int = 3, n_a: int = 2, n_y: int = 2) -> np.ndarray:
    """Random exact joint ``[x, a, y]`` with Dirichlet(1) tables."""
    p_y = rng.dirichlet(np.ones(n_y))
    px = rng.dirichlet(np.ones(n_x), size=n_y)
    pa = rng.dirichlet(np.ones(n_a), size=n_y)
    return generate_cond_indep(p_y, px, pa)


# -- Monte-Carlo ground truth for the jump densities ------------------------

@dataclass(frozen=True)
class JumpGroundTruth:
    """Histogram densities of ``jump`` from a large Monte-Carlo sample.

    Bins are equal-width in ``log(jump)`` between the sample extremes, so the
    bulk is finely resolved while the long right tail is still covered.
    ``by_gender[g]`` holds ``p(jump | gender=g)``.
    """

    edges: np.ndarray
    marginal: np.ndarray
    by_gender: tuple[np.ndarray, np.ndarray]

    def _lookup(self, hist: np.ndarray, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        idx = np.searchsorted(self.edges, v, side="right") - 1
        # the top edge belongs to the last bin
        idx = np.where(v == self.edges[-1], len(hist) - 1, idx)
        inside = (idx >= 0) & (idx < len(hist))
        out = np.zeros(v.shape)
        out[inside] = hist[idx[inside]]
        return out

    def density_y(self, values) -> np.ndarray:
        return self._lookup(self.marginal, values)

    def density_gender_y(self, gender, values) -> np.ndarray:
        """Mixed joint density ``P(gender) * p(jump | gender)``."""
        g = np.asarray(gender, dtype=float)
        out = np.where(
            g == 1,
            P_MALE * self._lookup(self.by_gender[1], values),
            (1 - P_MALE) * self._lookup(self.by_gender[0], values),
        )
        return out

    @staticmethod
    def p_gender(g: int) -> float:
        return P_MALE if g == 1 else 1.0 - P_MALE


@lru_cache(maxsize=4)
def true_densities_jump(n_samples: int = 10_000_000, bins: int = 512, seed: int = 20240101, chunk: int = 1_000_000) -> JumpGroundTruth:
    """Reference densities for ``jump`` (no closed form exists)."""

    def chunks():
        rng = _rng(seed)
        left = n_samples
        while left > 0:
            m = min(chunk, left)
            cols = _jump_columns(rng, m)
            yield cols["gender"], cols["jump"]
            left -= m

    lo, hi = np.inf, -np.inf
    for _, j in chunks():
        lo, hi = min(lo, j.min()), max(hi, j.max())
    edges = np.exp(np.linspace(np.log(lo), np.log(hi), bins + 1))
    edges[0], edges[-1] = lo, hi
    counts = np.zeros(bins)
    by_g = [np.zeros(bins), np.zeros(bins)]
    for g, j in chunks():
        counts += np.histogram(j, bins=edges)[0]
        for k in (0, 1):
            by_g[k] += np.histogram(j[g == k], bins=edges)[0]
    widths = np.diff(edges)
    marginal = counts / (counts.sum() * widths)
    cond = tuple(c / (c.sum() * widths) for c in by_g)
    return JumpGroundTruth(edges, marginal, cond)
