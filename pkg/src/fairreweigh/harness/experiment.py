"""Repeated split / reweigh / fit / score experiments."""

from __future__ import annotations

import json
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from ..data import ColumnKind, Dataset, Schema, fit_standardizer, load_csv, split
from ..metrics import MetricReport, score
from ..models import fit_logistic, fit_wls, predict_linear, predict_proba
from ..reweighing import WeighingConfig, classic_reweigh, fair_reweigh
from ..synth import SynthSpec, generate_jump

THREADS_ENV = "FAIRREWEIGH_THREADS"
CLASSIFICATION_THRESHOLD = 0.5


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Treatment:
    """``none``, ``fair_reweighing`` (with a weighing config) or ``classic_reweighing``."""

    kind: Literal["none", "fair_reweighing", "classic_reweighing"] = "none"
    weighing: WeighingConfig | None = None
    sensitive: str | None = None  # classic reweighing only
    label: str | None = None

    def __post_init__(self):
        if self.kind not in ("none", "fair_reweighing", "classic_reweighing"):
            raise ConfigError(f"unknown treatment {self.kind!r}")
        if self.kind == "fair_reweighing" and self.weighing is None:
            object.__setattr__(self, "weighing", WeighingConfig())

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "fair_reweighing":
            return f"FairReweighing ({self.weighing.estimator.kind})"
        if self.kind == "classic_reweighing":
            return "Reweighing"
        return "None"

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.weighing is not None:
            out.update(self.weighing.to_dict())
        if self.sensitive is not None:
            out["sensitive"] = self.sensitive
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, obj) -> "Treatment":
        if isinstance(obj, str):
            obj = {"kind": obj}
        kind = obj.get("kind", "none")
        if kind == "fair_reweighing":
            return cls(kind, WeighingConfig.from_dict(obj), label=obj.get("label"))
        if kind == "classic_reweighing":
            return cls(kind, sensitive=obj.get("sensitive"), label=obj.get("label"))
        return cls(kind, label=obj.get("label"))


@dataclass(frozen=True)
class ExperimentConfig:
    csv: str | None = None
    schema: str | None = None
    synth: SynthSpec | None = None
    treatment: Treatment = field(default_factory=Treatment)
    task: Literal["regression", "classification"] = "regression"
    train_fraction: float = 0.5
    iterations: int = 20
    seed: int = 0
    include_sensitive_as_feature: bool = True
    output: str | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.task not in ("regression", "classification"):
            raise ConfigError(f"unknown task {self.task!r}")
        if self.synth is None and (self.csv is None or self.schema is None):
            raise ConfigError("config needs either a synth spec or both csv and schema paths")

    def load_dataset(self) -> Dataset:
        if self.synth is not None:
            return generate_jump(self.synth)
        return load_csv(self.csv, Schema.from_json(self.schema))

    def to_dict(self) -> dict:
        data = {"synth": {"n": self.synth.n, "seed": self.synth.seed}} if self.synth else {"csv": self.csv, "schema": self.schema}
        return {
            "data": data,
            "treatment": self.treatment.to_dict(),
            "task": self.task,
            "train_fraction": self.train_fraction,
            "iterations": self.iterations,
            "seed": self.seed,
            "include_sensitive_as_feature": self.include_sensitive_as_feature,
            "output": self.output,
        }


def configs_from_dict(obj, base_dir: str | Path = ".") -> list[ExperimentConfig]:
    """Parse a config object; ``treatments`` (a list) expands to one config each.

    Relative data paths resolve against ``base_dir``.
    """
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    data = obj.get("data")
    if not isinstance(data, dict):
        raise ConfigError("config needs a 'data' object")
    base = Path(base_dir)

    def resolve(p):
        return None if p is None else str(p if Path(p).is_absolute() else base / p)

    synth = None
    if "synth" in data:
        s = data["synth"]
        synth = SynthSpec(int(s.get("n", 5000)), int(s.get("seed", 0)))
    if "treatments" in obj:
        treatments = [Treatment.from_dict(t) for t in obj["treatments"]]
    else:
        treatments = [Treatment.from_dict(obj.get("treatment", "none"))]
    common = dict(
        csv=resolve(data.get("csv")),
        schema=resolve(data.get("schema")),
        synth=synth,
        task=obj.get("task", "regression"),
        train_fraction=float(obj.get("train_fraction", 0.5)),
        iterations=int(obj.get("iterations", 20)),
        seed=int(obj.get("seed", 0)),
        include_sensitive_as_feature=bool(obj.get("include_sensitive_as_feature", True)),
        output=obj.get("output"),
    )
    return [ExperimentConfig(treatment=t, **common) for t in treatments]


def load_configs(path: str | Path) -> list[ExperimentConfig]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return configs_from_dict(obj, path.parent)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    iterations: list[MetricReport]
    mean: dict[str, float]
    std: dict[str, float]
    timings: dict[str, float]

    @property
    def name(self) -> str:
        return self.config.treatment.name

    def to_dict(self) -> dict:
        return {
            "treatment": self.name,
            "config": self.config.to_dict(),
            "mean": self.mean,
            "std": self.std,
            "timings": self.timings,
            "iterations": [r.to_dict() for r in self.iterations],
        }


def aggregate(reports: list[MetricReport]) -> tuple[dict[str, float], dict[str, float]]:
    """Mean and sample standard deviation per flat metric key.

    A metric missing from some iterations is averaged over those that have
    it; the standard deviation is 0 for a single value.
    """
    values: dict[str, list[float]] = defaultdict(list)
    for r in reports:
        for key, v in r.flat().items():
            values[key].append(v)
    mean = {k: math.fsum(v) / len(v) for k, v in values.items()}
    std = {k: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for k, v in values.items()}
    return mean, std


class FeatureBuilder:
    """Model inputs fit on training data: feature columns plus (optionally)
    sensitive columns; categorical sensitive columns become drop-first
    indicators, continuous columns are z-scored with training statistics.
    """

    def __init__(self, train: Dataset, include_sensitive: bool = True):
        schema = train.schema
        self.numeric = list(schema.features)
        self.indicators: list[tuple[str, list[float]]] = []
        if include_sensitive:
            for name in schema.sensitive:
                kind = schema.kind(name)
                if kind is ColumnKind.SENSITIVE_CATEGORICAL:
                    levels = sorted(np.unique(train[name]).tolist())
                    if len(levels) > 1:
                        self.indicators.append((name, levels[1:]))
                else:
                    self.numeric.append(name)
        scaled = [n for n in self.numeric if schema.kind(n) in (ColumnKind.FEATURE, ColumnKind.SENSITIVE_CONTINUOUS)]
        self.params = fit_standardizer(train, scaled)

    def __call__(self, ds: Dataset) -> np.ndarray:
        cols = []
        for name in self.numeric:
            v = ds[name]
            if name in self.params.stats:
                m, s = self.params.stats[name]
                v = (v - m) / s
            cols.append(v)
        for name, levels in self.indicators:
            cols.extend((ds[name] == lv).astype(float) for lv in levels)
        return np.column_stack(cols) if cols else np.empty((ds.n_rows, 0))


def training_weights(train: Dataset, treatment: Treatment) -> np.ndarray | None:
    if treatment.kind == "fair_reweighing":
        return fair_reweigh(train, treatment.weighing)
    if treatment.kind == "classic_reweighing":
        sens = treatment.sensitive or train.schema.sensitive[0]
        return classic_reweigh(train, sens, train.schema.target)
    return None


def fit_predict(train: Dataset, test: Dataset, weights, task: str, include_sensitive: bool = True) -> np.ndarray:
    """Fit the task's model on ``train`` with ``weights`` and predict ``test``."""
    build = FeatureBuilder(train, include_sensitive)
    X_tr, X_te = build(train), build(test)
    y_tr = train[train.schema.target]
    if task == "regression":
        return predict_linear(fit_wls(X_tr, y_tr, weights), X_te)
    model = fit_logistic(X_tr, y_tr, weights)
    return (predict_proba(model, X_te) >= CLASSIFICATION_THRESHOLD).astype(float)


def sensitive_inputs(ds: Dataset) -> dict[str, tuple[np.ndarray, str]]:
    return {name: (ds[name], ds.schema.kind(name).value) for name in ds.schema.sensitive}


def run_iteration(cfg: ExperimentConfig, ds: Dataset, k: int) -> tuple[MetricReport, dict[str, float]]:
    clock = {}
    t0 = time.perf_counter()
    train, test = split(ds, cfg.train_fraction, cfg.seed + k)
    t1 = time.perf_counter()
    weights = training_weights(train, cfg.treatment)
    t2 = time.perf_counter()
    y_hat = fit_predict(train, test, weights, cfg.task, cfg.include_sensitive_as_feature)
    t3 = time.perf_counter()
    report = score(test[ds.schema.target], y_hat, sensitive_inputs(test), cfg.task)
    t4 = time.perf_counter()
    clock.update(split=t1 - t0, weigh=t2 - t1, fit=t3 - t2, score=t4 - t3)
    return report, clock


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, jobs: int | None = None, dataset: Dataset | None = None) -> ExperimentResult:
    """Iteration ``k`` uses seed ``cfg.seed + k`` for its split; results are
    independent of ``jobs``.
    """
    t_load = time.perf_counter()
    ds = dataset if dataset is not None else cfg.load_dataset()
    load_time = time.perf_counter() - t_load
    jobs = default_jobs() if jobs is None else max(1, jobs)
    ks = range(cfg.iterations)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda k: run_iteration(cfg, ds, k), ks))
    else:
        outcomes = [run_iteration(cfg, ds, k) for k in ks]
    reports = [r for r, _ in outcomes]
    timings = {"load": load_time}
    for _, clock in outcomes:
        for phase, secs in clock.items():
            timings[phase] = timings.get(phase, 0.0) + secs
    mean, std = aggregate(reports)
    return ExperimentResult(cfg, reports, mean, std, timings)
