"""Tabular data model, CSV ingestion, standardization and seeded splits.

Splits use numpy's ``Generator(PCG64(seed))``: the permutation for a given
``(n_rows, seed)`` is ``Generator(PCG64(seed)).permutation(n_rows)``, the
first ``round(train_fraction * n_rows)`` indices form the training side.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class DataError(ValueError):
    """Base class for problems with input data or schemas."""


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class EmptyDataError(DataError):
    pass


class ColumnKind(enum.Enum):
    FEATURE = "feature"
    SENSITIVE_BINARY = "binary"
    SENSITIVE_CATEGORICAL = "categorical"
    SENSITIVE_CONTINUOUS = "continuous"
    TARGET = "target"

    @property
    def is_sensitive(self) -> bool:
        return self in (
            ColumnKind.SENSITIVE_BINARY,
            ColumnKind.SENSITIVE_CATEGORICAL,
            ColumnKind.SENSITIVE_CONTINUOUS,
        )

    @property
    def is_discrete(self) -> bool:
        return self in (ColumnKind.SENSITIVE_BINARY, ColumnKind.SENSITIVE_CATEGORICAL)


_SENSITIVE_KINDS = {
    "binary": ColumnKind.SENSITIVE_BINARY,
    "categorical": ColumnKind.SENSITIVE_CATEGORICAL,
    "continuous": ColumnKind.SENSITIVE_CONTINUOUS,
}


@dataclass(frozen=True)
class Schema:
    """Ordered ``(name, kind)`` pairs with exactly one target column."""

    columns: tuple[tuple[str, ColumnKind], ...]

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names in schema: {names}")
        n_targets = sum(kind is ColumnKind.TARGET for _, kind in self.columns)
        if n_targets != 1:
            raise SchemaError(f"schema needs exactly one target column, got {n_targets}")

    @classmethod
    def build(
        cls,
        target: str,
        features: Sequence[str] = (),
        sensitive: Mapping[str, str | ColumnKind] | Sequence[tuple[str, str | ColumnKind]] = (),
    ) -> "Schema":
        items = sensitive.items() if isinstance(sensitive, Mapping) else sensitive
        cols = [(f, ColumnKind.FEATURE) for f in features]
        for name, kind in items:
            if not isinstance(kind, ColumnKind):
                try:
                    kind = _SENSITIVE_KINDS[kind]
                except KeyError:
                    raise SchemaError(f"unknown sensitive kind {kind!r} for {name!r}") from None
            cols.append((name, kind))
        cols.append((target, ColumnKind.TARGET))
        return cls(tuple(cols))

    @classmethod
    def from_dict(cls, obj: Mapping) -> "Schema":
        try:
            target = obj["target"]
        except (KeyError, TypeError):
            raise SchemaError("schema object needs a 'target' entry") from None
        sensitive = []
        for entry in obj.get("sensitive", []):
            if not isinstance(entry, Mapping) or "name" not in entry:
                raise SchemaError(f"bad sensitive entry: {entry!r}")
            sensitive.append((entry["name"], entry.get("kind", "continuous")))
        return cls.build(target, obj.get("features", []), sensitive)

    @classmethod
    def from_json(cls, path: str | Path) -> "Schema":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"schema {path} is not valid JSON: {exc}") from None
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "features": self.features,
            "sensitive": [{"name": n, "kind": k.value} for n, k in self.columns if k.is_sensitive],
        }

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.columns]

    @property
    def target(self) -> str:
        return next(name for name, kind in self.columns if kind is ColumnKind.TARGET)

    @property
    def features(self) -> list[str]:
        return [name for name, kind in self.columns if kind is ColumnKind.FEATURE]

    @property
    def sensitive(self) -> list[str]:
        return [name for name, kind in self.columns if kind.is_sensitive]

    def kind(self, name: str) -> ColumnKind:
        for col, kind in self.columns:
            if col == name:
                return kind
        raise SchemaError(f"unknown column {name!r}")


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    columns: Mapping[str, np.ndarray]
    weights: np.ndarray
    codebooks: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        cols = {}
        n = None
        for name in self.schema.names:
            if name not in self.columns:
                raise SchemaError(f"column {name!r} missing from data")
            v = np.asarray(self.columns[name], dtype=float)
            if v.ndim != 1:
                raise DataError(f"column {name!r} must be one-dimensional")
            if n is None:
                n = len(v)
            elif len(v) != n:
                raise DataError(f"column {name!r} has length {len(v)}, expected {n}")
            v.flags.writeable = False
            cols[name] = v
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (n,):
            raise DataError(f"weights have shape {w.shape}, expected ({n},)")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DataError("weights must be strictly positive and finite")
        w.flags.writeable = False
        for name, kind in self.schema.columns:
            if kind is ColumnKind.SENSITIVE_BINARY and not np.all(np.isin(cols[name], (0.0, 1.0))):
                raise DataError(f"binary column {name!r} has values outside {{0, 1}}")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "codebooks", dict(self.codebooks))

    @classmethod
    def from_columns(cls, schema: Schema, columns: Mapping[str, Iterable[float]], weights=None, codebooks=None) -> "Dataset":
        cols = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
        n = len(next(iter(cols.values()))) if cols else 0
        if weights is None:
            weights = np.ones(n)
        return cls(schema, cols, weights, codebooks or {})

    @property
    def n_rows(self) -> int:
        return len(self.weights)

    def __len__(self) -> int:
        return self.n_rows

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise SchemaError(f"unknown column {name!r}") from None

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Stack the named columns into an ``n_rows x len(names)`` array."""
        if not names:
            return np.empty((self.n_rows, 0))
        return np.column_stack([self[name] for name in names])

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        cols = {k: v[idx] for k, v in self.columns.items()}
        return Dataset(self.schema, cols, self.weights[idx], self.codebooks)

    def with_weights(self, weights) -> "Dataset":
        return Dataset(self.schema, self.columns, weights, self.codebooks)

    def with_columns(self, updates: Mapping[str, np.ndarray]) -> "Dataset":
        cols = dict(self.columns)
        cols.update(updates)
        return Dataset(self.schema, cols, self.weights, self.codebooks)


def _parse_number(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def load_csv(path: str | Path, schema: Schema) -> Dataset:
    """Read a headed, UTF-8 CSV into a :class:`Dataset` with unit weights.

    Sensitive binary and categorical columns may hold text labels; these are
    integer-coded in first-seen order and the labels kept in ``codebooks``.
    Columns not named in the schema are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDataError(f"{path} is empty")
        header = [h.strip() for h in header]
        missing = [name for name in schema.names if name not in header]
        if missing:
            raise SchemaError(f"{path} lacks schema columns {missing}")
        positions = {name: header.index(name) for name in schema.names}
        raw = {name: [] for name in schema.names}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            for name, pos in positions.items():
                raw[name].append((lineno, row[pos].strip()))
    if not raw[schema.target]:
        raise EmptyDataError(f"{path} has a header but no data rows")

    columns, codebooks = {}, {}
    for name, kind in schema.columns:
        cells = raw[name]
        try:
            columns[name] = np.array([_parse_number(c) for _, c in cells])
            continue
        except ValueError:
            if not kind.is_discrete:
                for lineno, cell in cells:
                    try:
                        _parse_number(cell)
                    except ValueError:
                        raise ParseError(f"cannot parse {cell!r} as a number", row=lineno, column=name) from None
        labels: dict[str, int] = {}
        for lineno, cell in cells:
            if cell == "":
                raise ParseError("empty cell", row=lineno, column=name)
            labels.setdefault(cell, len(labels))
        if kind is ColumnKind.SENSITIVE_BINARY and len(labels) > 2:
            raise ParseError(f"binary column has {len(labels)} distinct labels", column=name)
        columns[name] = np.array([labels[c] for _, c in cells], dtype=float)
        codebooks[name] = tuple(labels)
    return Dataset.from_columns(schema, columns, codebooks=codebooks)


def write_csv(ds: Dataset, path: str | Path) -> None:
    """Write ``ds`` so that :func:`load_csv` with the same schema round-trips it."""
    names = ds.schema.names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(ds.n_rows):
            row = []
            for name in names:
                value = ds[name][i]
                book = ds.codebooks.get(name)
                row.append(book[int(value)] if book else repr(float(value)))
            writer.writerow(row)


@dataclass(frozen=True)
class StandardizationParams:
    stats: Mapping[str, tuple[float, float]]

    @property
    def columns(self) -> list[str]:
        return list(self.stats)


def fit_standardizer(ds: Dataset, columns: Sequence[str]) -> StandardizationParams:
    """Per-column mean and population standard deviation.

    Constant columns get a standard deviation of 1 so they map to zeros.
    """
    stats = {}
    for name in columns:
        v = ds[name]
        mean = float(np.mean(v))
        std = float(np.std(v))
        stats[name] = (mean, std if std > 0 else 1.0)
    return StandardizationParams(stats)


def apply_standardizer(ds: Dataset, params: StandardizationParams) -> Dataset:
    return ds.with_columns({name: (ds[name] - m) / s for name, (m, s) in params.stats.items()})


def invert_standardizer(ds: Dataset, params: StandardizationParams) -> Dataset:
    return ds.with_columns({name: ds[name] * s + m for name, (m, s) in params.stats.items()})


def split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded random partition into (train, test); each side keeps source row order."""
    train_idx, test_idx = split_indices(ds.n_rows, train_fraction, seed)
    return ds.take(train_idx), ds.take(test_idx)


def split_indices(n_rows: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if n_rows < 2:
        raise DataError(f"need at least 2 rows to split, got {n_rows}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    # half-up rounding, clipped so both sides are non-empty
    n_train = min(max(int(math.floor(train_fraction * n_rows + 0.5)), 1), n_rows - 1)
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n_rows)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])
