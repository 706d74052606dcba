"""Density-ratio reweighing for separation in fair regression and classification."""

from .data import ColumnKind, Dataset, Schema, load_csv, split
from .density import DensitySpec, eval_density, fit_density
from .metrics import MetricReport, c_sep, i_sep, r_sep, score
from .reweighing import WeighingConfig, classic_reweigh, fair_reweigh
from .synth import generate_jump

__version__ = "0.1.0"

__all__ = [
    "ColumnKind",
    "Dataset",
    "DensitySpec",
    "MetricReport",
    "Schema",
    "WeighingConfig",
    "c_sep",
    "classic_reweigh",
    "eval_density",
    "fair_reweigh",
    "fit_density",
    "generate_jump",
    "i_sep",
    "load_csv",
    "r_sep",
    "score",
    "split",
]
