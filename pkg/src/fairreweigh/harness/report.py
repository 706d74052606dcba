"""JSON, CSV and markdown renderings of experiment results."""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from .experiment import ExperimentResult

OVERALL_ORDER = ("mse", "r2", "accuracy", "f1")
ATTRIBUTE_ORDER = ("bgl", "aod", "eod", "r_sep", "i_sep", "c_sep")
LABELS = {
    "mse": "MSE",
    "r2": "R²",
    "accuracy": "Accuracy",
    "f1": "F1",
    "bgl": "BGL",
    "aod": "AOD",
    "eod": "EOD",
    "r_sep": "r_sep",
    "i_sep": "I_sep",
    "c_sep": "C_sep",
}


def metric_columns(results: Sequence[ExperimentResult]) -> list[str]:
    """Flat metric keys present in any result, in table order."""
    present = set()
    for r in results:
        present.update(r.mean)
    cols = [k for k in OVERALL_ORDER if k in present]
    attrs = []
    for r in results:
        for key in r.mean:
            if "." in key:
                attr = key.split(".", 1)[0]
                if attr not in attrs:
                    attrs.append(attr)
    # metric-major: r_sep(G), I_sep(G), C_sep(G), C_sep(A)
    for metric in ATTRIBUTE_ORDER:
        for attr in attrs:
            key = f"{attr}.{metric}"
            if key in present:
                cols.append(key)
    return cols


def header_label(key: str) -> str:
    if "." not in key:
        return LABELS.get(key, key)
    attr, metric = key.split(".", 1)
    return f"{LABELS.get(metric, metric)}({attr})"


def to_json(results: Sequence[ExperimentResult]) -> str:
    body = [r.to_dict() for r in results]
    return json.dumps(body[0] if len(body) == 1 else body, indent=2)


def to_csv(results: Sequence[ExperimentResult]) -> str:
    """One row per iteration plus ``mean`` and ``std`` rows, per treatment."""
    cols = metric_columns(results)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["treatment", "iteration", *cols])
    for r in results:
        for k, rep in enumerate(r.iterations):
            flat = rep.flat()
            writer.writerow([r.name, k, *(_cell(flat.get(c), "r") for c in cols)])
        writer.writerow([r.name, "mean", *(_cell(r.mean.get(c), "r") for c in cols)])
        writer.writerow([r.name, "std", *(_cell(r.std.get(c), "r") for c in cols)])
    return buf.getvalue()


def to_markdown(results: Sequence[ExperimentResult], digits: int = 3) -> str:
    """Treatment-per-row table of mean metrics."""
    cols = metric_columns(results)
    lines = [
        "| Treatment | " + " | ".join(header_label(c) for c in cols) + " |",
        "|---|" + "---|" * len(cols),
    ]
    for r in results:
        cells = [_cell(r.mean.get(c), f".{digits}f") for c in cols]
        lines.append(f"| {r.name} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _cell(value, fmt: str) -> str:
    if value is None:
        return ""
    return repr(value) if fmt == "r" else format(value, fmt)


def render(results: Sequence[ExperimentResult], fmt: str) -> str:
    if fmt == "json":
        return to_json(results)
    if fmt == "csv":
        return to_csv(results)
    if fmt == "md":
        return to_markdown(results)
    raise ValueError(f"unknown report format {fmt!r}")
