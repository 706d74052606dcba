"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..data import ColumnKind, DataError, Schema, load_csv, write_csv
from ..density import DEFAULT_BANDWIDTH, DEFAULT_RADIUS, DensitySpec
from ..metrics import score
from ..reweighing import WeighingConfig, fair_reweigh
from ..synth import SynthSpec, generate_jump
from .experiment import ConfigError, default_jobs, load_configs, run_experiment, sensitive_inputs
from .report import render

log = logging.getLogger("fairreweigh")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _estimator(args) -> DensitySpec:
    if args.estimator == "frequency":
        return DensitySpec.frequency()
    if args.estimator == "neighbor":
        return DensitySpec.neighbor(args.radius)
    return DensitySpec.kernel(args.bandwidth)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _schema_path_for(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + ".schema.json")


def cmd_synth(args) -> int:
    out = Path(args.out)
    ds = generate_jump(SynthSpec(args.n, args.seed))
    write_csv(ds, out)
    _schema_path_for(out).write_text(json.dumps(ds.schema.to_dict(), indent=2) + "\n", encoding="utf-8")
    log.info("wrote %d rows to %s", ds.n_rows, out)
    return EXIT_OK


def cmd_weigh(args) -> int:
    schema = Schema.from_json(_existing(args.schema))
    ds = load_csv(_existing(args.data), schema)
    cfg = WeighingConfig(
        estimator=_estimator(args),
        sensitive=args.sensitive or None,
        standardize_before_density=not args.no_standardize,
        normalize_weights=not args.no_normalize,
    )
    weights = fair_reweigh(ds, cfg)
    lines = ["row,weight"] + [f"{i},{w!r}" for i, w in enumerate(weights.tolist())]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = Path(args.config)
    if not config.is_file():
        raise UsageError(f"config file {config} not found")
    try:
        configs = load_configs(config)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    jobs = args.jobs if args.jobs is not None else default_jobs()
    results = []
    for cfg in configs:
        log.info("running %s (%d iterations)", cfg.treatment.name, cfg.iterations)
        results.append(run_experiment(cfg, jobs=jobs))
    out = args.out or configs[0].output
    if out and not Path(out).is_absolute() and args.out is None:
        out = str(config.parent / out)
    _emit(render(results, args.format), out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    schema = Schema.from_json(_existing(args.schema))
    pred_col = args.prediction_column
    sens = [(n, schema.kind(n)) for n in schema.sensitive]
    augmented = Schema.build(schema.target, [*schema.features, pred_col], sens)
    ds = load_csv(_existing(args.pred), augmented)
    report = score(ds[schema.target], ds[pred_col], sensitive_inputs(ds), args.task)
    if args.format == "json":
        text = json.dumps(report.to_dict(), indent=2)
    else:
        flat = report.flat()
        if args.format == "csv":
            text = "metric,value\n" + "".join(f"{k},{v!r}\n" for k, v in flat.items())
        else:
            text = "| metric | value |\n|---|---|\n" + "".join(f"| {k} | {v:.3f} |\n" for k, v in flat.items())
    _emit(text, args.out)
    return EXIT_OK


def cmd_fidelity(args) -> int:
    from .fidelity import density_fidelity

    res = density_fidelity(_estimator(args), n=args.n, seed=args.seed)
    res.write_csv(args.out)
    print(f"pearson rho(y): {res.pearson_y:.4f}  pearson rho(gender, y): {res.pearson_gy:.4f}")
    return EXIT_OK


def _existing(path: str) -> str:
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    return path


def _add_estimator_args(p) -> None:
    p.add_argument("--estimator", choices=("frequency", "neighbor", "kernel"), default="kernel")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--bandwidth", type=float, default=DEFAULT_BANDWIDTH)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairreweigh", description="Density-ratio reweighing and separation metrics.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write the synthetic jump dataset and its schema")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("weigh", help="compute reweighing weights for a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    _add_estimator_args(p)
    p.add_argument("--sensitive", nargs="+", help="sensitive columns (default: all in schema)")
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_weigh)

    p = sub.add_parser("experiment", help="run a repeated-split experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv", "md"), default="json")
    p.add_argument("--jobs", type=int, help="parallel iterations (default from FAIRREWEIGH_THREADS)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("metrics", help="score externally produced predictions")
    p.add_argument("--pred", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--prediction-column", default="prediction")
    p.add_argument("--task", choices=("regression", "classification"), default="regression")
    p.add_argument("--format", choices=("json", "csv", "md"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("fidelity", help="plot-ready CSV of estimated vs reference jump densities")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    _add_estimator_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fidelity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fairreweigh: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"fairreweigh: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
