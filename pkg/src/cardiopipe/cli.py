"""``cardiopipe`` command line.

Exit codes: 0 success, 2 input or format problem, 3 a pipeline agent
failed, 4 a precondition did not hold (empty training set and the like).
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import nbc
from .config import PipelineConfig
from .discretize import DEFAULT_BINS, discretize
from .errors import AgentFailure, InputError, PreconditionError
from .evaluation import CLASS_TITLES, emit_tables, evaluate, label_counts
from .ingest import N_CLASSES, PatientRecord, default_schema, load, read_schema
from .pipeline import run_many, write_run
from .preprocess import FeatureSubset, SelectionConfig, filter_select, load_config, wrapper_select
from .significance import I0_MODES, MI_MODES, rank_symptoms, ranking_to_csv

EXIT_OK, EXIT_INPUT, EXIT_AGENT, EXIT_PRECONDITION = 0, 2, 3, 4


# -- shared plumbing ---------------------------------------------------------

def _schema(args):
    if getattr(args, "schema", None):
        with open(args.schema) as fh:
            return read_schema(fh)
    return None  # default_schema() honours CARDIOPIPE_SCHEMA


def _dataset(args, path=None):
    return load(path or args.path, getattr(args, "format", None), _schema(args))


def _selection(args) -> SelectionConfig:
    selection = load_config(args.config) if getattr(args, "config", None) else SelectionConfig()
    overrides = {k: getattr(args, k) for k in ("seed", "missing_ratio_cap", "relevance_threshold",
                                               "wrapper_epsilon", "wrapper_folds")
                 if getattr(args, k, None) is not None}
    try:
        return replace(selection, **overrides)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _pipeline_config(args) -> PipelineConfig:
    try:
        return PipelineConfig(_selection(args), alpha=args.alpha, bins=args.bins,
                              folds=args.folds, mi_mode=args.mi_mode, i0_mode=args.i0_mode)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _subset(path) -> FeatureSubset:
    return FeatureSubset.from_csv(Path(path).read_text())


def _emit(text: str, out) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    dataset = _dataset(args)
    counts = label_counts(dataset.labels)
    unlabelled = int((dataset.labels < 0).sum())
    print(f"{len(dataset)} records")
    print("  ".join(f"{t}={n}" for t, n in zip(CLASS_TITLES, counts))
          + (f"  unlabelled={unlabelled}" if unlabelled else ""))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = _pipeline_config(args)
    datasets = [_dataset(args, p) for p in args.paths]
    runs = run_many(datasets, config, args.jobs)
    out = Path(args.out)
    for run in runs:
        write_run(run, out)
    if args.table:
        with open(args.table) as fh:
            table = nbc.load_prior_table(fh)
    else:
        table = nbc.default_prior_table()
    emit_tables([r.report for r in runs], table).write(out)
    for run in runs:
        r = run.report
        print(f"{r.title}: {r.n_records} records, accuracy {r.metrics.accuracy:.4f},"
              f" binary {r.metrics.binary_accuracy:.4f} -> {out / r.name}")
    return EXIT_OK


def cmd_filter(args) -> int:
    dataset = _dataset(args)
    config = _selection(args)
    result = filter_select(dataset, discretize(dataset, args.bins), config)
    _emit(result.to_csv(dataset.schema), args.out)
    return EXIT_OK


def cmd_wrapper(args) -> int:
    dataset = _dataset(args)
    result = wrapper_select(dataset, _subset(args.start), _selection(args),
                            discretize(dataset, args.bins), args.alpha)
    _emit(result.to_csv(dataset.schema), args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    dataset = _dataset(args)
    scores = rank_symptoms(dataset, _subset(args.subset), args.mi_mode, args.i0_mode,
                           discretize(dataset, args.bins))
    _emit(ranking_to_csv(scores), args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = _dataset(args)
    model = nbc.fit(dataset, _subset(args.subset).retained, discretize(dataset, args.bins),
                    args.alpha)
    _emit(nbc.dumps_model(model), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = _dataset(args)
    config = _pipeline_config(args)
    metrics, cm, _ = evaluate(dataset, config, _subset(args.subset).retained)
    _emit(metrics.to_csv() + "\n" + cm.to_csv(), args.out)
    return EXIT_OK


def _record_from_csv(path, schema) -> PatientRecord:
    """Single-record CSV: header of attribute names, one row; ``?``, -9 or blank = missing."""
    rows = list(csv.reader(io.StringIO(Path(path).read_text())))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if len(rows) != 2 or len(rows[0]) != len(rows[1]):
        raise InputError(f"{path}: expected a header and exactly one record row")
    cells = np.full(len(schema), np.nan)
    for name, raw in zip(*rows):
        try:
            descriptor = schema.by_name(name.strip().lower())
        except KeyError:
            raise InputError(f"{path}: unknown attribute {name!r}") from None
        raw = raw.strip()
        if raw in ("", "?", "-9"):
            continue
        try:
            cells[descriptor.id - 1] = float(raw)
        except ValueError:
            raise InputError(f"{path}: attribute {name!r}: not a number: {raw!r}") from None
    return PatientRecord(0, cells, str(path))


def cmd_predict(args) -> int:
    if args.model:
        model = nbc.load_model_file(args.model)
        if not args.record:
            raise InputError("--model needs --record")
        record = _record_from_csv(args.record, _schema(args) or default_schema())
    else:
        with open(args.table) as fh:
            table = nbc.load_prior_table(fh)
        priors = None
        if args.priors:
            try:
                priors = [float(v) for v in args.priors.split(",")]
            except ValueError:
                raise InputError(f"--priors: cannot parse {args.priors!r}") from None
            if len(priors) != N_CLASSES:
                raise InputError("--priors needs five comma-separated values")
        model = nbc.seed_model_from_table(table, priors, _schema(args))
        by_name = {a.name.upper(): a.attribute_id for a in model.attributes}
        values = {}
        for flag, value in ((args.present, 1.0), (args.absent, 0.0)):
            for name in flag:
                if name.upper() not in by_name:
                    raise InputError(f"{name!r} is not a row of {args.table}")
                values[by_name[name.upper()]] = value
        record = nbc.record_from_values(values)
    post = nbc.posterior(model, record)
    for title, p in zip(CLASS_TITLES, post.probabilities):
        print(f"{title.lower():<9} {p:.6f}")
    print(f"predicted: {post.predicted.title.lower()}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _common(p, fmt=True):
    p.add_argument("--schema", default=None,
                   help="attribute schema TSV (default: $CARDIOPIPE_SCHEMA or the packaged one)")
    if fmt:
        p.add_argument("--format", choices=("raw", "processed"), default=None,
                       help="input layout (default: sniffed from the file)")


def _selection_flags(p):
    p.add_argument("--config", default=None, help="selection config file (key = value lines)")
    p.add_argument("--seed", type=int, default=None, help="fold seed (default: config, else 0)")
    p.add_argument("--missing-ratio-cap", type=float, default=None,
                   help="drop attributes missing in more than this share (default: config, else 0.5)")
    p.add_argument("--relevance-threshold", type=float, default=None,
                   help="minimum SU with the label (default: config, else 0.01)")
    p.add_argument("--wrapper-epsilon", type=float, default=None,
                   help="minimum accuracy gain per wrapper step (default: config, else 0.001)")
    p.add_argument("--wrapper-folds", type=int, default=None,
                   help="internal CV folds for the wrapper (default: config, else 5)")


def _model_flags(p, folds=False, modes=False):
    p.add_argument("--alpha", type=float, default=nbc.DEFAULT_ALPHA, help="Laplace smoothing")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="equal-frequency bins")
    if folds:
        p.add_argument("--folds", type=int, default=5, help="evaluation folds")
    if modes:
        p.add_argument("--mi-mode", choices=MI_MODES, default="standard",
                       help="mutual-information formula")
        p.add_argument("--i0-mode", choices=I0_MODES, default="binary",
                       help="label collapse for prior entropy")


class _DefaultsFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Append the default unless the help already explains it."""

    def _get_help_string(self, action):
        help_text = action.help or ""
        if "default:" in help_text:
            return help_text
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt = _DefaultsFormatter
    parser = argparse.ArgumentParser(prog="cardiopipe", formatter_class=fmt,
                                     description="Heart-disease severity pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", formatter_class=fmt, help="parse a file, print counts")
    p.add_argument("path")
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pipeline", formatter_class=fmt, help="full run per dataset")
    p.add_argument("paths", nargs="+")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="datasets processed in parallel")
    p.add_argument("--table", default=None, help="prior table CSV (default: packaged copy)")
    _common(p)
    _selection_flags(p)
    _model_flags(p, folds=True, modes=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("filter", formatter_class=fmt, help="filter selection -> subset CSV")
    p.add_argument("path")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="equal-frequency bins")
    _common(p)
    _selection_flags(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("wrapper", formatter_class=fmt, help="wrapper selection -> subset CSV")
    p.add_argument("path")
    p.add_argument("--start", required=True, help="subset CSV from the filter")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    _common(p)
    _selection_flags(p)
    _model_flags(p)
    p.set_defaults(func=cmd_wrapper)

    p = sub.add_parser("rank", formatter_class=fmt, help="significance ranking -> CSV")
    p.add_argument("path")
    p.add_argument("--subset", required=True, help="subset CSV to rank")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS, help="equal-frequency bins")
    p.add_argument("--mi-mode", choices=MI_MODES, default="standard",
                   help="mutual-information formula")
    p.add_argument("--i0-mode", choices=I0_MODES, default="binary",
                   help="label collapse for prior entropy")
    _common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", formatter_class=fmt, help="fit naive Bayes -> model file")
    p.add_argument("path")
    p.add_argument("--subset", required=True, help="subset CSV of attributes to use")
    p.add_argument("--out", default=None, help="model file (default: stdout)")
    _common(p)
    _model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", formatter_class=fmt, help="stratified CV on a fixed subset")
    p.add_argument("path")
    p.add_argument("--subset", required=True, help="subset CSV of attributes to use")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    _common(p)
    _selection_flags(p)
    _model_flags(p, folds=True, modes=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", formatter_class=fmt, help="posterior for one record")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", default=None, help="model file from train")
    source.add_argument("--table", default=None, help="prior table CSV to seed a model from")
    p.add_argument("--record", default=None,
                   help="single-record CSV (attribute-name header, ? for missing); with --model")
    p.add_argument("--present", action="append", default=[], metavar="SYMPTOM",
                   help="symptom observed present; with --table, repeatable")
    p.add_argument("--absent", action="append", default=[], metavar="SYMPTOM",
                   help="symptom observed absent; with --table, repeatable")
    p.add_argument("--priors", default=None,
                   help="five comma-separated class priors (default: uniform)")
    _common(p, fmt=False)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AgentFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AGENT
    except PreconditionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
