"""The four cooperating stages wired onto a blackboard.

    dataset ──► Filter ──► filter_subset ──► Wrapper ──► wrapper_subset ─┐
                               │                                         ├─► Classifier ──► model
                               └──► DependencyChecker ──► ranking ───────┘

After the agents finish, the controller evaluates the model and posts the
report. Reports and manifests carry no timestamps, so a rerun with the same
inputs and seed writes identical bytes.
"""
from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nbc
from .blackboard import (
    AgentSpec,
    Blackboard,
    Controller,
    ManifestEntry,
    RunManifest,
    canonical_bytes,
)
from .config import PipelineConfig
from .discretize import discretize
from .evaluation import CLASS_TITLES, ConfusionMatrix, Metrics, evaluate, label_counts, title_for
from .ingest import N_CLASSES, Dataset, serialize_raw
from .preprocess import FeatureSubset, count_retained_per_record, filter_select, wrapper_select
from .significance import (
    SignificanceScore,
    collapse_labels,
    mutual_information,
    rank_symptoms,
    ranking_to_csv,
)

SLOT_KINDS = {
    "dataset": "Dataset",
    "filter_subset": "FeatureSubset",
    "wrapper_subset": "FeatureSubset",
    "ranking": "Ranking",
    "model": "Model",
    "report": "Report",
}

REPORT_NOTES = (
    "Prior-table rows are read as class-conditional likelihoods P(symptom present | class).",
    "literal_I = H(F,C) + H(F) + H(C) is listed beside standard mutual information;"
    " it is not bounded by I0, so literal S can exceed 1.",
    "log_evidence is the natural log of the per-record normalizing constant P(record).",
)


@canonical_bytes.register
def _(payload: Dataset) -> bytes:
    return f"dataset {payload.name}\n".encode() + serialize_raw(payload).encode()


@canonical_bytes.register
def _(payload: FeatureSubset) -> bytes:
    scores = ";".join(f"{a}:{v!r}" for a, v in sorted(payload.scores.items()))
    return (f"retained={list(payload.retained)}\nremoved={list(payload.removed)}\n"
            f"scores={scores}\ntrace={list(payload.trace)}\n").encode()


@canonical_bytes.register
def _(payload: nbc.NbcModel) -> bytes:
    return nbc.dumps_model(payload).encode()


def _standard_agents(config: PipelineConfig):
    views = {}

    def view_of(dataset):
        # every agent of one run sees the same bins
        key = id(dataset)
        if key not in views:
            views[key] = (dataset, discretize(dataset, config.bins))
        return views[key][1]

    def run_filter(dataset):
        return filter_select(dataset, view_of(dataset), config.selection)

    def run_wrapper(dataset, filtered):
        return wrapper_select(dataset, filtered, config.selection, view_of(dataset), config.alpha)

    def run_dependency_checker(dataset, filtered):
        return rank_symptoms(dataset, filtered, config.mi_mode, config.i0_mode, view_of(dataset))

    def run_classifier(dataset, wrapped, ranking):
        rank = {s.attribute_id: s.rank for s in ranking}
        ordered = sorted(wrapped.retained, key=lambda a: (rank.get(a, len(rank) + 1), a))
        return nbc.fit(dataset, ordered, view_of(dataset), config.alpha)

    return [
        AgentSpec("Filter", ("dataset",), "filter_subset", run_filter),
        AgentSpec("Wrapper", ("dataset", "filter_subset"), "wrapper_subset", run_wrapper),
        AgentSpec("DependencyChecker", ("dataset", "filter_subset"), "ranking",
                  run_dependency_checker),
        AgentSpec("Classifier", ("dataset", "wrapper_subset", "ranking"), "model",
                  run_classifier),
    ], view_of


def standard_controller(config: PipelineConfig):
    controller = Controller()
    agents, view_of = _standard_agents(config)
    for spec in agents:
        controller.register_agent(spec)
    return controller, view_of


@dataclass(frozen=True, eq=False)
class PipelineReport:
    name: str
    title: str
    n_records: int
    n_unlabelled: int
    label_distribution: tuple[int, ...]
    predicted_distribution: tuple[int, ...]
    filter_subset: FeatureSubset
    wrapper_subset: FeatureSubset
    ranking: tuple[SignificanceScore, ...]
    literal_I: dict
    model: nbc.NbcModel
    metrics: Metrics
    confusion: ConfusionMatrix
    per_record: tuple[tuple, ...]  # (pid, filter count, wrapper count, predicted, log evidence)
    config: PipelineConfig
    schema: object

    def _names(self, ids):
        return ", ".join(f"{self.schema[a].name}({a})" for a in ids) or "(none)"

    def to_text(self) -> str:
        out = io.StringIO()
        w = out.write
        w(f"report: {self.title} ({self.name})\n")
        w(f"records: {self.n_records}  unlabelled: {self.n_unlabelled}\n")
        w("notes:\n")
        for note in REPORT_NOTES:
            w(f"  - {note}\n")
        cfg = self.config
        w(f"config: seed={cfg.seed} bins={cfg.bins} folds={cfg.folds} alpha={cfg.alpha!r}"
          f" mi_mode={cfg.mi_mode} i0_mode={cfg.i0_mode}"
          f" missing_ratio_cap={cfg.selection.missing_ratio_cap!r}"
          f" relevance_threshold={cfg.selection.relevance_threshold!r}"
          f" wrapper_epsilon={cfg.selection.wrapper_epsilon!r}"
          f" wrapper_folds={cfg.selection.wrapper_folds}\n\n")

        w("label distribution\n")
        w("  " + "  ".join(f"{t}={n}" for t, n in zip(CLASS_TITLES, self.label_distribution)))
        w("\n\n")

        f = self.filter_subset
        w(f"filter: {len(f.retained)} retained\n  {self._names(f.retained)}\n")
        reasons = {}
        for a, r in f.removed:
            reasons.setdefault(r, []).append(a)
        for r in sorted(reasons):
            w(f"  removed[{r}]: {len(reasons[r])}\n")
        wr = self.wrapper_subset
        w(f"wrapper: {len(wr.retained)} retained, empty-model accuracy {wr.baseline:.6f}\n")
        for a, acc in wr.trace:
            w(f"  + {self.schema[a].name}({a}) -> {acc:.6f}\n")
        w("\n")

        w("symptom significance (I, I0 in bits)\n")
        w("  rank  id  name        I         I0        S         literal_I\n")
        for s in self.ranking:
            w(f"  {s.rank:>4}  {s.attribute_id:>2}  {s.name:<10}  {s.I:.6f}  {s.I0:.6f}"
              f"  {s.S:.6f}  {self.literal_I.get(s.attribute_id, float('nan')):.6f}\n")
        w("\n")

        m = self.model
        w(f"model: alpha={m.alpha!r} attributes={self._names(m.subset)}\n")
        w("  priors " + " ".join(f"{p:.6f}" for p in m.class_priors) + "\n")
        if m.zero_prior_classes:
            w("  zero-prior classes: " + ", ".join(c.title for c in m.zero_prior_classes) + "\n")
        w("\n")

        mt = self.metrics
        w(f"evaluation ({cfg.folds}-fold stratified)\n")
        w(f"  accuracy {mt.accuracy:.6f}  macro_f1 {mt.macro_f1:.6f}"
          f"  majority_baseline {mt.majority_baseline:.6f}"
          f"  binary_accuracy {mt.binary_accuracy:.6f}\n")
        w("  confusion (rows true, columns predicted)\n")
        for t, row in zip(CLASS_TITLES, self.confusion.counts):
            w(f"    {t:<9}" + "".join(f"{int(v):>6}" for v in row) + "\n")
        w("  predicted distribution  "
          + "  ".join(f"{t}={n}" for t, n in zip(CLASS_TITLES, self.predicted_distribution))
          + "\n")
        return out.getvalue()

    def per_record_csv(self) -> str:
        lines = ["PID,FILTER,WRAPPER,PREDICTED,LOG_EVIDENCE"]
        for pid, fc, wc, pred, ev in self.per_record:
            lines.append(f"{pid},{fc},{wc},{_class_name(pred)},{ev!r}")
        return "\n".join(lines) + "\n"

    def files(self) -> dict[str, str]:
        return {
            "report.txt": self.to_text(),
            "filter_subset.csv": self.filter_subset.to_csv(self.schema),
            "wrapper_subset.csv": self.wrapper_subset.to_csv(self.schema),
            "ranking.csv": ranking_to_csv(self.ranking),
            "model.txt": nbc.dumps_model(self.model),
            "metrics.csv": self.metrics.to_csv(),
            "confusion.csv": self.confusion.to_csv(),
            "per_record.csv": self.per_record_csv(),
        }


def _class_name(code) -> str:
    return CLASS_TITLES[int(code)].lower() if 0 <= int(code) < N_CLASSES else ""


@canonical_bytes.register
def _(payload: PipelineReport) -> bytes:
    return "".join(f"== {k}\n{v}" for k, v in sorted(payload.files().items())).encode()


def _literal_mi(dataset, subset, config, view):
    labels = collapse_labels(dataset.labels, config.i0_mode)
    return {a: mutual_information(a, view, labels, "literal") for a in subset.retained}


def build_report(dataset, config, board, view) -> PipelineReport:
    filtered = board.get("filter_subset").payload
    wrapped = board.get("wrapper_subset").payload
    ranking = tuple(board.get("ranking").payload)
    model = board.get("model").payload
    metrics, cm, _ = evaluate(dataset, config, model.subset, view)
    probs_log = nbc.log_joint(model, dataset.matrix)
    _, log_evidence = nbc.normalize_log(probs_log)
    predicted = np.argmax(probs_log, axis=1)
    per_record = tuple(
        (r.patient_id, count_retained_per_record(r, filtered),
         count_retained_per_record(r, wrapped), int(p), float(ev))
        for r, p, ev in zip(dataset, predicted, log_evidence)
    )
    return PipelineReport(
        name=dataset.name,
        title=title_for(dataset.name),
        n_records=len(dataset),
        n_unlabelled=int((dataset.labels < 0).sum()),
        label_distribution=label_counts(dataset.labels),
        predicted_distribution=tuple(int(v) for v in cm.counts.sum(axis=0)),
        filter_subset=filtered,
        wrapper_subset=wrapped,
        ranking=ranking,
        literal_I=_literal_mi(dataset, filtered, config, view),
        model=model,
        metrics=metrics,
        confusion=cm,
        per_record=per_record,
        config=config,
        schema=dataset.schema,
    )


@dataclass
class PipelineRun:
    report: PipelineReport
    manifest: RunManifest
    board: Blackboard

    @property
    def report_artifact(self):
        return self.board.get("report")


def run_pipeline(dataset: Dataset, config: PipelineConfig | None = None) -> PipelineRun:
    """Run Filter, Wrapper, DependencyChecker and Classifier, then post the report.

    Raises AgentFailure naming the first stage that fails.
    """
    config = config or PipelineConfig()
    controller, view_of = standard_controller(config)
    board = Blackboard(SLOT_KINDS)
    manifest = RunManifest(config.seed, config.snapshot())
    board.post("dataset", dataset, "input")
    controller.run(board, manifest)
    report = build_report(dataset, config, board, view_of(dataset))
    artifact = board.post("report", report, "controller")
    manifest.entries.append(ManifestEntry(
        "controller",
        tuple((s, board.get(s).content_digest)
              for s in ("filter_subset", "wrapper_subset", "ranking", "model")),
        ("report", artifact.content_digest),
    ))
    return PipelineRun(report, manifest, board)


def run_many(datasets, config: PipelineConfig | None = None, jobs: int = 1) -> list[PipelineRun]:
    """One pipeline per dataset; results keep the input order whatever ``jobs`` is."""
    if jobs <= 1:
        return [run_pipeline(d, config) for d in datasets]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda d: run_pipeline(d, config), datasets))


def write_run(run: PipelineRun, directory) -> Path:
    directory = Path(directory) / (run.report.name or "dataset")
    directory.mkdir(parents=True, exist_ok=True)
    for name, body in run.report.files().items():
        (directory / name).write_text(body)
    (directory / "manifest.jsonl").write_text(run.manifest.to_jsonl())
    (directory / "timings.jsonl").write_text(run.manifest.timings_jsonl())
    return directory
