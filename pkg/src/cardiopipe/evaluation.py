"""Cross-validation, confusion matrices and the dataset/label tables."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nbc
from .discretize import DiscretizedView, discretize
from .errors import TooFewRecords
from .folds import FoldPlan, stratified_kfold
from .ingest import DATASET_TITLES, N_CLASSES, Dataset

CLASS_TITLES = ("ABSENCE", "STARTING", "MILD", "MODERATE", "SERIOUS")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """5x5 counts, rows = true class, columns = predicted class."""
    counts: np.ndarray

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        counts = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
        np.add.at(counts, (np.asarray(y_true, int), np.asarray(y_pred, int)), 1)
        return cls(counts)

    def __add__(self, other):
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        lines = ["true\\predicted," + ",".join(c.lower() for c in CLASS_TITLES)]
        for label, row in zip(CLASS_TITLES, self.counts):
            lines.append(label.lower() + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    macro_f1: float
    majority_baseline: float
    binary_accuracy: float

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "Metrics":
        c = cm.counts.astype(float)
        total = c.sum()
        if total == 0:
            raise TooFewRecords("no evaluated records")
        tp = np.diag(c)
        predicted = c.sum(axis=0)
        actual = c.sum(axis=1)
        precision = np.divide(tp, predicted, out=np.zeros(N_CLASSES), where=predicted > 0)
        recall = np.divide(tp, actual, out=np.zeros(N_CLASSES), where=actual > 0)
        pr = precision + recall
        f1 = np.divide(2 * precision * recall, pr, out=np.zeros(N_CLASSES), where=pr > 0)
        active = (predicted > 0) | (actual > 0)
        binary_correct = c[0, 0] + c[1:, 1:].sum()
        return cls(
            accuracy=float(tp.sum() / total),
            precision=tuple(map(float, precision)),
            recall=tuple(map(float, recall)),
            macro_f1=float(f1[active].mean()),
            majority_baseline=float(actual.max() / total),
            binary_accuracy=float(binary_correct / total),
        )

    def to_csv(self) -> str:
        lines = ["metric,value",
                 f"accuracy,{self.accuracy!r}",
                 f"macro_f1,{self.macro_f1!r}",
                 f"majority_baseline,{self.majority_baseline!r}",
                 f"binary_accuracy,{self.binary_accuracy!r}"]
        for label, p, r in zip(CLASS_TITLES, self.precision, self.recall):
            lines.append(f"precision_{label.lower()},{p!r}")
            lines.append(f"recall_{label.lower()},{r!r}")
        return "\n".join(lines) + "\n"


def cross_validate(dataset: Dataset, plan: FoldPlan, fit_predict):
    """Run ``fit_predict(train_rows, test_rows) -> predicted codes`` per fold.

    Returns the pooled confusion matrix and the per-record predictions
    (-1 for records outside the plan).
    """
    labels = dataset.labels
    predictions = np.full(len(dataset), -1, dtype=int)
    cm = ConfusionMatrix(np.zeros((N_CLASSES, N_CLASSES), dtype=int))
    for train, test in plan.splits():
        if not test:
            raise TooFewRecords("empty fold")
        test = np.asarray(test, dtype=int)
        pred = np.asarray(fit_predict(np.asarray(train, dtype=int), test), dtype=int)
        predictions[test] = pred
        cm = cm + ConfusionMatrix.from_predictions(labels[test], pred)
    return cm, predictions


def evaluate(dataset: Dataset, config, subset, view: DiscretizedView | None = None):
    """Stratified k-fold naive Bayes on a fixed attribute subset.

    Bins come from the whole dataset (label-free) so every fold shares them.
    Returns ``(metrics, confusion, predictions)``.
    """
    view = view if view is not None else discretize(dataset, config.bins)
    plan = stratified_kfold(dataset, config.folds, config.seed)

    def fit_predict(train, test):
        model = nbc.fit(dataset.subset(train), subset, view.take(train), config.alpha)
        return nbc.predict_matrix(model, dataset.matrix[test])

    cm, predictions = cross_validate(dataset, plan, fit_predict)
    return Metrics.from_confusion(cm), cm, predictions


# -- table emission --------------------------------------------------------

def _aligned(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


def _csv(header, rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


@dataclass(frozen=True)
class TablesDocument:
    text: str
    csv: dict

    def write(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "tables.txt").write_text(self.text)
        for name, body in self.csv.items():
            (directory / name).write_text(body)


def emit_tables(reports, prior_table=None) -> TablesDocument:
    """Dataset sizes, label distributions, per-record retained counts, prior table.

    ``reports`` are pipeline reports in the order they should be listed.
    """
    sections, files = [], {}

    header = ["S.No.", "DATA SET NAME", "NO. OF INSTANCES"]
    rows = [(i, r.title, r.n_records) for i, r in enumerate(reports, 1)]
    sections.append("Data sets used\n" + _aligned(header, rows))
    files["table1.csv"] = _csv(header, rows)

    header = ["S.NO", "DATA SET", *CLASS_TITLES]
    rows = [(i, r.title, *r.label_distribution) for i, r in enumerate(reports, 1)]
    sections.append("Label distribution (ground truth)\n" + _aligned(header, rows))
    files["table7.csv"] = _csv(header, rows)

    rows = [(i, r.title, *r.predicted_distribution) for i, r in enumerate(reports, 1)]
    sections.append("Predicted distribution (cross-validated, informational)\n"
                    + _aligned(header, rows))
    files["table7_predicted.csv"] = _csv(header, rows)

    header = ["PID", "FILTER", "WRAPPER"]
    for r in reports:
        rows = [(pid, f, w) for pid, f, w, *_ in r.per_record]
        sections.append(f"Retained symptoms per patient: {r.title}\n" + _aligned(header, rows))
        files[f"retained_{r.name}.csv"] = _csv(header, rows)

    if prior_table is not None:
        header = ["SYMPTOM", *CLASS_TITLES]
        rows = [(name, *(f"{v:g}" for v in values)) for name, values in prior_table.rows.items()]
        sections.append("Prior table in use (P(symptom present | class))\n"
                        + _aligned(header, rows))
        files["table6.csv"] = prior_table.to_csv()

    return TablesDocument("\n\n".join(sections) + "\n", files)


def title_for(name: str) -> str:
    return DATASET_TITLES.get(name, name.upper())


def label_counts(labels) -> tuple[int, ...]:
    labels = np.asarray(labels, dtype=int)
    return tuple(int(v) for v in np.bincount(labels[labels >= 0], minlength=N_CLASSES))

