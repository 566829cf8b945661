"""Five-class naive Bayes over binned attributes.

Estimates are additive (Laplace) smoothed counts::

    prior(c)      = (n_c + a) / (N + 5a)
    P(bin b | c)  = (n_{b,c} + a) / (n_c^F + a * bins(F))

where n_c^F counts class-c records with attribute F observed. Missing
values are skipped both when counting and when scoring a record.
Posteriors are accumulated in log space and normalized at the end.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from typing import TextIO

import numpy as np

from .discretize import BinSpec, DiscretizedView
from .errors import (
    EmptyTrainingSet,
    InputError,
    PreconditionError,
    RowArity,
    UnknownSymptomName,
    ValueOutOfRange,
)
from .ingest import N_CLASSES, AttributeSchema, ClassLabel, Dataset, PatientRecord, default_schema

DEFAULT_ALPHA = 1.0
MODEL_VERSION = 1


def class_priors(labels, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    labels = labels[labels >= 0]
    counts = np.bincount(labels, minlength=N_CLASSES).astype(float)
    denom = counts.sum() + N_CLASSES * alpha
    if denom <= 0:
        raise EmptyTrainingSet("no labelled records to estimate class priors")
    return (counts + alpha) / denom


def conditional_table(codes, labels, n_bins: int, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """(5, n_bins) matrix of P(bin | class) from co-observed codes and labels.

    A class with no observed values and ``alpha == 0`` gets a uniform row.
    """
    codes = np.asarray(codes, dtype=int)
    labels = np.asarray(labels, dtype=int)
    keep = (codes >= 0) & (labels >= 0)
    counts = np.zeros((N_CLASSES, n_bins))
    np.add.at(counts, (labels[keep], codes[keep]), 1.0)
    counts += alpha
    totals = counts.sum(axis=1, keepdims=True)
    empty = totals[:, 0] == 0
    counts[empty] = 1.0
    totals[empty] = n_bins
    return counts / totals


@dataclass(frozen=True, eq=False)
class AttributeModel:
    spec: BinSpec
    conditionals: np.ndarray  # (5, n_bins)
    name: str = ""

    @property
    def attribute_id(self) -> int:
        return self.spec.attribute_id

    @property
    def log_conditionals(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.conditionals)


@dataclass(frozen=True, eq=False)
class NbcModel:
    class_priors: np.ndarray
    attributes: tuple[AttributeModel, ...]
    alpha: float = DEFAULT_ALPHA
    subset: tuple[int, ...] = ()

    @property
    def zero_prior_classes(self) -> list[ClassLabel]:
        return [ClassLabel(c) for c in np.flatnonzero(self.class_priors == 0)]

    def __eq__(self, other):
        if not isinstance(other, NbcModel):
            return NotImplemented
        return (self.alpha == other.alpha and self.subset == other.subset
                and np.array_equal(self.class_priors, other.class_priors)
                and len(self.attributes) == len(other.attributes)
                and all(a.spec == b.spec and a.name == b.name
                        and np.array_equal(a.conditionals, b.conditionals)
                        for a, b in zip(self.attributes, other.attributes)))


def fit(dataset: Dataset, subset, view: DiscretizedView,
        alpha: float = DEFAULT_ALPHA) -> NbcModel:
    """Estimate priors and per-attribute conditionals for the retained attributes."""
    retained = tuple(getattr(subset, "retained", subset))
    labels = dataset.labels
    if not (labels >= 0).any():
        raise EmptyTrainingSet(f"{dataset.name or 'dataset'}: no labelled records")
    if not retained:
        raise PreconditionError("cannot fit naive Bayes on an empty attribute subset")
    attributes = []
    for attribute_id in retained:
        spec = view.specs[attribute_id]
        table = conditional_table(view.column(attribute_id), labels, spec.n_bins, alpha)
        attributes.append(AttributeModel(spec, table, dataset.schema[attribute_id].name))
    return NbcModel(class_priors(labels, alpha), tuple(attributes), alpha, retained)


@dataclass(frozen=True)
class Posterior:
    probabilities: tuple[float, ...]
    predicted: ClassLabel
    log_evidence: float = float("nan")

    def __getitem__(self, label) -> float:
        return self.probabilities[int(label)]


def log_joint(model: NbcModel, matrix) -> np.ndarray:
    """(n, 5) unnormalized log posteriors for rows of a (n, 76) value matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with np.errstate(divide="ignore"):
        out = np.tile(np.log(model.class_priors), (matrix.shape[0], 1))
    for attribute in model.attributes:
        codes = attribute.spec.encode(matrix[:, attribute.attribute_id - 1])
        seen = codes >= 0
        if seen.any():
            out[seen] += attribute.log_conditionals[:, codes[seen]].T
    return out


def normalize_log(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise softmax of log scores; returns (probabilities, log evidence)."""
    scores = np.atleast_2d(scores)
    top = scores.max(axis=1, keepdims=True)
    if np.isneginf(top).any():
        raise PreconditionError("every class has zero probability for some record")
    p = np.exp(scores - top)
    z = p.sum(axis=1, keepdims=True)
    return p / z, (top + np.log(z))[:, 0]


def posterior_matrix(model: NbcModel, matrix) -> tuple[np.ndarray, np.ndarray]:
    return normalize_log(log_joint(model, matrix))


def posterior(model: NbcModel, record: PatientRecord) -> Posterior:
    probs, log_evidence = posterior_matrix(model, record.values[None, :])
    p = probs[0]
    return Posterior(tuple(map(float, p)), ClassLabel(int(np.argmax(p))), float(log_evidence[0]))


def predict(model: NbcModel, record: PatientRecord) -> ClassLabel:
    return posterior(model, record).predicted


def predict_matrix(model: NbcModel, matrix) -> np.ndarray:
    # argmax returns the first maximum, so ties go to the lower class code
    return np.argmax(log_joint(model, matrix), axis=1)


# -- model files -----------------------------------------------------------

def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dumps_model(model: NbcModel) -> str:
    lines = [
        f"cardiopipe-nbc {MODEL_VERSION}",
        f"alpha {model.alpha!r}",
        "subset " + " ".join(str(a) for a in model.subset),
        "priors " + _floats(model.class_priors),
    ]
    for attribute in model.attributes:
        spec = attribute.spec
        kind, values = ("edges", spec.edges) if spec.edges else ("categories", spec.categories)
        flag = " degenerate" if spec.degenerate else ""
        lines.append(f"attribute {spec.attribute_id} {attribute.name or '-'} {kind}{flag}")
        lines.append("bins " + _floats(values))
        for row in attribute.conditionals:
            lines.append("cond " + _floats(row))
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> NbcModel:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        magic, version = lines[0].split()
        if magic != "cardiopipe-nbc" or int(version) != MODEL_VERSION:
            raise InputError(f"unsupported model header {lines[0]!r}")
        alpha = float(lines[1].split()[1])
        subset = tuple(int(a) for a in lines[2].split()[1:])
        priors = np.array([float(v) for v in lines[3].split()[1:]])
        attributes = []
        i = 4
        while lines[i] != "end":
            head = lines[i].split()
            attribute_id, name, kind = int(head[1]), head[2], head[3]
            values = tuple(float(v) for v in lines[i + 1].split()[1:])
            spec = BinSpec(attribute_id, degenerate="degenerate" in head[4:],
                           **{kind: values})
            cond = np.array([[float(v) for v in lines[i + 2 + c].split()[1:]]
                             for c in range(N_CLASSES)])
            attributes.append(AttributeModel(spec, cond, "" if name == "-" else name))
            i += 2 + N_CLASSES
    except (IndexError, ValueError, TypeError) as exc:
        raise InputError(f"malformed model file: {exc}") from None
    return NbcModel(priors, tuple(attributes), alpha, subset)


# -- prior tables ----------------------------------------------------------

# Canonical column names, plus the alternative naming that calls the
# classes normal/starting/low/mild/serious. "mild" means code 2 in the first
# scheme and code 3 in the second, so the whole header picks the scheme.
CANONICAL_COLUMNS = ("absence", "starting", "mild", "moderate", "serious")
ALIAS_COLUMNS = ("normal", "starting", "low", "mild", "serious")


def _column_key(name: str) -> str:
    return name.strip().lower().replace(" ", "")


@dataclass(frozen=True)
class PriorTable:
    """Rows of P(symptom present | class), Absence..Serious."""
    rows: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __getitem__(self, symptom: str) -> tuple[float, ...]:
        return self.rows[symptom.upper()]

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        out = ["SYMPTOM," + ",".join(c.upper() for c in CANONICAL_COLUMNS)]
        for name, values in self.rows.items():
            out.append(name + "," + ",".join(f"{v:g}" for v in values))
        return "\n".join(out) + "\n"


def load_prior_table(stream: TextIO) -> PriorTable:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("prior table is empty") from None
    keys = [_column_key(h) for h in header]
    if len(keys) != 6 or keys[0] != "symptom":
        raise RowArity(f"header must be SYMPTOM plus five class columns, got {header}")
    columns = keys[1:]
    if set(columns) == set(CANONICAL_COLUMNS):
        scheme = CANONICAL_COLUMNS
    elif set(columns) == set(ALIAS_COLUMNS):
        scheme = ALIAS_COLUMNS
    else:
        raise InputError(f"unrecognized class columns {header[1:]}")
    order = [columns.index(name) for name in scheme]
    rows = {}
    for lineno, row in enumerate(reader, 2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != 6:
            raise RowArity(f"line {lineno}: expected 6 fields, got {len(row)}")
        try:
            values = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
        for v in values:
            if not 0 < v < 1:
                raise ValueOutOfRange(f"line {lineno}: probability {v} not in (0, 1)")
        rows[row[0].strip().upper()] = tuple(values[i] for i in order)
    return PriorTable(rows)


def default_prior_table() -> PriorTable:
    with resources.files("cardiopipe.data").joinpath("table6.csv").open("r") as fh:
        return load_prior_table(fh)


def seed_model_from_table(table: PriorTable, priors=None,
                          schema: AttributeSchema | None = None) -> NbcModel:
    """Binary naive Bayes whose likelihoods come straight from a prior table.

    Each row becomes an attribute with bins (absent=0, present=1), so a
    recorded value of 1 means present; other values snap to the nearer bin.
    No smoothing is applied.
    """
    schema = schema or default_schema()
    priors = np.full(N_CLASSES, 1.0 / N_CLASSES) if priors is None else np.asarray(priors, float)
    if priors.shape != (N_CLASSES,) or (priors < 0).any() or abs(priors.sum() - 1) > 1e-9:
        raise PreconditionError("class priors must be 5 nonnegative values summing to 1")
    attributes = []
    for name, present in table.rows.items():
        try:
            descriptor = schema.by_name(name)
        except KeyError:
            raise UnknownSymptomName(f"no attribute named {name!r} in schema") from None
        present = np.asarray(present)
        cond = np.column_stack([1.0 - present, present])
        spec = BinSpec(descriptor.id, categories=(0.0, 1.0))
        attributes.append(AttributeModel(spec, cond, descriptor.name))
    subset = tuple(a.attribute_id for a in attributes)
    return NbcModel(priors, tuple(attributes), 0.0, subset)


def record_from_values(values: dict[int, float], patient_id: int = 0,
                       source: str = "") -> PatientRecord:
    """Build a record from ``{attribute_id: value}``; everything else missing."""
    cells = np.full(76, np.nan)
    for attribute_id, value in values.items():
        cells[attribute_id - 1] = value
    return PatientRecord(patient_id, cells, source)


def load_model_file(path) -> NbcModel:
    with open(path) as fh:
        return loads_model(fh.read())


def save_model_file(model: NbcModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_model(model))
