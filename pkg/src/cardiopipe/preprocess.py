"""Filter and wrapper feature selection.

The filter drops identifier/unused and mostly-missing attributes, keeps the
ones whose symmetric uncertainty with the label reaches a threshold, and
then removes an attribute when an already-kept, better-ranked attribute
predicts it at least as well as it predicts the label. Redundancy is only
ever checked against kept attributes, never all pairs.

The wrapper runs greedy forward selection over the filter's output, scoring
each candidate subset by stratified cross-validated naive Bayes accuracy.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .discretize import DiscretizedView, discretize
from .errors import EmptySelection, InputError, NoCoverage
from .folds import stratified_folds
from .ingest import LABEL_ID, N_CLASSES, AttributeSchema, Dataset, PatientRecord
from .nbc import DEFAULT_ALPHA, class_priors, conditional_table
from .significance import entropy

REASONS = ("identifier", "excess_missing", "low_relevance", "redundant",
           "below_wrapper_threshold")

# SU ties that differ only by float noise count as ties
SU_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SelectionConfig:
    missing_ratio_cap: float = 0.5
    relevance_threshold: float = 0.01
    wrapper_epsilon: float = 0.001
    wrapper_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.missing_ratio_cap <= 1:
            raise ValueError("missing_ratio_cap must lie in [0, 1]")
        if not (math.isfinite(self.relevance_threshold) and self.relevance_threshold >= 0):
            raise ValueError("relevance_threshold must be finite and nonnegative")
        # an infinite epsilon is allowed: it stops the wrapper after one step
        if not self.wrapper_epsilon >= 0:
            raise ValueError("wrapper_epsilon must be nonnegative")
        if int(self.wrapper_folds) != self.wrapper_folds or self.wrapper_folds < 2:
            raise ValueError("wrapper_folds must be an integer >= 2")

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


def loads_config(text: str) -> SelectionConfig:
    """Parse ``key = value`` lines; unknown keys are an error, missing keys default."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[selection]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"bad config: {exc}") from None
    types = {f.name: f.type for f in fields(SelectionConfig)}
    kwargs = {}
    for key, raw in parser["selection"].items():
        if key not in types:
            raise InputError(f"unknown config key {key!r}")
        try:
            kwargs[key] = int(raw) if types[key] in (int, "int") else float(raw)
        except ValueError:
            raise InputError(f"config key {key!r}: cannot parse {raw!r}") from None
    try:
        return SelectionConfig(**kwargs)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def load_config(path) -> SelectionConfig:
    with open(path) as fh:
        return loads_config(fh.read())


@dataclass(frozen=True)
class FeatureSubset:
    """Retained attribute ids (in selection order) plus why the rest went.

    ``scores`` holds the number behind each decision: missing ratio for
    excess_missing, SU with the label for filter decisions, internal
    accuracy after each accepted wrapper step.
    """
    retained: tuple[int, ...] = ()
    removed: tuple[tuple[int, str], ...] = ()
    scores: dict = field(default_factory=dict, compare=False)
    trace: tuple[tuple[int, float], ...] = field(default=(), compare=False)
    baseline: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        gone = {a for a, _ in self.removed}
        if gone & set(self.retained):
            raise ValueError(f"attributes both retained and removed: {sorted(gone & set(self.retained))}")
        for _, reason in self.removed:
            if reason not in REASONS:
                raise ValueError(f"unknown removal reason {reason!r}")

    @property
    def removed_ids(self) -> set[int]:
        return {a for a, _ in self.removed}

    def reason(self, attribute_id: int) -> str | None:
        return dict(self.removed).get(attribute_id)

    def to_csv(self, schema: AttributeSchema) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["attribute_id", "name", "status", "reason", "score"])
        for a in self.retained:
            writer.writerow([a, schema[a].name, "retained", "", _score(self.scores.get(a))])
        for a, reason in self.removed:
            writer.writerow([a, schema[a].name, "removed", reason, _score(self.scores.get(a))])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureSubset":
        retained, removed, scores = [], [], {}
        try:
            for row in csv.DictReader(io.StringIO(text)):
                a = int(row["attribute_id"])
                if row["score"]:
                    scores[a] = float(row["score"])
                if row["status"] == "retained":
                    retained.append(a)
                elif row["status"] == "removed":
                    removed.append((a, row["reason"]))
                else:
                    raise InputError(f"unknown status {row['status']!r}")
            return cls(tuple(retained), tuple(removed), scores)
        except (KeyError, ValueError) as exc:
            raise InputError(f"malformed subset CSV: {exc}") from None


def _score(value) -> str:
    return "" if value is None or value != value else repr(float(value))


def candidate_ids(schema: AttributeSchema) -> list[int]:
    """Attributes selection decides about: symptoms plus identifier/unused slots."""
    return [a.id for a in schema if a.id != LABEL_ID and (a.role == "symptom" or a.excluded)]


def drop_unusable(dataset: Dataset, config: SelectionConfig | None = None) -> FeatureSubset:
    config = config or SelectionConfig()
    schema = dataset.schema
    n = len(dataset)
    retained, removed, scores = [], [], {}
    for a in candidate_ids(schema):
        if schema[a].excluded:
            removed.append((a, "identifier"))
            continue
        missing = int(np.isnan(dataset.column(a)).sum())
        ratio = missing / n if n else 1.0
        if ratio > config.missing_ratio_cap or missing == n:
            removed.append((a, "excess_missing"))
            scores[a] = ratio
        else:
            retained.append(a)
    return FeatureSubset(tuple(retained), tuple(removed), scores)


def _su_from_codes(x, y) -> float:
    keep = (x >= 0) & (y >= 0)
    if not keep.any():
        raise NoCoverage("no co-observed records")
    x, y = x[keep], y[keep]
    joint = np.zeros((x.max() + 1, y.max() + 1))
    np.add.at(joint, (x, y), 1.0)
    h_x = entropy(joint.sum(axis=1))
    h_y = entropy(joint.sum(axis=0))
    if h_x == 0 or h_y == 0:
        return 0.0
    mi = h_x + h_y - entropy(joint)
    return min(max(2.0 * mi / (h_x + h_y), 0.0), 1.0)


def symmetric_uncertainty(a: int, b, view: DiscretizedView) -> float:
    """SU = 2 I(a;b) / (H(a) + H(b)) over records where both are observed.

    ``b`` may be an attribute id or ``"label"``.
    """
    b = LABEL_ID if b == "label" else b
    return _su_from_codes(view.column(a), view.column(b))


def filter_select(dataset: Dataset, view: DiscretizedView | None = None,
                  config: SelectionConfig | None = None,
                  start: FeatureSubset | None = None) -> FeatureSubset:
    """Relevance threshold followed by the redundancy pass.

    ``start`` defaults to :func:`drop_unusable`; its removals carry over and
    only its retained attributes are considered, so feeding the output back
    in reproduces it.
    """
    config = config or SelectionConfig()
    view = view if view is not None else discretize(dataset)
    start = start if start is not None else drop_unusable(dataset, config)
    removed = list(start.removed)
    scores = dict(start.scores)

    relevance = {}
    for a in start.retained:
        try:
            relevance[a] = symmetric_uncertainty(a, LABEL_ID, view)
        except NoCoverage:
            relevance[a] = 0.0
        scores[a] = relevance[a]
    relevant = [a for a in start.retained if relevance[a] >= config.relevance_threshold]
    removed.extend((a, "low_relevance") for a in start.retained
                   if relevance[a] < config.relevance_threshold)
    relevant.sort(key=lambda a: (-relevance[a], a))

    kept = []
    for a in relevant:
        redundant = False
        for b in kept:
            try:
                su = symmetric_uncertainty(b, a, view)
            except NoCoverage:
                continue
            if su >= relevance[a] - SU_TOLERANCE:
                redundant = True
                break
        if redundant:
            removed.append((a, "redundant"))
        else:
            kept.append(a)

    if not kept:
        warnings.warn(
            f"{dataset.name or 'dataset'}: no attribute reached relevance threshold"
            f" {config.relevance_threshold}",
            EmptySelection,
            stacklevel=2,
        )
    return FeatureSubset(tuple(kept), tuple(removed), scores)


class _FoldScorer:
    """Cross-validated naive Bayes scores for incremental forward selection.

    Each candidate's per-record log-likelihood contribution (estimated on
    the other folds) is computed once; a subset's score is the fold log
    prior plus the sum of its members' contributions.
    """

    def __init__(self, view: DiscretizedView, labels, folds: int, seed: int, alpha: float):
        labels = np.asarray(labels)
        self.rows = np.flatnonzero(labels >= 0)
        self.y = labels[self.rows]
        plan = stratified_folds(self.y, folds, seed)
        self.fold_of = plan.assignment(len(self.y))
        self.view = view
        self.alpha = alpha
        self.base = np.zeros((len(self.y), N_CLASSES))
        for f in range(plan.k):
            test = self.fold_of == f
            with np.errstate(divide="ignore"):
                self.base[test] = np.log(class_priors(self.y[~test], alpha))

    def contribution(self, attribute_id: int) -> np.ndarray:
        codes = self.view.column(attribute_id)[self.rows]
        n_bins = self.view.n_bins(attribute_id)
        out = np.zeros((len(self.y), N_CLASSES))
        for f in np.unique(self.fold_of):
            test = self.fold_of == f
            table = conditional_table(codes[~test], self.y[~test], n_bins, self.alpha)
            with np.errstate(divide="ignore"):
                log_table = np.log(table)
            hit = test & (codes >= 0)
            out[hit] = log_table[:, codes[hit]].T
        return out

    def correct(self, scores: np.ndarray) -> int:
        return int((np.argmax(scores, axis=1) == self.y).sum())


def wrapper_select(dataset: Dataset, start: FeatureSubset,
                   config: SelectionConfig | None = None,
                   view: DiscretizedView | None = None,
                   alpha: float = DEFAULT_ALPHA) -> FeatureSubset:
    """Greedy forward selection by internal stratified CV accuracy.

    The first step is always taken. Afterwards a step is taken only if it
    improves accuracy by more than ``config.wrapper_epsilon``. Ties go to
    the lower attribute id. An empty ``start`` yields an empty result.
    """
    config = config or SelectionConfig()
    view = view if view is not None else discretize(dataset)
    candidates = sorted(start.retained)
    if not candidates:
        return FeatureSubset((), start.removed, dict(start.scores))

    scorer = _FoldScorer(view, dataset.labels, config.wrapper_folds, config.seed, alpha)
    n = len(scorer.y)
    contributions = {a: scorer.contribution(a) for a in candidates}
    current = scorer.base.copy()
    current_correct = scorer.correct(current)
    baseline = current_correct / n

    chosen, trace = [], []
    remaining = list(candidates)
    while remaining:
        best, best_correct = None, -1
        for a in remaining:  # ascending ids: strict > keeps the lower id on ties
            c = scorer.correct(current + contributions[a])
            if c > best_correct:
                best, best_correct = a, c
        improvement = (best_correct - current_correct) / n
        if chosen and not improvement > config.wrapper_epsilon:
            break
        chosen.append(best)
        remaining.remove(best)
        current = current + contributions[best]
        current_correct = best_correct
        trace.append((best, best_correct / n))

    scores = dict(start.scores)
    scores.update(trace)
    removed = list(start.removed) + [(a, "below_wrapper_threshold")
                                     for a in start.retained if a not in chosen]
    return FeatureSubset(tuple(chosen), tuple(removed), scores, tuple(trace), baseline)


def count_retained_per_record(record: PatientRecord, after: FeatureSubset) -> int:
    return sum(1 for a in after.retained if not math.isnan(record[a]))
