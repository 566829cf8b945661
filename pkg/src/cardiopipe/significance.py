"""Entropy-based symptom significance (the dependency checker).

All logarithms are base 2. Mutual information comes in two flavours:

``standard``
    I(F;C) = H(F) + H(C) - H(F,C), the usual mutual information.
``literal``
    H(F,C) + H(F) + H(C), i.e. every term of the event-wise expression
    -P(f,c)log P(f,c) - P(f)log P(f) - P(c)log P(c) summed over its own
    events. It is not bounded by the prior entropy, so S can exceed 1.

The significance of a symptom is S = I / I0 where I0 is the entropy of the
label, collapsed to absence vs presence by default.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .discretize import DiscretizedView, discretize
from .errors import DegenerateLabels, EmptyDistribution, NoCoverage

MI_MODES = ("standard", "literal")
I0_MODES = ("binary", "multiclass")


def entropy(weights) -> float:
    """Shannon entropy in bits of a nonnegative weight vector (normalized here)."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or (w < 0).any():
        raise EmptyDistribution("weights must be nonnegative and non-empty")
    total = w.sum()
    if not total > 0:
        raise EmptyDistribution("weights sum to zero")
    p = w / total
    p = p[p > 0]  # tiny weights can underflow to zero once normalized
    return float(-(p * np.log2(p)).sum()) + 0.0


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """Joint counts n(f, c) with symptom bins as rows and classes as columns."""
    counts: np.ndarray
    smoothing: float = 0.0

    @classmethod
    def from_codes(cls, f_codes, c_codes, n_f=None, n_c=None, smoothing=0.0):
        """Count co-observed pairs; negative codes mean missing and are skipped."""
        f = np.asarray(f_codes, dtype=int)
        c = np.asarray(c_codes, dtype=int)
        keep = (f >= 0) & (c >= 0)
        f, c = f[keep], c[keep]
        n_f = n_f if n_f is not None else (int(f.max()) + 1 if f.size else 0)
        n_c = n_c if n_c is not None else (int(c.max()) + 1 if c.size else 0)
        counts = np.zeros((n_f, n_c), dtype=float)
        np.add.at(counts, (f, c), 1.0)
        return cls(counts, smoothing)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def joint(self) -> np.ndarray:
        n = self.counts + self.smoothing
        total = n.sum()
        if not total > 0:
            raise NoCoverage("no co-observed records")
        return n / total

    @property
    def row_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def entropies(self) -> tuple[float, float, float]:
        """(H(F), H(C), H(F,C)) in bits."""
        p = self.joint
        return entropy(p.sum(axis=1)), entropy(p.sum(axis=0)), entropy(p)

    def mutual_information(self, mode: str = "standard") -> float:
        h_f, h_c, h_fc = self.entropies()
        if mode == "standard":
            # clip float noise; MI is nonnegative
            return max(h_f + h_c - h_fc, 0.0)
        if mode == "literal":
            return h_fc + h_f + h_c
        raise ValueError(f"unknown mi mode {mode!r}")


def collapse_labels(labels, i0_mode: str = "binary") -> np.ndarray:
    """Map class codes to 0 (absence) / 1 (any presence); -1 stays missing."""
    labels = np.asarray(labels, dtype=int)
    if i0_mode == "multiclass":
        return labels
    if i0_mode != "binary":
        raise ValueError(f"unknown i0 mode {i0_mode!r}")
    return np.where(labels < 0, -1, (labels > 0).astype(int))


def mutual_information(attribute_id: int, view: DiscretizedView, labels,
                       mode: str = "standard") -> float:
    """I(F;C) in bits between a binned attribute and ``labels`` (codes, -1 missing)."""
    labels = np.asarray(labels, dtype=int)
    f = view.column(attribute_id)
    if not ((f >= 0) & (labels >= 0)).any():
        raise NoCoverage(f"attribute {attribute_id} never observed alongside a label")
    table = ProbabilityTable.from_codes(f, labels)
    return table.mutual_information(mode)


def prior_entropy(labels, i0_mode: str = "binary") -> float:
    """I0: entropy of the label, by default over absence vs presence."""
    labels = np.asarray(labels, dtype=int)
    collapsed = collapse_labels(labels, i0_mode)
    collapsed = collapsed[collapsed >= 0]
    if collapsed.size == 0:
        raise EmptyDistribution("no labelled records")
    return entropy(np.bincount(collapsed))


@dataclass(frozen=True)
class SignificanceScore:
    attribute_id: int
    I: float
    I0: float
    S: float
    rank: int = 0
    name: str = ""


def significance(attribute_id: int, view: DiscretizedView, labels, mode: str = "standard",
                 i0_mode: str = "binary", name: str = "") -> SignificanceScore:
    """S(F,C) = I(F,C) / I0, with I measured against the same label collapse as I0."""
    collapsed = collapse_labels(labels, i0_mode)
    i0 = prior_entropy(labels, i0_mode)
    if i0 == 0:
        raise DegenerateLabels("prior entropy is zero: every record has the same class")
    i = mutual_information(attribute_id, view, collapsed, mode)
    return SignificanceScore(attribute_id, i, i0, i / i0, 0, name)


def rank_symptoms(dataset, subset, mode: str = "standard", i0_mode: str = "binary",
                  view: DiscretizedView | None = None) -> list[SignificanceScore]:
    """Score every retained attribute and rank by descending S (ties: lower id).

    An empty subset gives an empty ranking.
    """
    retained = list(getattr(subset, "retained", subset))
    if not retained:
        return []
    if view is None:
        view = discretize(dataset)
    labels = dataset.labels
    scores = [significance(a, view, labels, mode, i0_mode, dataset.schema[a].name)
              for a in retained]
    scores.sort(key=lambda s: (-s.S, s.attribute_id))
    return [SignificanceScore(s.attribute_id, s.I, s.I0, s.S, rank, s.name)
            for rank, s in enumerate(scores, 1)]


def ranking_to_csv(scores) -> str:
    lines = ["rank,attribute_id,name,I_bits,I0_bits,S"]
    for s in scores:
        lines.append(f"{s.rank},{s.attribute_id},{s.name},{s.I!r},{s.I0!r},{s.S!r}")
    return "\n".join(lines) + "\n"


def ranking_from_csv(text: str) -> list[SignificanceScore]:
    rows = csv.DictReader(io.StringIO(text))
    return [SignificanceScore(int(r["attribute_id"]), float(r["I_bits"]), float(r["I0_bits"]),
                              float(r["S"]), int(r["rank"]), r["name"]) for r in rows]
