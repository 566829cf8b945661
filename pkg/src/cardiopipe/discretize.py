"""Equal-frequency binning of continuous attributes.

Categorical, binary and date-part attributes keep their own values as bins.
Every counting estimate downstream (entropy, mutual information, naive
Bayes tables) works on the integer codes produced here, with -1 for missing.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAttribute, UnseenBin
from .ingest import LABEL_ID, Dataset

DEFAULT_BINS = 4


@dataclass(frozen=True)
class BinSpec:
    """How one attribute maps values to bin codes.

    With ``edges`` (strictly increasing, first/last are the observed min and
    max) bin j covers ``[edges[j], edges[j+1])``, the last bin closed. With
    ``categories`` each listed value is its own bin.
    """
    attribute_id: int
    edges: tuple[float, ...] = ()
    categories: tuple[float, ...] = ()
    degenerate: bool = False

    def __post_init__(self):
        if bool(self.edges) == bool(self.categories):
            raise ValueError("BinSpec needs exactly one of edges or categories")
        seq = self.edges or self.categories
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError(f"attribute {self.attribute_id}: bin boundaries must increase")

    @property
    def n_bins(self) -> int:
        if self.edges:
            return max(len(self.edges) - 1, 1)
        return len(self.categories)

    def encode(self, values, warn: bool = True) -> np.ndarray:
        """Bin codes for ``values``; -1 where missing.

        Values outside the training range (or unknown categories) are
        clamped to the nearest bin with an UnseenBin warning.
        """
        values = np.asarray(values, dtype=float)
        codes = np.full(values.shape, -1, dtype=int)
        present = ~np.isnan(values)
        v = values[present]
        if self.edges:
            edges = np.asarray(self.edges)
            out = (v < edges[0]) | (v > edges[-1])
            codes[present] = np.searchsorted(edges[1:-1], v, side="right")
        else:
            cats = np.asarray(self.categories)
            idx = np.searchsorted(cats, v)
            lo = np.clip(idx - 1, 0, len(cats) - 1)
            hi = np.clip(idx, 0, len(cats) - 1)
            nearest = np.where(np.abs(cats[lo] - v) <= np.abs(cats[hi] - v), lo, hi)
            out = cats[nearest] != v
            codes[present] = nearest
        if warn and out.any():
            warnings.warn(
                f"attribute {self.attribute_id}: {int(out.sum())} value(s) outside training"
                " bins clamped to nearest bin",
                UnseenBin,
                stacklevel=2,
            )
        return codes

    def label(self, code: int) -> str:
        if self.categories:
            return f"{self.categories[code]:g}"
        return f"[{self.edges[code]:g},{self.edges[code + 1]:g}{']' if code == self.n_bins - 1 else ')'}"


def equal_frequency_edges(values, bins: int) -> tuple[tuple[float, ...], bool]:
    """Cut points for ``bins`` roughly equal-count bins over sorted ``values``.

    Cuts sit midway between neighbouring distinct values, so every bin is
    non-empty; a cut that would split a run of ties moves to the end of the
    run. Returns ``(edges, degenerate)``; degenerate means fewer distinct
    values than bins, in which case the caller should use categories.
    """
    v = np.sort(np.asarray(values, dtype=float))
    distinct = np.unique(v)
    if len(distinct) < bins:
        return tuple(distinct), True
    n = len(v)
    cuts = []
    last = 0
    for k in range(1, bins):
        j = -(-k * n // bins)  # ceil: first index of bin k
        j = max(j, last + 1)
        while j < n and v[j] == v[j - 1]:
            j += 1
        if j >= n:
            break
        cuts.append((v[j - 1] + v[j]) / 2.0)
        last = j
    edges = (float(v[0]), *map(float, cuts), float(v[-1]))
    return edges, False


@dataclass(frozen=True, eq=False)
class DiscretizedView:
    """Bin specs plus the (n_records, 76) code matrix; -1 marks missing or unbinned."""
    specs: dict[int, BinSpec]
    codes: np.ndarray
    bins: int = DEFAULT_BINS
    degenerate: tuple[int, ...] = field(default=())

    def column(self, attribute_id: int) -> np.ndarray:
        return self.codes[:, attribute_id - 1]

    def n_bins(self, attribute_id: int) -> int:
        return self.specs[attribute_id].n_bins

    @property
    def bin_count(self) -> dict[int, int]:
        return {a: s.n_bins for a, s in self.specs.items()}

    def take(self, rows) -> "DiscretizedView":
        """Same bins, restricted to the given record positions."""
        codes = self.codes[np.asarray(rows, dtype=int)]
        codes.setflags(write=False)
        return DiscretizedView(self.specs, codes, self.bins, self.degenerate)


def discretize(dataset: Dataset, bins: int = DEFAULT_BINS) -> DiscretizedView:
    """Bin every symptom attribute and the label of ``dataset``.

    Continuous attributes get equal-frequency edges from their non-missing
    values. Other kinds keep documented categories plus any observed extras.
    Attributes without any observed value get no spec.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    schema = dataset.schema
    matrix = dataset.matrix
    codes = np.full(matrix.shape, -1, dtype=int)
    specs = {}
    degenerate = []
    wanted = schema.symptom_ids() + [LABEL_ID]
    for attribute_id in wanted:
        descriptor = schema[attribute_id]
        col = matrix[:, attribute_id - 1]
        observed = col[~np.isnan(col)] + 0.0  # -0.0 -> 0.0 so bins print cleanly
        if descriptor.kind == "continuous":
            if observed.size == 0:
                continue
            edges, is_degenerate = equal_frequency_edges(observed, bins)
            if is_degenerate:
                degenerate.append(attribute_id)
                spec = BinSpec(attribute_id, categories=edges, degenerate=True)
            else:
                spec = BinSpec(attribute_id, edges=edges)
        else:
            cats = np.union1d(np.asarray(descriptor.categories, dtype=float), observed)
            if cats.size == 0:
                continue
            spec = BinSpec(attribute_id, categories=tuple(map(float, cats)))
        specs[attribute_id] = spec
        codes[:, attribute_id - 1] = spec.encode(col, warn=False)
    if degenerate:
        warnings.warn(
            f"{dataset.name or 'dataset'}: attributes {degenerate} have fewer than {bins}"
            " distinct values; using one bin per value",
            DegenerateAttribute,
            stacklevel=2,
        )
    codes.setflags(write=False)
    return DiscretizedView(specs, codes, bins, tuple(degenerate))
