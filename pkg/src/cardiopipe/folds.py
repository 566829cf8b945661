"""Seeded stratified k-fold assignment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewRecords


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[int, ...], ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def assignment(self, n: int) -> np.ndarray:
        """Fold index per record position; -1 for records outside every fold."""
        out = np.full(n, -1, dtype=int)
        for f, members in enumerate(self.folds):
            out[list(members)] = f
        return out

    def splits(self):
        for f, test in enumerate(self.folds):
            train = tuple(sorted(i for g, other in enumerate(self.folds) if g != f for i in other))
            yield train, test


def stratified_folds(labels, k: int, seed: int = 0) -> FoldPlan:
    """Split labelled positions (label >= 0) into ``k`` stratified folds.

    Each class is shuffled with a seeded generator and dealt round-robin.
    The deal continues across classes from where the previous class
    stopped, which keeps fold sizes within one of each other.
    """
    labels = np.asarray(labels, dtype=int)
    labelled = int((labels >= 0).sum())
    if k < 2 or labelled < k:
        raise TooFewRecords(f"cannot make {k} folds from {labelled} labelled records")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    position = 0
    for cls in np.unique(labels[labels >= 0]):
        members = np.flatnonzero(labels == cls)
        rng.shuffle(members)
        for i in members:
            folds[position % k].append(int(i))
            position += 1
    return FoldPlan(tuple(tuple(sorted(f)) for f in folds), seed)


def stratified_kfold(dataset, k: int = 5, seed: int = 0) -> FoldPlan:
    return stratified_folds(dataset.labels, k, seed)
