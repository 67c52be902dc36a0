"""Labeled binary datasets, class bookkeeping and feature subspaces.

Feature indices are 0-based everywhere inside the package. Conversion to the
1-based labels used in files and printed output happens in :mod:`rase.io` and
:mod:`rase.cli` only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DataError, EmptyClass, IndexOutOfRange, InvalidBound


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """An ``n x p`` feature matrix with binary labels.

    Arrays are copied on construction and frozen, so a dataset can be shared
    between worker threads without locking.
    """

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        y = np.array(self.y, copy=True)
        if X.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(
                f"labels have length {y.shape[0] if y.ndim == 1 else y.shape}, "
                f"expected {X.shape[0]}")
        if X.shape[1] < 1:
            raise DataError("dataset has no feature columns")
        bad = ~np.isfinite(X).all(axis=1)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DataError(f"non-finite feature value in row {row}")
        if y.size and not np.isin(y, (0, 1)).all():
            row = int(np.flatnonzero(~np.isin(y, (0, 1)))[0])
            raise DataError(f"label {y[row]!r} in row {row} is not 0 or 1")
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y.astype(np.int64)))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class ClassSplit:
    indices0: np.ndarray
    indices1: np.ndarray

    @property
    def n0(self):
        return self.indices0.shape[0]

    @property
    def n1(self):
        return self.indices1.shape[0]

    @property
    def n(self):
        return self.n0 + self.n1

    @property
    def pi0_hat(self):
        return self.n0 / self.n

    @property
    def pi1_hat(self):
        return self.n1 / self.n


def class_split(dataset: LabeledDataset, require_both=True) -> ClassSplit:
    """Partition row indices by label.

    With ``require_both`` (the fitting context) an empty class raises
    :class:`EmptyClass`.
    """
    y = dataset.y
    split = ClassSplit(_readonly(np.flatnonzero(y == 0)),
                       _readonly(np.flatnonzero(y == 1)))
    if require_both and (split.n0 == 0 or split.n1 == 0):
        missing = 0 if split.n0 == 0 else 1
        raise EmptyClass(f"class {missing} has no rows")
    return split


@dataclass(frozen=True)
class Subspace:
    """A sorted set of distinct 0-based feature indices."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if not idx:
            raise InvalidBound("a subspace needs at least one feature")
        if len(set(idx)) != len(idx):
            raise InvalidBound(f"duplicate feature index in {idx}")
        if idx[0] < 0:
            raise IndexOutOfRange(f"negative feature index {idx[0]}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_one_based(cls, labels: Iterable[int]) -> "Subspace":
        return cls(tuple(int(i) - 1 for i in labels))

    def one_based(self):
        return [i + 1 for i in self.indices]

    @property
    def array(self):
        return np.asarray(self.indices, dtype=np.intp)

    def check(self, p, D=None):
        if self.indices[-1] >= p:
            raise IndexOutOfRange(
                f"feature {self.indices[-1] + 1} (1-based) exceeds p={p}")
        if D is not None and len(self) > D:
            raise InvalidBound(f"subspace size {len(self)} exceeds D={D}")
        return self

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __lt__(self, other):
        # size first, then lexicographic: the tie-break order used everywhere
        return (len(self), self.indices) < (len(other), other.indices)


def full_subspace(p) -> Subspace:
    return Subspace(tuple(range(p)))


def restrict(dataset: LabeledDataset, s) -> LabeledDataset:
    """Column slice of ``dataset`` onto subspace ``s`` (rows untouched)."""
    if not isinstance(s, Subspace):
        s = Subspace(tuple(s))
    s.check(dataset.p)
    return LabeledDataset(dataset.X[:, s.array], dataset.y)
