"""Data containers, CSV ingestion, cross-fitting partitions and undersampling.

The observation triple (X_i, D_i, Y_i) is stored column-wise in a
:class:`Dataset`. All arrays are frozen after construction so datasets can be
shared freely across worker processes; every random operation takes an
explicit :class:`numpy.random.Generator` so results are reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyResult,
    InvalidK,
    InvalidTreatment,
    MissingColumn,
    OutOfRange,
    ParseError,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Covariate matrix ``x`` (n, p), binary treatment ``d`` and outcome ``y``.

    Immutable; invariants are checked on construction: matching row counts
    (n >= 2), d strictly in {0, 1}, and finite x and y entries.
    """

    x: np.ndarray
    d: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = _frozen(np.asarray(self.x, dtype=np.float64))
        d = _frozen(np.asarray(self.d, dtype=np.int64))
        y = _frozen(np.asarray(self.y, dtype=np.float64))
        if x.ndim != 2:
            raise OutOfRange(f"x must be 2-dimensional, got ndim={x.ndim}")
        if d.ndim != 1 or y.ndim != 1:
            raise OutOfRange("d and y must be 1-dimensional")
        n = x.shape[0]
        if n < 2:
            raise OutOfRange(f"need at least 2 rows, got {n}")
        if d.shape[0] != n or y.shape[0] != n:
            raise OutOfRange(
                f"row counts differ: x has {n}, d has {d.shape[0]}, y has {y.shape[0]}"
            )
        if not np.isin(d, (0, 1)).all():
            bad = d[~np.isin(d, (0, 1))][0]
            raise InvalidTreatment(f"treatment values must be 0 or 1, found {bad}")
        if not np.isfinite(x).all() or not np.isfinite(y).all():
            raise OutOfRange("x and y entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, indices: np.ndarray) -> "Dataset":
        """Row subset in the given index order."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.x[idx], self.d[idx], self.y[idx])


@dataclass(frozen=True)
class CsvSchema:
    """Column names for CSV ingestion.

    ``covariates=None`` means every numeric column other than the outcome and
    treatment columns, in header order.
    """

    outcome: str = "y"
    treatment: str = "d"
    covariates: tuple[str, ...] | None = None


@dataclass(frozen=True)
class FoldPartition:
    """K disjoint index sets covering {0..n-1}, sizes differing by at most 1."""

    folds: tuple[np.ndarray, ...]
    n: int = field(default=0)

    def __post_init__(self) -> None:
        folds = tuple(_frozen(np.asarray(f, dtype=np.intp)) for f in self.folds)
        k = len(folds)
        n = self.n if self.n else sum(f.size for f in folds)
        if not 2 <= k <= n:
            raise InvalidK(f"need 2 <= K <= n, got K={k}, n={n}")
        sizes = [f.size for f in folds]
        if max(sizes) - min(sizes) > 1:
            raise InvalidK(f"fold sizes differ by more than 1: {sizes}")
        combined = np.concatenate(folds)
        if combined.size != n or not np.array_equal(np.sort(combined), np.arange(n)):
            raise InvalidK("folds must disjointly cover 0..n-1")
        object.__setattr__(self, "folds", folds)
        object.__setattr__(self, "n", n)

    @property
    def k(self) -> int:
        return len(self.folds)

    def complement(self, k: int) -> np.ndarray:
        """All indices outside fold k, in ascending order."""
        mask = np.ones(self.n, dtype=bool)
        mask[self.folds[k]] = False
        return np.flatnonzero(mask)


def partition_folds(n: int, k: int, rng: np.random.Generator) -> FoldPartition:
    """Uniformly random partition of {0..n-1} into k folds of near-equal size.

    The first (n mod k) folds receive one extra index. Deterministic for a
    given generator state.
    """
    if not 2 <= k <= n:
        raise InvalidK(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = rng.permutation(n)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(np.sort(perm[start : start + size]))
        start += size
    return FoldPartition(tuple(folds), n)


def undersample_controls(
    indices: np.ndarray,
    d: np.ndarray,
    gamma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Keep every treated index and each control index with probability gamma.

    Returns the surviving subset of ``indices`` in their original order.
    Raises :class:`EmptyResult` if nothing survives.
    """
    if not 0.0 < gamma <= 1.0:
        raise OutOfRange(f"gamma must be in (0, 1], got {gamma}")
    idx = np.asarray(indices, dtype=np.intp)
    d = np.asarray(d)
    keep = (d[idx] == 1) | (rng.random(idx.size) < gamma)
    survivors = idx[keep]
    if survivors.size == 0:
        raise EmptyResult("no treated present and no controls survived the draw")
    return survivors


def load_csv(path: str, schema: CsvSchema = CsvSchema()) -> Dataset:
    """Read a headered CSV into a :class:`Dataset`.

    The outcome and treatment columns are looked up by name; the remaining
    numeric columns become covariates in header order (or exactly
    ``schema.covariates`` when given). Rows are kept in file order.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        for name in (schema.outcome, schema.treatment):
            if name not in header:
                raise MissingColumn(f"{path}: column '{name}' not found in header")
        if schema.covariates is None:
            cov_names = [
                h for h in header if h not in (schema.outcome, schema.treatment)
            ]
        else:
            cov_names = list(schema.covariates)
            for name in cov_names:
                if name not in header:
                    raise MissingColumn(f"{path}: column '{name}' not found in header")
        y_col = header.index(schema.outcome)
        d_col = header.index(schema.treatment)
        cov_cols = [header.index(name) for name in cov_names]

        ys: list[float] = []
        ds: list[int] = []
        xs: list[list[float]] = []
        for row_idx, row in enumerate(reader):
            def cell(col: int, name: str) -> float:
                try:
                    value = float(row[col])
                except (ValueError, IndexError):
                    raise ParseError(
                        f"{path}: row {row_idx}, column '{name}': "
                        f"cannot parse {row[col]!r} as a number"
                        if col < len(row)
                        else f"{path}: row {row_idx}: missing column '{name}'"
                    ) from None
                if math.isnan(value):
                    raise ParseError(
                        f"{path}: row {row_idx}, column '{name}': missing value"
                    )
                return value

            d_val = cell(d_col, schema.treatment)
            if d_val not in (0.0, 1.0):
                raise InvalidTreatment(
                    f"{path}: row {row_idx}: treatment value {d_val} not in {{0, 1}}"
                )
            ys.append(cell(y_col, schema.outcome))
            ds.append(int(d_val))
            xs.append([cell(c, name) for c, name in zip(cov_cols, cov_names)])

    return Dataset(np.array(xs, dtype=np.float64), np.array(ds), np.array(ys))


def write_csv(data: Dataset, path: str, schema: CsvSchema = CsvSchema()) -> None:
    """Write a dataset back to CSV, round-tripping doubles bit-exactly.

    Covariate columns are named x1..xp unless the schema lists names.
    """
    if schema.covariates is not None:
        cov_names = list(schema.covariates)
    else:
        cov_names = [f"x{j + 1}" for j in range(data.p)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([schema.outcome, schema.treatment, *cov_names])
        for i in range(data.n):
            writer.writerow(
                [repr(float(data.y[i])), int(data.d[i])]
                + [repr(float(v)) for v in data.x[i]]
            )
