"""Continuous datasets: an immutable float matrix with named columns.

Ingestion from CSV reports the exact row and column of any bad cell, and
emission writes full-precision decimal text so that a write/read cycle
reproduces the matrix bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError


@dataclass(frozen=True)
class ContinuousData:
    """An N x n matrix of finite floats with one name per column."""

    names: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataFormatError("values must be a 2-d array")
        if values.shape[0] < 1:
            raise DataFormatError("dataset needs at least one row")
        if values.shape[1] != len(self.names):
            raise DataFormatError(
                f"{values.shape[1]} columns but {len(self.names)} names"
            )
        if len(set(self.names)) != len(self.names):
            raise DataFormatError("duplicate variable names")
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataFormatError(
                f"non-finite value at row {bad[0]}, column '{self.names[bad[1]]}'"
            )
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def take_rows(self, rows: np.ndarray) -> "ContinuousData":
        return ContinuousData(self.names, self.values[rows])

    def reorder(self, order: list[int]) -> "ContinuousData":
        """Permute columns; order[k] is the source index of new column k."""
        return ContinuousData(
            tuple(self.names[i] for i in order), self.values[:, order]
        )


def read_csv(path: str | Path) -> ContinuousData:
    """Load a header-plus-numeric-rows CSV, diagnosing any unparseable cell."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        rows = []
        for ridx, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(names):
                raise DataFormatError(
                    f"{path}: row {ridx} has {len(row)} cells, expected {len(names)}"
                )
            parsed = []
            for cidx, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {ridx}, column '{names[cidx]}': "
                        f"could not parse {cell!r} as a number"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return ContinuousData(tuple(names), np.array(rows, dtype=float))


def write_csv(data: ContinuousData, path: str | Path) -> None:
    """Write with repr-precision decimals so reading back is exact."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        for row in data.values:
            writer.writerow([repr(float(v)) for v in row])
