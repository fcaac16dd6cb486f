"""CSV ingestion and the standardized dataset record."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .engine import RegressionData

__all__ = ["Dataset", "load_csv", "CsvFormatError"]


class CsvFormatError(ValueError):
    pass


@dataclass
class Dataset:
    """Response, design, and the affine bookkeeping needed to move fitted
    coefficients back to the original scale."""

    y: np.ndarray
    x: np.ndarray
    column_names: list
    col_mean: np.ndarray
    col_sd: np.ndarray
    y_mean: float
    standardized: bool = True
    demeaned: bool = True
    dropped_columns: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def to_regression_data(self) -> RegressionData:
        return RegressionData(self.x, self.y)

    def destandardize(self, beta_std: np.ndarray) -> tuple[np.ndarray, float]:
        """Original-scale coefficients and the implied intercept."""
        beta = beta_std / self.col_sd if self.standardized else np.asarray(beta_std, float)
        intercept = self.y_mean - float(self.col_mean @ beta) if self.demeaned else 0.0
        return beta, intercept


def _parse_cell(raw: str, row: int, col_name: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise CsvFormatError(
            f"non-numeric cell {raw!r} at row {row}, column '{col_name}'") from None


def load_csv(path, response_column: str, standardize: bool = True) -> Dataset:
    """Read an RFC-4180-style CSV with a header row into a Dataset.

    Zero-variance covariate columns are dropped with a warning; columns
    are standardized to unit sample standard deviation and y demeaned when
    ``standardize`` is set (the default, matching how the simulation
    studies treat covariates).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if response_column not in header:
            raise CsvFormatError(
                f"response column '{response_column}' not in header {header}")
        rows = []
        for i, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise CsvFormatError(f"row {i} has {len(row)} cells, expected {len(header)}")
            rows.append([_parse_cell(c.strip(), i, header[j]) for j, c in enumerate(row)])
    if len(rows) < 2:
        raise CsvFormatError("need at least two observations")
    mat = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(mat)):
        bad = np.argwhere(~np.isfinite(mat))[0]
        raise CsvFormatError(
            f"non-finite value at row {int(bad[0]) + 2}, column '{header[int(bad[1])]}'")
    yi = header.index(response_column)
    y = mat[:, yi]
    xcols = [j for j in range(len(header)) if j != yi]
    names = [header[j] for j in xcols]
    x = mat[:, xcols]

    sd = x.std(axis=0, ddof=1)
    keep = sd > 0
    dropped = [names[j] for j in range(len(names)) if not keep[j]]
    if dropped:
        warnings.warn(f"dropping zero-variance columns: {dropped}", stacklevel=2)
        x = x[:, keep]
        names = [n for n, k in zip(names, keep) if k]
        sd = sd[keep]
    mean = x.mean(axis=0)
    y_mean = float(y.mean())
    if standardize:
        x = (x - mean) / sd
        y = y - y_mean
    return Dataset(y=y, x=x, column_names=names, col_mean=mean, col_sd=sd,
                   y_mean=y_mean, standardized=standardize, demeaned=standardize,
                   dropped_columns=dropped)
