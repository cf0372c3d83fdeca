"""
Spatial datasets for spatial-mem

This module owns the observed data every other component consumes:
1. Location and SpatialDataset value types (immutable after construction)
2. CSV ingestion with column selection by name (DatasetSchema)
3. CSV serialization that round-trips through load_dataset

The design matrix `mu` always carries the intercept as column 0 and the
boolean `error_mask` marks the columns observed with classical measurement
error. The intercept never carries error.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from core.errors import DatasetError, DuplicateLocationError

logger = logging.getLogger("spatial_mem.data")

INTERCEPT = "intercept"

# 17 significant digits identify every double; read back with read_csv_exact
CSV_FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Location:
    """A point of the study region in projected distance units"""
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise DatasetError(f"Location coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class DatasetSchema:
    """Column names used to read a dataset from CSV"""
    x: str = "x"
    y: str = "y"
    response: str = "response"
    covariates: Sequence[str] = ()
    # None means every covariate is error-prone
    error_prone: Optional[Sequence[str]] = None

    def mask(self) -> np.ndarray:
        """Error mask over [intercept, *covariates]"""
        flagged = set(self.covariates if self.error_prone is None else self.error_prone)
        unknown = flagged - set(self.covariates)
        if unknown:
            raise DatasetError(f"Error-prone columns not among covariates: {sorted(unknown)}")
        return np.array([False] + [c in flagged for c in self.covariates], dtype=bool)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpatialDataset:
    """
    Observations at n distinct locations

    Attributes:
        coords: (n, 2) array of location coordinates
        y: (n,) response vector
        mu: (n, p) observed covariate matrix, column 0 all ones
        error_mask: (p,) boolean, True for error-prone columns
        names: column names of mu (intercept first)
    """
    coords: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    error_mask: np.ndarray
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        coords = _frozen(self.coords)
        y = _frozen(self.y)
        mu = _frozen(self.mu)
        mask = _frozen(self.error_mask, dtype=bool)

        if coords.ndim != 2 or coords.shape[1] != 2:
            raise DatasetError(f"coords must have shape (n, 2), got {coords.shape}")
        n = coords.shape[0]
        if n < 1:
            raise DatasetError("A dataset needs at least one observation")
        if y.shape != (n,):
            raise DatasetError(f"y must have length {n}, got shape {y.shape}")
        if mu.ndim != 2 or mu.shape[0] != n:
            raise DatasetError(f"mu must have {n} rows, got shape {mu.shape}")
        p = mu.shape[1]
        if mask.shape != (p,):
            raise DatasetError(f"error_mask must have length {p}, got shape {mask.shape}")
        if not np.all(np.isfinite(coords)) or not np.all(np.isfinite(y)) or not np.all(np.isfinite(mu)):
            raise DatasetError("Dataset contains non-finite values")
        if not np.all(mu[:, 0] == 1.0):
            raise DatasetError("Column 0 of mu must be the intercept (all ones)")
        if mask[0]:
            raise DatasetError("The intercept column cannot be error-prone")

        _check_distinct(coords)

        names = list(self.names) or [INTERCEPT] + [f"x{j}" for j in range(1, p)]
        if len(names) != p:
            raise DatasetError(f"Expected {p} column names, got {len(names)}")

        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "error_mask", mask)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def p(self) -> int:
        return self.mu.shape[1]

    @property
    def locations(self) -> List[Location]:
        return [Location(float(a), float(b)) for a, b in self.coords]

    @property
    def has_error_prone(self) -> bool:
        return bool(self.error_mask.any())

    def subset(self, rows: Sequence[int]) -> "SpatialDataset":
        """Rows `rows` (in the given order) as a new dataset"""
        idx = np.asarray(rows, dtype=int)
        return SpatialDataset(self.coords[idx], self.y[idx], self.mu[idx],
                              self.error_mask, list(self.names))

    def without_measurement_error(self) -> "SpatialDataset":
        """Same data with every column treated as error-free (naive model view)"""
        return SpatialDataset(self.coords, self.y, self.mu,
                              np.zeros(self.p, dtype=bool), list(self.names))


def _check_distinct(coords: np.ndarray):
    """Raise DuplicateLocationError on the first pair of identical coordinates"""
    if coords.shape[0] < 2:
        return
    order = np.lexsort((coords[:, 1], coords[:, 0]))
    sorted_coords = coords[order]
    same = np.all(sorted_coords[1:] == sorted_coords[:-1], axis=1)
    if same.any():
        k = int(np.argmax(same))
        i, j = sorted(int(v) for v in (order[k], order[k + 1]))
        raise DuplicateLocationError(i, j)


def build_dataset(coords, y, covariates=None, error_mask=None,
                  names: Optional[Sequence[str]] = None) -> SpatialDataset:
    """
    Assemble a dataset, prepending the intercept column

    Args:
        coords: (n, 2) coordinates
        y: (n,) response
        covariates: (n, k) covariates without intercept, or None
        error_mask: (k,) flags for the covariates; defaults to all True
        names: k covariate names
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    cov = np.zeros((n, 0)) if covariates is None else np.asarray(covariates, dtype=float).reshape(n, -1)
    k = cov.shape[1]
    mask = np.ones(k, dtype=bool) if error_mask is None else np.asarray(error_mask, dtype=bool)
    mu = np.column_stack([np.ones(n), cov])
    col_names = [INTERCEPT] + (list(names) if names is not None else [f"x{j}" for j in range(1, k + 1)])
    return SpatialDataset(coords, np.asarray(y, dtype=float), mu,
                          np.concatenate([[False], mask]), col_names)


def load_dataset(path: Union[str, Path], schema: DatasetSchema) -> SpatialDataset:
    """
    Read a dataset from a UTF-8 CSV file with a header row

    Raises:
        DatasetError: missing file, missing column, non-numeric cell,
            fewer than two rows, or duplicate locations
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"Data file not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, encoding="utf-8", skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetError(f"Cannot parse {path}: {e}") from e

    columns = [schema.x, schema.y, schema.response, *schema.covariates]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DatasetError(f"{path}: missing column(s) {missing}")

    values = np.empty((len(frame), len(columns)))
    for j, col in enumerate(columns):
        parsed = np.array([_cell_float(cell) for cell in frame[col]], dtype=float)
        bad = ~np.isfinite(parsed)
        if bad.any():
            row = int(np.argmax(bad))
            raise DatasetError(
                f"{path}: non-numeric value {frame[col].iloc[row]!r} at row {row + 1}, column '{col}'"
            )
        values[:, j] = parsed

    if values.shape[0] < 2:
        raise DatasetError(f"{path}: at least 2 rows required, found {values.shape[0]}")

    dataset = build_dataset(
        coords=values[:, :2],
        y=values[:, 2],
        covariates=values[:, 3:],
        error_mask=schema.mask()[1:],
        names=list(schema.covariates),
    )
    logger.info(f"✅ Loaded {dataset.n} observations with {dataset.p - 1} covariate(s) from {path}")
    return dataset


def read_csv_exact(path: Union[str, Path], **kwargs) -> pd.DataFrame:
    """pd.read_csv with the correctly rounded float parser"""
    return pd.read_csv(path, float_precision="round_trip", **kwargs)


def _cell_float(cell) -> float:
    try:
        return float(cell)
    except (TypeError, ValueError):
        return float("nan")


def dataset_frame(dataset: SpatialDataset, schema: Optional[DatasetSchema] = None) -> pd.DataFrame:
    """Tabular view of a dataset (intercept column omitted)"""
    schema = schema or DatasetSchema(covariates=dataset.names[1:])
    data = {
        schema.x: dataset.coords[:, 0],
        schema.y: dataset.coords[:, 1],
        schema.response: dataset.y,
    }
    for j, name in enumerate(schema.covariates, start=1):
        data[name] = dataset.mu[:, j]
    return pd.DataFrame(data)


def save_dataset(dataset: SpatialDataset, path: Union[str, Path],
                 schema: Optional[DatasetSchema] = None) -> Path:
    """Write a dataset as CSV readable by load_dataset with the same schema"""
    path = Path(path)
    dataset_frame(dataset, schema).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path
