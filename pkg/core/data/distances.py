"""
Euclidean distance computations between locations
"""
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform, cdist

from core.data.dataset import Location, SpatialDataset, _check_distinct
from core.errors import DatasetError


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric n x n matrix of pairwise Euclidean distances"""
    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def upper(self) -> np.ndarray:
        """Off-diagonal upper-triangle entries in row-major order"""
        return self.d[np.triu_indices(self.n, k=1)]


def _as_coords(locations: Union[Sequence[Location], np.ndarray, SpatialDataset]) -> np.ndarray:
    if isinstance(locations, SpatialDataset):
        return locations.coords
    if isinstance(locations, np.ndarray):
        return np.asarray(locations, dtype=float).reshape(-1, 2)
    return np.array([[loc.x, loc.y] for loc in locations], dtype=float).reshape(-1, 2)


def pairwise_distances(locations) -> DistanceMatrix:
    """
    Euclidean distance matrix of distinct locations

    The condensed upper triangle is computed once and mirrored, so the result
    is exactly symmetric with a zero diagonal.
    """
    coords = _as_coords(locations)
    if coords.shape[0] < 1:
        raise DatasetError("No locations given")
    _check_distinct(coords)
    if coords.shape[0] == 1:
        d = np.zeros((1, 1))
    else:
        d = squareform(pdist(coords, metric="euclidean"))
    d.setflags(write=False)
    return DistanceMatrix(d)


def cross_distances(a, b) -> np.ndarray:
    """(len(a), len(b)) Euclidean distances between two location sets"""
    return cdist(_as_coords(a), _as_coords(b), metric="euclidean")


def median_distance(d: DistanceMatrix) -> float:
    """Median of the n(n-1)/2 distinct pairwise distances (midpoint for even counts)"""
    if d.n < 2:
        raise DatasetError("median_distance needs at least two locations")
    return float(np.median(d.upper()))
