"""
Built-in 97 + 11 location layout on the 50 x 50 study square

The 97 fitting locations are a pseudo-regular jittered grid, generated once
and frozen in data/fitting_locations.csv:
1. split [0, 50]^2 into a 10 x 10 lattice of 5 x 5 cells
2. drop the three cells listed in DROPPED_CELLS
3. place one point uniformly in the central 3 x 3 part of each remaining cell,
   rounded to 6 decimals, rows ordered x-fastest over cells

The 11 hold-out locations are fixed coordinates.
"""
from functools import lru_cache
from pathlib import Path
from typing import Tuple

import numpy as np

from core.data.dataset import read_csv_exact
from core.errors import DatasetError

LAYOUT_FILE = Path(__file__).resolve().parent / "data" / "fitting_locations.csv"
N_FITTING = 97
CELL = 5.0
DROPPED_CELLS = ((0, 9), (9, 0), (5, 5))

HOLDOUT_COORDS = np.array([
    [14.143578, 8.449528],
    [13.610791, 17.782726],
    [9.004231, 24.223948],
    [8.507509, 37.369297],
    [18.034563, 27.378832],
    [24.829648, 20.148889],
    [22.677188, 38.815286],
    [33.783750, 39.866913],
    [33.151787, 23.054762],
    [43.535390, 36.435227],
    [38.923097, 13.050401],
])
HOLDOUT_COORDS.setflags(write=False)


@lru_cache(maxsize=1)
def _frozen_points() -> np.ndarray:
    if not LAYOUT_FILE.exists():
        raise DatasetError(f"Built-in layout file missing: {LAYOUT_FILE}")
    points = read_csv_exact(LAYOUT_FILE)[["x", "y"]].to_numpy(dtype=float)
    if points.shape != (N_FITTING, 2):
        raise DatasetError(f"{LAYOUT_FILE} must hold {N_FITTING} (x, y) rows, found {points.shape[0]}")
    points.setflags(write=False)
    return points


def fitting_locations() -> np.ndarray:
    """(97, 2) jittered lattice points, row-major over cells"""
    return _frozen_points().copy()


def builtin_layout() -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        (coords (108, 2), holdout_rows): the 97 fitting points followed by the
        11 hold-out points, and the row indices of the latter
    """
    coords = np.vstack([fitting_locations(), HOLDOUT_COORDS])
    return coords, np.arange(coords.shape[0] - HOLDOUT_COORDS.shape[0], coords.shape[0])
