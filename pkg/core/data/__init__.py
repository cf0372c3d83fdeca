"""
spatial-mem data model: datasets, schemas and distances
"""

from .dataset import (Location, DatasetSchema, SpatialDataset, build_dataset,
                      load_dataset, save_dataset, dataset_frame, read_csv_exact,
                      CSV_FLOAT_FORMAT)
from .distances import DistanceMatrix, pairwise_distances, cross_distances, median_distance

__all__ = [
    'Location', 'DatasetSchema', 'SpatialDataset', 'build_dataset',
    'load_dataset', 'save_dataset', 'dataset_frame', 'read_csv_exact', 'CSV_FLOAT_FORMAT',
    'DistanceMatrix', 'pairwise_distances', 'cross_distances', 'median_distance',
]
