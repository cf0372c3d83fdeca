"""
Fixed per-dataset quantities shared by every scoring function and sampler step
"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from core.correlation.kernels import KernelKind, KernelSpec, build_corr_matrix
from core.data.dataset import SpatialDataset
from core.data.distances import DistanceMatrix, median_distance, pairwise_distances


@dataclass(frozen=True)
class ModelContext:
    """A dataset with its distance matrix, median distance and kernel family"""
    data: SpatialDataset
    kind: KernelKind
    dist: DistanceMatrix
    med_d: float

    @classmethod
    def build(cls, data: SpatialDataset, kernel: Union[KernelSpec, KernelKind, str]) -> "ModelContext":
        dist = pairwise_distances(data.coords)
        med_d = median_distance(dist) if data.n >= 2 else 1.0
        return cls(data=data, kind=kernel_kind(kernel), dist=dist, med_d=med_d)

    def corr(self, theta) -> np.ndarray:
        """C_theta for this dataset"""
        return build_corr_matrix(self.dist, KernelSpec(self.kind, tuple(theta)))


def kernel_kind(kernel: Union[KernelSpec, KernelKind, str]) -> KernelKind:
    """Kernel family of a spec, a kind, or its name"""
    return KernelKind(getattr(kernel, "kind", kernel))
