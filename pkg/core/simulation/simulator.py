"""
Synthetic data for the measurement-error study

Pipeline:
1. simulate_field: fixed true covariate x, Gaussian field eps ~ N(0, C_theta),
   y = beta0 + beta1 x + sigma eps + sigma omega rho
2. contaminate: observed surrogate mu = x - v with v ~ N(0, 1); the truth
   (x, v, tau) goes to a TruthRecord that fitting code never receives
3. holdout_split: train/test partition by coordinates

The MEM fit then reads the surrogate column as error-prone; the naive fit
reads the same column as exact.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.correlation.kernels import KernelSpec, build_corr_matrix
from core.correlation.spd import spd_factor
from core.data.dataset import CSV_FLOAT_FORMAT, SpatialDataset, build_dataset, read_csv_exact
from core.data.distances import pairwise_distances
from core.errors import DatasetError
from core.simulation.layout import builtin_layout, HOLDOUT_COORDS
from core.stats.rng import RngState

logger = logging.getLogger("spatial_mem.simulation")

SURROGATE = "mu"

# (sigma2, omega2, tau2) generating triples of the identifiability study
IDENTIFIABILITY_SET = ((0.85, 0.74, 0.08), (1.0, 1.1, 0.1), (1.33, 1.28, 0.19))


@dataclass(frozen=True)
class SimSpec:
    """
    Generating setup

    locations=None uses the built-in 97 + 11 layout; holdout=None then means
    its 11 hold-out points. Pass holdout=() for no hold-out.
    """
    beta: Tuple[float, float] = (0.5, 2.0)
    sigma2: float = 1.0
    omega2: float = 1.1
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec.exponential(1.2))
    x_mean: float = 3.0
    x_var: float = 0.2
    tau: float = math.sqrt(0.1)
    locations: Optional[np.ndarray] = None
    holdout: Optional[np.ndarray] = None
    seed: int = 0

    def __post_init__(self):
        if len(self.beta) != 2:
            raise ValueError("beta must hold (beta0, beta1)")
        for name in ("sigma2", "omega2", "x_var", "tau"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be non-negative, got {value}")

    def coords(self) -> np.ndarray:
        if self.locations is None:
            return builtin_layout()[0]
        return np.asarray(self.locations, dtype=float).reshape(-1, 2)

    def holdout_coords(self) -> np.ndarray:
        if self.holdout is None:
            return HOLDOUT_COORDS if self.locations is None else np.zeros((0, 2))
        return np.asarray(self.holdout, dtype=float).reshape(-1, 2)

    def with_(self, **changes) -> "SimSpec":
        return replace(self, **changes)

    def truth(self) -> Dict[str, float]:
        """Generating values keyed like chain columns"""
        values = {"beta_0": self.beta[0], "beta_1": self.beta[1], "sigma2": self.sigma2,
                  "omega2": self.omega2, "tau2": self.tau ** 2}
        values.update({f"theta_{k + 1}": t for k, t in enumerate(self.kernel.theta)})
        return values


@dataclass(frozen=True)
class SimulatedField:
    """Response generated from the true covariate; x is exact here"""
    coords: np.ndarray
    x: np.ndarray
    y: np.ndarray
    epsilon: np.ndarray
    rho: np.ndarray
    spec: SimSpec

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def dataset(self) -> SpatialDataset:
        """Dataset on the true covariate, no error-prone column"""
        return build_dataset(self.coords, self.y, self.x.reshape(-1, 1), error_mask=[False], names=["x_true"])


@dataclass(frozen=True)
class TruthRecord:
    """Hidden values kept for evaluation only"""
    coords: np.ndarray
    x: np.ndarray
    v: np.ndarray
    epsilon: np.ndarray
    tau: float

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x_coord": self.coords[:, 0], "y_coord": self.coords[:, 1],
                             "x_true": self.x, "v": self.v, "epsilon": self.epsilon,
                             "tau": np.full(len(self.x), self.tau)})

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TruthRecord":
        frame = read_csv_exact(path)
        tau = frame["tau"].to_numpy(dtype=float)
        return cls(coords=frame[["x_coord", "y_coord"]].to_numpy(dtype=float),
                   x=frame["x_true"].to_numpy(dtype=float), v=frame["v"].to_numpy(dtype=float),
                   epsilon=frame["epsilon"].to_numpy(dtype=float), tau=float(tau[0]) if len(tau) else 0.0)


def simulate_field(spec: SimSpec, rng: RngState) -> SimulatedField:
    """
    Draw x, eps and rho at SimSpec.coords() and form y

    Raises:
        NotPositiveDefiniteError: the correlation matrix cannot be factored
    """
    coords = spec.coords()
    n = coords.shape[0]
    x = rng.normal(spec.x_mean, math.sqrt(spec.x_var), size=n)
    corr = build_corr_matrix(pairwise_distances(coords), spec.kernel)
    eps = spd_factor(corr).lower @ rng.standard_normal(n)
    rho = rng.standard_normal(n)

    sigma = math.sqrt(spec.sigma2)
    y = spec.beta[0] + spec.beta[1] * x + sigma * eps + sigma * math.sqrt(spec.omega2) * rho
    logger.info(f"✅ Simulated field at {n} locations ({spec.kernel.kind.value} kernel)")
    return SimulatedField(coords=coords, x=x, y=y, epsilon=eps, rho=rho, spec=spec)


def contaminate(sim: SimulatedField, tau: float, rng: RngState) -> Tuple[SpatialDataset, TruthRecord]:
    """
    Replace x by the surrogate mu = x - v; y is untouched

    Returns:
        (dataset with the surrogate flagged error-prone, truth record)
    """
    if not (np.isfinite(tau) and tau >= 0):
        raise ValueError(f"tau must be non-negative, got {tau}")
    v = rng.standard_normal(sim.n)
    mu = sim.x - v
    data = build_dataset(sim.coords, sim.y, mu.reshape(-1, 1), error_mask=[True], names=[SURROGATE])
    truth = TruthRecord(coords=sim.coords, x=sim.x.copy(), v=v, epsilon=sim.epsilon.copy(), tau=float(tau))
    return data, truth


def locate_rows(data: SpatialDataset, coords: np.ndarray, tol: float = 1e-9) -> List[int]:
    """Row index of each coordinate pair in data"""
    rows = []
    for xy in np.asarray(coords, dtype=float).reshape(-1, 2):
        hits = np.flatnonzero(np.max(np.abs(data.coords - xy), axis=1) <= tol)
        if hits.size == 0:
            raise DatasetError(f"Hold-out location ({xy[0]}, {xy[1]}) is not in the dataset")
        rows.append(int(hits[0]))
    return rows


def holdout_split(data: SpatialDataset, holdout: Optional[Sequence] = None
                  ) -> Tuple[SpatialDataset, Optional[SpatialDataset]]:
    """
    Partition rows into train and test, keeping row order within each part

    Args:
        holdout: coordinates of the test locations; None means the built-in
            11 hold-out points; an empty sequence means no test set

    Returns:
        (train, test); test is None when the hold-out is empty
    """
    coords = HOLDOUT_COORDS if holdout is None else np.asarray(holdout, dtype=float).reshape(-1, 2)
    if coords.shape[0] == 0:
        return data, None
    test_rows = sorted(set(locate_rows(data, coords)))
    held = set(test_rows)
    train_rows = [i for i in range(data.n) if i not in held]
    return data.subset(train_rows), data.subset(test_rows)


def simulate_study(spec: SimSpec, rng: RngState):
    """
    Field, contamination and split in one pass

    Returns:
        (train, test, truth) with truth covering every simulated location
    """
    sim = simulate_field(spec, rng)
    data, truth = contaminate(sim, spec.tau, rng)
    train, test = holdout_split(data, spec.holdout_coords())
    logger.info(f"📊 Split {data.n} locations into {train.n} train / {0 if test is None else test.n} test")
    return train, test, truth


def identifiability_specs(base: SimSpec, triples: Sequence[Tuple[float, float, float]] = IDENTIFIABILITY_SET
                          ) -> List[SimSpec]:
    """One spec per (sigma2, omega2, tau2) generating triple"""
    return [base.with_(sigma2=s2, omega2=w2, tau=math.sqrt(t2)) for s2, w2, t2 in triples]
