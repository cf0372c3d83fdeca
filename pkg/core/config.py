"""
Run configuration for spatial-mem

This module turns a YAML run file into the typed objects the library uses:
1. Data paths and CSV schema (paths resolved against the config file's folder)
2. Kernel choice and prior constants (Hyperparams)
3. Sampler settings, initial values and model variant (MEM or naive)
4. Simulation, prediction and sensitivity sections
5. Output directory and logging settings

Defaults are the simulation-study values; a file only needs to override what
differs. SPATIAL_MEM_LOG_LEVEL overrides logging.level.
"""
import copy
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from core.correlation.kernels import KernelKind, KernelSpec
from core.data.dataset import DatasetSchema, read_csv_exact
from core.errors import ConfigError
from core.mcmc.sampler import SamplerConfig
from core.model.params import Hyperparams, Params
from core.prediction.predictor import ConstantCovariates, GridSpec, TableCovariates
from core.simulation.layout import HOLDOUT_COORDS
from core.simulation.simulator import IDENTIFIABILITY_SET, SimSpec

LOG_LEVEL_ENV = "SPATIAL_MEM_LOG_LEVEL"

DEFAULTS: Dict[str, Any] = {
    "data": {
        "train": "data/train.csv",
        "test": "data/test.csv",
        "truth": "data/truth.csv",
        "schema": {"x": "x", "y": "y", "response": "response",
                   "covariates": ["mu"], "error_prone": ["mu"]},
    },
    "kernel": {"kind": "exponential"},
    "model": {"variant": "mem"},
    "hyperparams": Hyperparams().as_dict(),
    "sampler": {
        "n_iter": 75000, "burn_in": 25000, "thin": 10, "n_chains": 1, "workers": 1,
        "adapt": True, "target_acceptance": 0.35, "v_recovery": "min_norm",
        "progress_every": 5000, "mh_step_sizes": {}, "psrf_threshold": 1.1,
    },
    "init": {
        "beta": [1.5, 3.0], "sigma2": 2.8, "omega2": 3.0, "tau2": 0.1, "theta": [5.0],
        "latent_variance": 0.31, "latent_scale_is_sd": False, "dispersion": 0.5,
    },
    "simulation": {
        "beta": [0.5, 2.0], "sigma2": 1.0, "omega2": 1.1, "kernel": "exponential",
        "theta": [1.2], "x_mean": 3.0, "x_var": 0.2, "tau": float(np.sqrt(0.1)),
        "locations": "builtin", "holdout": "builtin",
        "identifiability": [list(t) for t in IDENTIFIABILITY_SET],
    },
    "prediction": {
        "points": "test",
        "grid": None,
        "covariates": None,
        "probs": [0.05, 0.5, 0.95],
        "conditioning": "latent",
        "evaluate": False,
    },
    "sensitivity": {"priors": [], "initial_values": []},
    "output": {"directory": "runs/latest"},
    "logging": {"level": "INFO", "file": None},
}


def _merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class RunConfig:
    """Configuration of one spatial-mem run"""

    def __init__(self, raw: Optional[Dict] = None, base_dir: Union[str, Path, None] = None,
                 path: Optional[Path] = None):
        raw = raw or {}
        self.path = path
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
        self.raw = copy.deepcopy(raw)
        self.data = _merge(DEFAULTS, raw)
        self.seed = raw.get("seed")

        env_level = os.getenv(LOG_LEVEL_ENV)
        if env_level:
            self.data["logging"]["level"] = env_level.upper()

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Read and validate a YAML config

        Raises:
            ConfigError: unreadable file or failed validation
        """
        from core.config_validator import ConfigValidator

        path = Path(path)
        is_valid, errors = ConfigValidator.validate_yaml_file(path)
        if not is_valid:
            raise ConfigError(f"Invalid configuration {path}", errors)
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
        return cls(raw, base_dir=path.parent, path=path)

    def section(self, name: str) -> Dict[str, Any]:
        return self.data[name]

    def resolve(self, value: Union[str, Path, None]) -> Optional[Path]:
        """Path relative to the config file's folder"""
        if value is None:
            return None
        p = Path(value).expanduser()
        return p if p.is_absolute() else (self.base_dir / p)

    def with_overrides(self, seed: Optional[int] = None, chains: Optional[int] = None,
                       workers: Optional[int] = None) -> "RunConfig":
        """Copy with command-line overrides applied"""
        raw = copy.deepcopy(self.raw)
        if seed is not None:
            raw["seed"] = seed
        if chains is not None:
            raw.setdefault("sampler", {})["n_chains"] = chains
        if workers is not None:
            raw.setdefault("sampler", {})["workers"] = workers
        return RunConfig(raw, base_dir=self.base_dir, path=self.path)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("A seed is required (config 'seed' or --seed)")
        return int(self.seed)

    @property
    def naive(self) -> bool:
        return str(self.data["model"]["variant"]).lower() == "naive"

    @property
    def output_dir(self) -> Path:
        return self.resolve(self.data["output"]["directory"])

    @property
    def log_level(self) -> str:
        return str(self.data["logging"]["level"]).upper()

    @property
    def log_file(self) -> Optional[Path]:
        return self.resolve(self.data["logging"].get("file"))

    @property
    def psrf_threshold(self) -> float:
        return float(self.data["sampler"]["psrf_threshold"])

    def get_schema(self) -> DatasetSchema:
        s = self.data["data"]["schema"]
        return DatasetSchema(x=s["x"], y=s["y"], response=s["response"],
                             covariates=tuple(s.get("covariates") or ()),
                             error_prone=s.get("error_prone"))

    def get_data_path(self, key: str) -> Optional[Path]:
        return self.resolve(self.data["data"].get(key))

    def get_kernel_kind(self) -> KernelKind:
        return KernelKind(self.data["kernel"]["kind"])

    def get_hyperparams(self, overrides: Optional[Dict] = None) -> Hyperparams:
        values = dict(self.data["hyperparams"])
        values.update(overrides or {})
        return Hyperparams(**{k: float(v) for k, v in values.items()})

    def get_sampler_config(self) -> SamplerConfig:
        s = self.data["sampler"]
        return SamplerConfig(
            n_iter=int(s["n_iter"]), burn_in=int(s["burn_in"]), thin=int(s["thin"]),
            n_chains=int(s["n_chains"]), mh_step_sizes=dict(s.get("mh_step_sizes") or {}),
            seed=self.require_seed(), naive=self.naive, adapt=bool(s["adapt"]),
            target_acceptance=float(s["target_acceptance"]), v_recovery=s["v_recovery"],
            workers=int(s["workers"]), progress_every=int(s["progress_every"]),
        )

    def get_initial_params(self, overrides: Optional[Dict] = None) -> Params:
        init = dict(self.data["init"])
        init.update(overrides or {})
        tau2 = 0.0 if self.naive else float(init["tau2"])
        if not self.naive and not tau2 > 0:
            raise ConfigError("Invalid initial values",
                              [f"init 'tau2' must be positive for the mem variant, got {tau2}"])
        return Params(beta=np.asarray(init["beta"], dtype=float), sigma2=float(init["sigma2"]),
                      omega2=float(init["omega2"]), tau2=tau2,
                      theta=tuple(float(t) for t in init["theta"]))

    def get_latent_init(self) -> Tuple[float, bool]:
        init = self.data["init"]
        return float(init["latent_variance"]), bool(init["latent_scale_is_sd"])

    def get_sim_spec(self, seed: Optional[int] = None) -> SimSpec:
        sim = self.data["simulation"]
        kind = KernelKind(sim["kernel"])
        kernel = KernelSpec(kind, tuple(float(t) for t in sim["theta"]))
        locations = None
        holdout = None
        if sim["locations"] != "builtin":
            locations = self._read_coords(sim["locations"])
            holdout = np.zeros((0, 2))
        if sim["holdout"] == "builtin":
            holdout = HOLDOUT_COORDS if locations is None else holdout
        elif isinstance(sim["holdout"], str):
            holdout = self._read_coords(sim["holdout"])
        elif sim["holdout"] is not None:
            holdout = np.asarray(sim["holdout"], dtype=float).reshape(-1, 2)
        return SimSpec(beta=tuple(float(b) for b in sim["beta"]), sigma2=float(sim["sigma2"]),
                       omega2=float(sim["omega2"]), kernel=kernel, x_mean=float(sim["x_mean"]),
                       x_var=float(sim["x_var"]), tau=float(sim["tau"]), locations=locations,
                       holdout=holdout, seed=self.require_seed() if seed is None else seed)

    def get_identifiability_triples(self) -> List[Tuple[float, float, float]]:
        return [tuple(float(v) for v in t) for t in self.data["simulation"]["identifiability"]]

    def get_grid(self) -> Optional[GridSpec]:
        grid = self.data["prediction"].get("grid")
        if not grid:
            return None
        return GridSpec(float(grid["x_min"]), float(grid["x_max"]), float(grid["y_min"]),
                        float(grid["y_max"]), int(grid["nx"]), int(grid["ny"]))

    def get_covariate_provider(self):
        cov = self.data["prediction"].get("covariates") or {}
        if "file" in cov:
            return TableCovariates.from_csv(self.resolve(cov["file"]), cov["columns"])
        if "constant" in cov:
            return ConstantCovariates(cov["constant"])
        raise ConfigError("prediction.covariates needs 'constant' or 'file' for grid prediction")

    def get_prediction_probs(self) -> List[float]:
        return [float(q) for q in self.data["prediction"]["probs"]]

    def get_sensitivity_settings(self, kind: str) -> List[Dict[str, Any]]:
        """kind is 'priors' or 'initial_values'"""
        return list(self.data["sensitivity"].get(kind) or [])

    def snapshot(self) -> Dict[str, Any]:
        """Effective configuration, as recorded in run manifests"""
        snap = copy.deepcopy(self.data)
        snap["seed"] = self.seed
        return snap

    def _read_coords(self, value: str) -> np.ndarray:
        path = self.resolve(value)
        if not path.exists():
            raise ConfigError(f"Coordinate file not found: {path}")
        frame = read_csv_exact(path)
        return frame.iloc[:, :2].to_numpy(dtype=float)
