"""
Chain files

One chain is persisted as:
- chain_<k>.csv           iteration, beta_0..beta_{p-1}, sigma2, omega2, tau2, theta_1[, theta_2]
- chain_<k>_epsilon.npy   (m, n) spatial field draws
- chain_<k>_v.npy         (m, n, p) measurement-error field draws
- chain_<k>.json          kernel, p, seed, acceptance rates, sampler settings

Plain .npy files are used for the latent fields because they are byte-stable
across reruns.
"""
import json
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from core.correlation.kernels import KernelKind
from core.data.dataset import CSV_FLOAT_FORMAT, read_csv_exact
from core.errors import DatasetError
from core.mcmc.sampler import Chain, SamplerConfig

logger = logging.getLogger("spatial_mem.chain_io")


def chain_frame(chain: Chain) -> pd.DataFrame:
    frame = pd.DataFrame(chain.params, columns=chain.names)
    frame.insert(0, "iteration", chain.iterations)
    return frame


def write_chain(chain: Chain, directory: Union[str, Path], stem: str = None) -> List[Path]:
    """Write the four chain files; returns their paths"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = stem or f"chain_{chain.chain_id}"

    csv_path = directory / f"{stem}.csv"
    chain_frame(chain).to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT)

    eps_path = directory / f"{stem}_epsilon.npy"
    v_path = directory / f"{stem}_v.npy"
    np.save(eps_path, np.ascontiguousarray(chain.epsilon))
    np.save(v_path, np.ascontiguousarray(chain.v))

    meta_path = directory / f"{stem}.json"
    meta = {
        "chain_id": chain.chain_id,
        "kernel": chain.kind.value,
        "p": chain.p,
        "seed": chain.seed,
        "acceptance_rates": chain.acceptance_rates,
        "step_sizes": chain.step_sizes,
        "sampler": chain.config.as_dict(),
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=float) + "\n")

    logger.info(f"✅ Wrote chain {chain.chain_id} ({len(chain)} draws) to {csv_path}")
    return [csv_path, eps_path, v_path, meta_path]


def read_chain(csv_path: Union[str, Path]) -> Chain:
    """Rebuild a Chain from its CSV and sidecar files"""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise DatasetError(f"Chain file not found: {csv_path}")
    stem = csv_path.with_suffix("")
    meta_path = stem.with_suffix(".json")
    if not meta_path.exists():
        raise DatasetError(f"Chain metadata not found: {meta_path}")

    meta = json.loads(meta_path.read_text())
    frame = read_csv_exact(csv_path)
    if len(frame) == 0:
        raise DatasetError(f"Chain file {csv_path} holds no draws")

    params = frame.drop(columns=["iteration"]).to_numpy(dtype=float)
    m = params.shape[0]
    p = int(meta["p"])
    eps_path = Path(f"{stem}_epsilon.npy")
    v_path = Path(f"{stem}_v.npy")
    epsilon = np.load(eps_path) if eps_path.exists() else np.zeros((m, 0))
    v = np.load(v_path) if v_path.exists() else np.zeros((m, 0, p))
    if epsilon.shape[0] != m or v.shape[0] != m:
        raise DatasetError(f"Latent files of {csv_path} do not match its {m} draws")

    sampler = dict(meta.get("sampler", {}))
    config = SamplerConfig(**sampler) if sampler else SamplerConfig(n_iter=m, burn_in=0)
    return Chain(params=params, epsilon=epsilon, v=v,
                 iterations=frame["iteration"].to_numpy(dtype=int),
                 acceptance_rates=dict(meta.get("acceptance_rates", {})), config=config,
                 kind=KernelKind(meta["kernel"]), p=p, seed=meta.get("seed"),
                 chain_id=int(meta.get("chain_id", 0)), step_sizes=dict(meta.get("step_sizes", {})))


def read_chains(paths) -> List[Chain]:
    return [read_chain(p) for p in paths]
