#!/usr/bin/env python3
"""
Simulation study driver for spatial-mem

Replicates the study protocol over several seeds:
1. simulate the 97 + 11 dataset and contaminate the covariate
2. fit the measurement-error model (MEM) and the naive model (NM)
3. compare DIC, the beta_1 estimate and the sigma2 estimates; check PSRF
4. with --identifiability, refit MEM under each (sigma2, omega2, tau2) triple

Usage:
  $ python scripts/run_simulation_study.py --config config/sim_study.yaml --seeds 10
  $ python scripts/run_simulation_study.py --fast --seeds 3
  $ python scripts/run_simulation_study.py --identifiability
"""

import os
import sys
import argparse
import logging
from pathlib import Path

import pandas as pd

# Add the parent directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.config import RunConfig
from core.diagnostics import (EVAR_FOOTNOTE, dic, fit_summary_table, gelman_rubin, summarize,
                              write_report)
from core.mcmc.sampler import chain_inits, run_chains
from core.simulation import identifiability_specs, simulate_study
from core.stats.rng import derive_seed, make_rng

logging.basicConfig(level=logging.WARNING,
                    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

BETA1_BAND = (1.5, 2.5)
PSRF_GATE = 1.1
IDENTIFIABILITY_FACTOR = 3.0


def fit(config: RunConfig, data, seed: int, naive: bool, fast: bool):
    sampler = config.get_sampler_config().with_(seed=seed, naive=naive)
    if fast:
        sampler = sampler.with_(n_iter=sampler.n_iter // 2, burn_in=sampler.burn_in // 2)
    latent_variance, scale_is_sd = config.get_latent_init()
    base = config.get_initial_params()
    if naive:
        base = base.with_(tau2=0.0)
    inits = chain_inits(base, data, sampler, latent_variance, scale_is_sd,
                        spread=float(config.section("init")["dispersion"]))
    return run_chains(data, config.get_kernel_kind(), config.get_hyperparams(), inits, sampler)


def replicate(config: RunConfig, seed: int, fast: bool, out_dir: Path, report: bool) -> dict:
    spec = config.get_sim_spec(seed=seed)
    train, _, _ = simulate_study(spec, make_rng(derive_seed(seed, 1)))
    kind = config.get_kernel_kind()

    mem = fit(config, train, seed, naive=False, fast=fast)
    nm = fit(config, train, seed, naive=True, fast=fast)
    dic_mem, dic_nm = dic(mem, train, kind), dic(nm, train, kind)
    sum_mem = summarize(mem, truth=spec.truth())
    sum_nm = summarize(nm, truth=spec.truth())
    psrf = gelman_rubin(mem).max() if len(mem) >= 2 else float("nan")

    if report:
        table = fit_summary_table({"NM": sum_nm, "MEM": sum_mem}, {"NM": dic_nm, "MEM": dic_mem})
        write_report(table, out_dir, f"fit_summary_seed{seed}", f"MEM vs NM (seed {seed})", EVAR_FOOTNOTE)

    return {
        "seed": seed,
        "beta_1_mem": sum_mem.loc["beta_1", "mean"],
        "beta_1_nm": sum_nm.loc["beta_1", "mean"],
        "sigma2_mem": sum_mem.loc["sigma2", "mean"],
        "sigma2_nm": sum_nm.loc["sigma2", "mean"],
        "dic_mem": dic_mem,
        "dic_nm": dic_nm,
        "max_psrf_mem": psrf,
    }


def identifiability(config: RunConfig, seed: int, fast: bool) -> list:
    rows = []
    for spec in identifiability_specs(config.get_sim_spec(seed=seed), config.get_identifiability_triples()):
        train, _, _ = simulate_study(spec, make_rng(derive_seed(seed, 2)))
        summary = summarize(fit(config, train, seed, naive=False, fast=fast))
        row = {"seed": seed}
        for name, true in (("sigma2", spec.sigma2), ("omega2", spec.omega2), ("tau2", spec.tau ** 2)):
            est = summary.loc[name, "mean"]
            row[f"{name}_true"] = true
            row[f"{name}_est"] = est
            row[f"{name}_ok"] = 1.0 / IDENTIFIABILITY_FACTOR <= est / true <= IDENTIFIABILITY_FACTOR
        row["all_ok"] = row["sigma2_ok"] and row["omega2_ok"] and row["tau2_ok"]
        rows.append(row)
    return rows


def main():
    parser = argparse.ArgumentParser(description="Run the spatial-mem simulation study")
    parser.add_argument("--config", default="config/sim_study.yaml", help="YAML run configuration")
    parser.add_argument("--seeds", type=int, default=10, help="Number of replications")
    parser.add_argument("--first-seed", type=int, default=1, help="Seed of the first replication")
    parser.add_argument("--fast", action="store_true",
                        help="Halve iterations and double the beta_1 tolerance")
    parser.add_argument("--identifiability", action="store_true",
                        help="Run the (sigma2, omega2, tau2) identifiability study instead")
    parser.add_argument("--out", default="runs/simulation_study", help="Output folder")
    args = parser.parse_args()

    config = RunConfig.load(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = range(args.first_seed, args.first_seed + args.seeds)

    print("🧪 spatial-mem simulation study")
    print("=" * 60)

    if args.identifiability:
        rows = [r for s in seeds for r in identifiability(config, s, args.fast)]
        frame = pd.DataFrame(rows)
        frame.to_csv(out_dir / "identifiability.csv", index=False)
        for triple, group in frame.groupby(["sigma2_true", "omega2_true", "tau2_true"]):
            print(f"📊 {triple}: all three within x{IDENTIFIABILITY_FACTOR:g} in "
                  f"{int(group['all_ok'].sum())}/{len(group)} seeds")
        return 0

    rows = []
    for i, seed in enumerate(seeds):
        row = replicate(config, seed, args.fast, out_dir, report=(i == 0))
        rows.append(row)
        print(f"   seed {seed}: beta_1 MEM {row['beta_1_mem']:.3f}, DIC MEM {row['dic_mem']:.1f} "
              f"vs NM {row['dic_nm']:.1f}, max PSRF {row['max_psrf_mem']:.3f}")
    frame = pd.DataFrame(rows)
    frame.to_csv(out_dir / "replications.csv", index=False)

    lo, hi = BETA1_BAND
    if args.fast:
        width = hi - lo
        lo, hi = lo - width / 2, hi + width / 2
    n = len(frame)
    checks = {
        f"beta_1 (MEM) in [{lo:g}, {hi:g}]": int(frame["beta_1_mem"].between(lo, hi).sum()),
        "DIC(MEM) < DIC(NM)": int((frame["dic_mem"] < frame["dic_nm"]).sum()),
        "sigma2(NM) > sigma2(MEM)": int((frame["sigma2_nm"] > frame["sigma2_mem"]).sum()),
        f"max PSRF (MEM) < {PSRF_GATE}": int((frame["max_psrf_mem"] < PSRF_GATE).sum()),
    }
    print()
    for label, hits in checks.items():
        print(f"{'✅' if hits >= 0.8 * n else '⚠️'} {label}: {hits}/{n}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
