#!/usr/bin/env python3
"""
spatial-mem CLI - batch front end for the spatial measurement-error model

Commands:
    simulate     generate train/test/truth CSVs for the simulation study
    fit          run the MEM (or naive) sampler and write chains and tables
    predict      predictive summaries at points and/or on a grid
    diagnose     PSRF, DIC and summaries from saved chains
    sensitivity  prior and initial-value sensitivity reports

Exit codes: 0 ok, 1 other failure, 2 config/data error, 3 numeric failure,
4 convergence gate.
"""

import os
import sys
import json
import shutil
import logging
import argparse
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

# Add the parent directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.config import RunConfig
from core.data.dataset import DatasetSchema, load_dataset, save_dataset
from core.diagnostics import (EVAR_FOOTNOTE, dic_components, fit_summary_table,
                              gelman_rubin, psrf_table, sensitivity_table, summarize, write_report)
from core.diagnostics.convergence import MIN_LENGTH
from core.errors import (ConfigError, ConvergenceError, DatasetError, NumericalError,
                         SpatialMemError)
from core.mcmc.chain_io import read_chains, write_chain
from core.mcmc.sampler import chain_inits, run_chains
from core.mem_logger import logger as mem_logger
from core.prediction import (PredictionRequest, evaluate_holdout, predict_at, predict_grid,
                             write_predictions)
from core.run_manifest import RunManifest
from core.simulation import simulate_study
from core.stats.rng import derive_seed, make_rng

logger = logging.getLogger("spatial_mem.cli")

COMMANDS = ('simulate', 'fit', 'predict', 'diagnose', 'sensitivity')
EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CONVERGENCE = 0, 1, 2, 3, 4
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# stream keys for derive_seed, one per command that draws random numbers
SIMULATE_STREAM, PREDICT_STREAM = 1, 2


def setup_logging(level: str = "INFO", log_file: Optional[Path] = None):
    """Root logging; adds a file handler when configured"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)


class StagedOutput:
    """
    Collects a command's files in a hidden sibling folder and moves it into
    place on commit; on failure the staging folder is removed
    """

    def __init__(self, final_dir: Path):
        self.final_dir = Path(final_dir)
        self.final_dir.parent.mkdir(parents=True, exist_ok=True)
        self.stage = Path(tempfile.mkdtemp(prefix=f".{self.final_dir.name}.tmp-", dir=self.final_dir.parent))
        self.files: List[Path] = []

    def path(self, name: str) -> Path:
        return self.stage / name

    def add(self, *paths: Path):
        self.files.extend(Path(p) for p in paths)

    def commit(self) -> List[Path]:
        if self.final_dir.exists():
            shutil.rmtree(self.final_dir)
        os.replace(self.stage, self.final_dir)
        return [self.final_dir / p.relative_to(self.stage) for p in self.files]

    def discard(self):
        shutil.rmtree(self.stage, ignore_errors=True)

    def __enter__(self) -> "StagedOutput":
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.discard()
        return False


class SpatialMemCLI:
    """spatial-mem Command Line Interface"""

    def __init__(self, config: RunConfig, force: bool = False, evaluate: bool = False,
                 variant: Optional[str] = None):
        self.config = config
        self.force = force
        self.evaluate = evaluate
        if variant is not None:
            raw = dict(config.raw)
            raw["model"] = {**raw.get("model", {}), "variant": variant}
            self.config = RunConfig(raw, base_dir=config.base_dir, path=config.path)
        self.seed = self.config.require_seed()

    @property
    def variant(self) -> str:
        return "naive" if self.config.naive else "mem"

    def _dir(self, name: str) -> Path:
        return self.config.output_dir / name

    def _fit_dir(self) -> Path:
        return self._dir(f"fit_{self.variant}")

    def _manifest(self, command: str) -> RunManifest:
        return RunManifest(command=command, config=self.config.snapshot(), seed=self.seed)

    def _load_train(self):
        return load_dataset(self.config.get_data_path("train"), self.config.get_schema())

    def _load_chains(self):
        fit_dir = self._fit_dir()
        paths = sorted(fit_dir.glob("chain_*.csv"), key=lambda p: int(p.stem.split("_")[1]))
        if not paths:
            raise DatasetError(f"No chain files found in {fit_dir}")
        chains = read_chains(paths)
        if any(len(c) == 0 for c in chains):
            raise DatasetError(f"Empty chain file in {fit_dir}")
        return chains

    def _fit_chains(self, data, hyper_overrides: Optional[Dict] = None,
                    init_overrides: Optional[Dict] = None):
        cfg = self.config
        sampler = cfg.get_sampler_config()
        latent_variance, scale_is_sd = cfg.get_latent_init()
        base = cfg.get_initial_params(init_overrides)
        inits = chain_inits(base, data, sampler, latent_variance, scale_is_sd,
                            spread=float(cfg.section("init")["dispersion"]))
        return run_chains(data, cfg.get_kernel_kind(), cfg.get_hyperparams(hyper_overrides), inits, sampler)

    def simulate(self) -> int:
        """Simulate the study data and write train/test/truth CSVs"""
        print("🧪 spatial-mem simulate")
        print("=" * 40)
        manifest = self._manifest("simulate")
        spec = self.config.get_sim_spec()
        rng = make_rng(derive_seed(self.seed, SIMULATE_STREAM))
        train, test, truth = simulate_study(spec, rng)

        schema = DatasetSchema(covariates=tuple(train.names[1:]), error_prone=tuple(train.names[1:]))
        with StagedOutput(self._dir("simulate")) as out:
            out.add(save_dataset(train, out.path("train.csv"), schema))
            if test is not None:
                out.add(save_dataset(test, out.path("test.csv"), schema))
            out.add(truth.save(out.path("truth.csv")))
            files = out.commit()

        manifest.record_outputs(files, self.config.output_dir)
        manifest.finish().write(self._dir("simulate"))
        print(f"✅ Train: {train.n} rows, test: {0 if test is None else test.n} rows")
        return EXIT_OK

    def fit(self) -> int:
        """Run the sampler; tables are withheld when the PSRF gate fails"""
        print(f"🔗 spatial-mem fit ({self.variant})")
        print("=" * 40)
        manifest = self._manifest("fit")
        data = self._load_train()
        kind = self.config.get_kernel_kind()
        chains = self._fit_chains(data)
        manifest.record_chains(chains)

        threshold = self.config.psrf_threshold
        psrf = None
        if len(chains) >= 2 and len(chains[0]) >= MIN_LENGTH:
            psrf = gelman_rubin(chains)
        offenders = psrf.offenders(threshold) if psrf else {}
        gated = bool(offenders) and not self.force

        with StagedOutput(self._fit_dir()) as out:
            for chain in chains:
                out.add(*write_chain(chain, out.stage))
            dic_result = dic_components(chains, data, kind)
            dic_path = out.path("dic.json")
            dic_path.write_text(json.dumps(dic_result.as_dict(), indent=2) + "\n")
            out.add(dic_path)
            if psrf is not None:
                out.add(*write_report(psrf_table(psrf, threshold), out.stage, "psrf", "PSRF"))
            if not gated:
                table = fit_summary_table({self.variant.upper(): summarize(chains)},
                                          {self.variant.upper(): dic_result.dic})
                out.add(*write_report(table, out.stage, "summary", "Posterior summary", EVAR_FOOTNOTE))
            files = out.commit()

        manifest.record_outputs(files, self.config.output_dir)
        if offenders and self.force:
            manifest.notes.append(f"PSRF gate overridden with --force: {offenders}")
        manifest.finish().write(self._fit_dir())
        print(f"📊 DIC: {dic_result.dic:.2f} (pD {dic_result.p_d:.2f})")
        if gated:
            raise ConvergenceError(offenders, threshold)
        print(f"✅ {len(chains)} chain(s) x {len(chains[0])} draws written to {self._fit_dir()}")
        return EXIT_OK

    def predict(self) -> int:
        """Predict at configured points and/or grid from saved chains"""
        print("🗺️  spatial-mem predict")
        print("=" * 40)
        manifest = self._manifest("predict")
        cfg = self.config
        data = self._load_train()
        chains = self._load_chains()
        kind = chains[0].kind
        probs = cfg.get_prediction_probs()
        conditioning = cfg.section("prediction")["conditioning"]
        grid = cfg.get_grid()
        points = cfg.section("prediction").get("points")
        if points is None and grid is None:
            raise ConfigError("Nothing to predict: set prediction.points or prediction.grid")

        point_data = None
        if points is not None:
            path = cfg.get_data_path("test") if points == "test" else cfg.resolve(points)
            point_data = load_dataset(path, cfg.get_schema())

        with StagedOutput(self._dir("predict")) as out:
            if point_data is not None:
                rng = make_rng(derive_seed(self.seed, PREDICT_STREAM, 0))
                summary = predict_at(chains, data, kind, PredictionRequest.from_dataset(point_data),
                                     rng, probs, conditioning)
                out.add(write_predictions(summary, out.path("points.csv")))
                if self.evaluate:
                    scores = evaluate_holdout(summary, point_data.y)
                    eval_path = out.path("evaluation.json")
                    eval_path.write_text(json.dumps(scores, indent=2, sort_keys=True) + "\n")
                    out.add(eval_path)
                    print(f"📊 RMSE {scores['rmse']:.4f}, MAE {scores['mae']:.4f}, "
                          f"coverage {scores.get('coverage', float('nan')):.2f}")
            if grid is not None:
                rng = make_rng(derive_seed(self.seed, PREDICT_STREAM, 1))
                surface = predict_grid(chains, data, kind, grid, cfg.get_covariate_provider(), rng,
                                       probs, conditioning)
                out.add(write_predictions(surface, out.path("grid.csv")))
            files = out.commit()

        manifest.record_outputs(files, cfg.output_dir)
        manifest.finish().write(self._dir("predict"))
        print(f"✅ Predictions written to {self._dir('predict')}")
        return EXIT_OK

    def diagnose(self) -> int:
        """Recompute PSRF, DIC and summaries from saved chains"""
        print(f"🩺 spatial-mem diagnose ({self.variant})")
        print("=" * 40)
        manifest = self._manifest("diagnose")
        data = self._load_train()
        chains = self._load_chains()
        manifest.record_chains(chains)
        threshold = self.config.psrf_threshold

        with StagedOutput(self._dir(f"diagnose_{self.variant}")) as out:
            psrf = None
            if len(chains) >= 2 and len(chains[0]) >= MIN_LENGTH:
                psrf = gelman_rubin(chains)
                out.add(*write_report(psrf_table(psrf, threshold), out.stage, "psrf", "PSRF"))
            else:
                logger.warning("⚠️ PSRF needs at least 2 chains of 10 draws; skipped")
            dic_result = dic_components(chains, data, chains[0].kind)
            table = fit_summary_table({self.variant.upper(): summarize(chains)},
                                      {self.variant.upper(): dic_result.dic})
            out.add(*write_report(table, out.stage, "summary", "Posterior summary", EVAR_FOOTNOTE))
            files = out.commit()

        manifest.record_outputs(files, self.config.output_dir)
        manifest.finish().write(self._dir(f"diagnose_{self.variant}"))
        if psrf is not None:
            status = "✅" if psrf.converged(threshold) else "⚠️"
            print(f"{status} max PSRF {psrf.max():.4f} (threshold {threshold})")
        print(f"📊 DIC: {dic_result.dic:.2f}")
        return EXIT_OK

    def sensitivity(self) -> int:
        """Refit under each alternative prior / initial value and report relative changes"""
        print(f"⚖️  spatial-mem sensitivity ({self.variant})")
        print("=" * 40)
        manifest = self._manifest("sensitivity")
        cfg = self.config
        priors = cfg.get_sensitivity_settings("priors")
        starts = cfg.get_sensitivity_settings("initial_values")
        if not priors and not starts:
            raise ConfigError("sensitivity needs at least one entry under 'priors' or 'initial_values'")
        data = self._load_train()

        jobs = [("benchmark", None, None)]
        jobs += [(f"prior:{e['label']}", e["hyperparams"], None) for e in priors]
        jobs += [(f"init:{e['label']}", None, e["init"]) for e in starts]

        workers = max(1, int(cfg.section("sampler")["workers"]))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fits = list(pool.map(lambda job: self._fit_chains(data, job[1], job[2]), jobs))
        results = dict(zip([j[0] for j in jobs], fits))
        benchmark = results.pop("benchmark")
        for chains in fits:
            manifest.record_chains(chains)

        with StagedOutput(self._dir(f"sensitivity_{self.variant}")) as out:
            for kind_label, prefix, title in (("priors", "prior:", "Prior sensitivity: relative change"),
                                              ("initial_values", "init:", "Initial-value sensitivity: relative change")):
                alts = {k[len(prefix):]: v for k, v in results.items() if k.startswith(prefix)}
                if not alts:
                    continue
                table = sensitivity_table(benchmark, alts)
                table.loc["max"] = table.max(axis=0)
                out.add(*write_report(table, out.stage, kind_label, title))
            files = out.commit()

        manifest.record_outputs(files, cfg.output_dir)
        manifest.finish().write(self._dir(f"sensitivity_{self.variant}"))
        print(f"✅ {len(jobs) - 1} alternative fit(s) compared with the benchmark")
        return EXIT_OK


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(error, (ConfigError, DatasetError)):
        return EXIT_CONFIG
    if isinstance(error, NumericalError):
        return EXIT_NUMERIC
    return EXIT_OTHER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatial-mem",
                                     description="Bayesian spatial regression with covariate measurement error")
    parser.add_argument('command', choices=COMMANDS, help='Command to execute')
    parser.add_argument('--config', '-c', required=True, help='YAML run configuration')
    parser.add_argument('--seed', type=int, help='Override the configured seed')
    parser.add_argument('--chains', type=int, help='Number of chains')
    parser.add_argument('--workers', type=int, help='Worker threads for chains and refits')
    parser.add_argument('--variant', choices=('mem', 'naive'), help='Override model.variant')
    parser.add_argument('--force', action='store_true',
                        help='Write summaries even when the PSRF gate fails')
    parser.add_argument('--evaluate', action='store_true',
                        help='Score point predictions against the held-out responses')
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, execute one command and return its exit code"""
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config).with_overrides(args.seed, args.chains, args.workers)
        setup_logging(config.log_level, config.log_file)
        mem_logger.log_command_event("started", command=args.command, seed=config.seed)
        cli = SpatialMemCLI(config, force=args.force, evaluate=args.evaluate, variant=args.variant)
        code = getattr(cli, args.command)()
        mem_logger.log_command_event("completed", command=args.command, exit_code=code)
        return code
    except SpatialMemError as e:
        print(f"❌ {e}")
        logger.error(f"❌ {args.command} failed: {e}")
        return exit_code_for(e)
    except ValueError as e:
        print(f"❌ {e}")
        logger.error(f"❌ {args.command} failed: {e}")
        return EXIT_OTHER


def main():
    """Main CLI function"""
    sys.exit(run())


if __name__ == "__main__":
    main()
