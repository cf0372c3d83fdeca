"""
Run configuration validation for spatial-mem
Checks a parsed YAML run file before any computation starts
"""

import numbers
from pathlib import Path
from typing import Dict, List, Tuple, Union

import yaml

from core.correlation.kernels import KernelKind
from core.mcmc.blocks import V_RECOVERY_MODES
from core.mcmc.sampler import MH_BLOCKS
from core.model.params import Hyperparams
from core.prediction.predictor import CONDITIONING_MODES

KNOWN_SECTIONS = {'seed', 'data', 'kernel', 'hyperparams', 'sampler', 'init', 'model',
                  'simulation', 'prediction', 'sensitivity', 'output', 'logging'}
LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}
HYPERPARAM_KEYS = set(Hyperparams().as_dict())
INIT_KEYS = {'beta', 'sigma2', 'omega2', 'tau2', 'theta'}


def _is_number(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _positive(value) -> bool:
    return _is_number(value) and value > 0


class ConfigValidator:
    """Validates spatial-mem run configuration"""

    @staticmethod
    def validate_config(config_data: Dict) -> Tuple[bool, List[str]]:
        """
        Validate a run configuration

        Returns:
            Tuple[bool, List[str]]: (is_valid, list_of_errors)
        """
        errors = []

        if not isinstance(config_data, dict):
            return False, ["Configuration must be a mapping of sections"]

        unknown = set(config_data) - KNOWN_SECTIONS
        if unknown:
            errors.append(f"Unknown section(s): {sorted(unknown)}")

        if 'seed' not in config_data:
            errors.append("Missing required key: seed")
        elif not isinstance(config_data['seed'], int) or isinstance(config_data['seed'], bool) \
                or config_data['seed'] < 0:
            errors.append("seed must be a non-negative integer")

        kind = None
        if 'kernel' not in config_data:
            errors.append("Missing required key: kernel")
        else:
            kind_errors, kind = ConfigValidator._validate_kernel(config_data['kernel'])
            errors.extend(kind_errors)

        errors.extend(ConfigValidator._validate_data(config_data.get('data', {})))
        errors.extend(ConfigValidator._validate_hyperparams(config_data.get('hyperparams', {}), 'hyperparams'))
        errors.extend(ConfigValidator._validate_sampler(config_data.get('sampler', {})))
        model = config_data.get('model', {})
        naive = isinstance(model, dict) and str(model.get('variant', 'mem')).lower() == 'naive'
        errors.extend(ConfigValidator._validate_init(config_data.get('init', {}), kind, 'init', naive))
        errors.extend(ConfigValidator._validate_model(config_data.get('model', {})))
        errors.extend(ConfigValidator._validate_simulation(config_data.get('simulation', {})))
        errors.extend(ConfigValidator._validate_prediction(config_data.get('prediction', {})))
        errors.extend(ConfigValidator._validate_sensitivity(config_data.get('sensitivity', {}), kind, naive))
        errors.extend(ConfigValidator._validate_logging(config_data.get('logging', {})))

        return len(errors) == 0, errors

    @staticmethod
    def _validate_kernel(kernel: Dict):
        if not isinstance(kernel, dict) or 'kind' not in kernel:
            return ["kernel must be a dictionary with a 'kind' field"], None
        try:
            return [], KernelKind(kernel['kind'])
        except ValueError:
            return [f"kernel 'kind' must be one of {[k.value for k in KernelKind]}"], None

    @staticmethod
    def _validate_data(data: Dict) -> List[str]:
        errors = []
        if not isinstance(data, dict):
            return ["data must be a dictionary"]
        for key in ('train', 'test', 'truth'):
            if key in data and data[key] is not None and not isinstance(data[key], str):
                errors.append(f"data '{key}' must be a path string")
        schema = data.get('schema')
        if schema is None:
            return errors
        if not isinstance(schema, dict):
            return errors + ["data 'schema' must be a dictionary"]
        for key in ('x', 'y', 'response'):
            if key in schema and not isinstance(schema[key], str):
                errors.append(f"data.schema '{key}' must be a column name")
        covariates = schema.get('covariates', [])
        if not isinstance(covariates, list):
            errors.append("data.schema 'covariates' must be a list")
            covariates = []
        flagged = schema.get('error_prone')
        if flagged is not None:
            if not isinstance(flagged, list):
                errors.append("data.schema 'error_prone' must be a list")
            elif set(flagged) - set(covariates):
                errors.append(f"data.schema 'error_prone' names unknown covariates {sorted(set(flagged) - set(covariates))}")
        return errors

    @staticmethod
    def _validate_hyperparams(hyper: Dict, where: str) -> List[str]:
        errors = []
        if not isinstance(hyper, dict):
            return [f"{where} must be a dictionary"]
        for key, value in hyper.items():
            if key not in HYPERPARAM_KEYS:
                errors.append(f"{where}: unknown hyperparameter '{key}'")
            elif key == 'gamma_gig':
                if not _is_number(value):
                    errors.append(f"{where} 'gamma_gig' must be a number")
            elif not _positive(value):
                errors.append(f"{where} '{key}' must be positive")
        return errors

    @staticmethod
    def _validate_sampler(sampler: Dict) -> List[str]:
        errors = []
        if not isinstance(sampler, dict):
            return ["sampler must be a dictionary"]
        for key in ('n_iter', 'thin', 'n_chains', 'workers', 'progress_every'):
            if key in sampler and (not isinstance(sampler[key], int) or sampler[key] < 1):
                errors.append(f"sampler '{key}' must be a positive integer")
        if 'burn_in' in sampler and (not isinstance(sampler['burn_in'], int) or sampler['burn_in'] < 0):
            errors.append("sampler 'burn_in' must be a non-negative integer")
        n_iter, burn_in = sampler.get('n_iter', 75000), sampler.get('burn_in', 25000)
        if isinstance(n_iter, int) and isinstance(burn_in, int) and burn_in >= n_iter:
            errors.append("sampler 'burn_in' must be smaller than 'n_iter'")
        target = sampler.get('target_acceptance', 0.35)
        if not (_is_number(target) and 0 < target < 1):
            errors.append("sampler 'target_acceptance' must lie in (0, 1)")
        if sampler.get('v_recovery', 'min_norm') not in V_RECOVERY_MODES:
            errors.append(f"sampler 'v_recovery' must be one of {list(V_RECOVERY_MODES)}")
        if 'adapt' in sampler and not isinstance(sampler['adapt'], bool):
            errors.append("sampler 'adapt' must be boolean")
        steps = sampler.get('mh_step_sizes') or {}
        if not isinstance(steps, dict):
            errors.append("sampler 'mh_step_sizes' must be a dictionary")
        else:
            for block, step in steps.items():
                if block not in MH_BLOCKS:
                    errors.append(f"sampler 'mh_step_sizes': unknown block '{block}'")
                elif not _positive(step):
                    errors.append(f"sampler 'mh_step_sizes' '{block}' must be positive")
        if 'psrf_threshold' in sampler and not (_is_number(sampler['psrf_threshold'])
                                                and sampler['psrf_threshold'] >= 1):
            errors.append("sampler 'psrf_threshold' must be >= 1")
        return errors

    @staticmethod
    def _validate_init(init: Dict, kind, where: str, naive: bool = False) -> List[str]:
        errors = []
        if not isinstance(init, dict):
            return [f"{where} must be a dictionary"]
        if 'beta' in init and (not isinstance(init['beta'], list) or not all(_is_number(b) for b in init['beta'])):
            errors.append(f"{where} 'beta' must be a list of numbers")
        for key in ('sigma2', 'omega2'):
            if key in init and not _positive(init[key]):
                errors.append(f"{where} '{key}' must be positive")
        if 'tau2' in init:
            # the mem V block divides by tau; only the naive variant pins it at 0
            if naive and not (_is_number(init['tau2']) and init['tau2'] >= 0):
                errors.append(f"{where} 'tau2' must be non-negative")
            elif not naive and not _positive(init['tau2']):
                errors.append(f"{where} 'tau2' must be positive for the mem variant")
        if 'theta' in init:
            theta = init['theta']
            if not isinstance(theta, list) or not all(_positive(t) for t in theta):
                errors.append(f"{where} 'theta' must be a list of positive numbers")
            elif kind is not None:
                expected = 2 if kind == KernelKind.MATERN else 1
                if len(theta) != expected:
                    errors.append(f"{where} 'theta' needs {expected} value(s) for the {kind.value} kernel")
        if 'latent_variance' in init and not _positive(init['latent_variance']):
            errors.append(f"{where} 'latent_variance' must be positive")
        if 'dispersion' in init and not (_is_number(init['dispersion']) and init['dispersion'] >= 0):
            errors.append(f"{where} 'dispersion' must be non-negative")
        return errors

    @staticmethod
    def _validate_model(model: Dict) -> List[str]:
        if not isinstance(model, dict):
            return ["model must be a dictionary"]
        if str(model.get('variant', 'mem')).lower() not in ('mem', 'naive'):
            return ["model 'variant' must be 'mem' or 'naive'"]
        return []

    @staticmethod
    def _validate_simulation(sim: Dict) -> List[str]:
        errors = []
        if not isinstance(sim, dict):
            return ["simulation must be a dictionary"]
        if 'beta' in sim and (not isinstance(sim['beta'], list) or len(sim['beta']) != 2):
            errors.append("simulation 'beta' must be [beta0, beta1]")
        for key in ('sigma2', 'omega2', 'x_var', 'tau'):
            if key in sim and not (_is_number(sim[key]) and sim[key] >= 0):
                errors.append(f"simulation '{key}' must be non-negative")
        if 'kernel' in sim:
            try:
                KernelKind(sim['kernel'])
            except ValueError:
                errors.append(f"simulation 'kernel' must be one of {[k.value for k in KernelKind]}")
        if 'theta' in sim and (not isinstance(sim['theta'], list) or not all(_positive(t) for t in sim['theta'])):
            errors.append("simulation 'theta' must be a list of positive numbers")
        for triple in sim.get('identifiability', []) or []:
            if not (isinstance(triple, list) and len(triple) == 3 and all(_positive(v) for v in triple)):
                errors.append("simulation 'identifiability' entries must be [sigma2, omega2, tau2]")
                break
        return errors

    @staticmethod
    def _validate_prediction(pred: Dict) -> List[str]:
        errors = []
        if not isinstance(pred, dict):
            return ["prediction must be a dictionary"]
        grid = pred.get('grid')
        if grid is not None:
            if not isinstance(grid, dict):
                errors.append("prediction 'grid' must be a dictionary")
            else:
                for key in ('x_min', 'x_max', 'y_min', 'y_max'):
                    if not _is_number(grid.get(key)):
                        errors.append(f"prediction.grid '{key}' must be a number")
                for key in ('nx', 'ny'):
                    if not isinstance(grid.get(key), int) or grid.get(key) < 2:
                        errors.append(f"prediction.grid '{key}' must be an integer >= 2")
            cov = pred.get('covariates')
            if not isinstance(cov, dict) or not ('constant' in cov or 'file' in cov):
                errors.append("prediction 'covariates' needs 'constant' or 'file' when a grid is set")
            elif 'file' in cov and not isinstance(cov.get('columns'), list):
                errors.append("prediction.covariates 'columns' must list the covariate columns")
        probs = pred.get('probs', [0.05, 0.5, 0.95])
        if not isinstance(probs, list) or not all(_is_number(q) and 0 < q < 1 for q in probs):
            errors.append("prediction 'probs' must be numbers in (0, 1)")
        if pred.get('conditioning', 'latent') not in CONDITIONING_MODES:
            errors.append(f"prediction 'conditioning' must be one of {list(CONDITIONING_MODES)}")
        return errors

    @staticmethod
    def _validate_sensitivity(sens: Dict, kind, naive: bool = False) -> List[str]:
        errors = []
        if not isinstance(sens, dict):
            return ["sensitivity must be a dictionary"]
        for i, entry in enumerate(sens.get('priors', []) or []):
            if not isinstance(entry, dict) or 'label' not in entry or 'hyperparams' not in entry:
                errors.append(f"sensitivity.priors[{i}] needs 'label' and 'hyperparams'")
                continue
            errors.extend(ConfigValidator._validate_hyperparams(entry['hyperparams'], f"sensitivity.priors[{i}]"))
        for i, entry in enumerate(sens.get('initial_values', []) or []):
            if not isinstance(entry, dict) or 'label' not in entry or 'init' not in entry:
                errors.append(f"sensitivity.initial_values[{i}] needs 'label' and 'init'")
                continue
            unknown = set(entry['init']) - INIT_KEYS
            if unknown:
                errors.append(f"sensitivity.initial_values[{i}]: unknown key(s) {sorted(unknown)}")
            errors.extend(ConfigValidator._validate_init(entry['init'], kind, f"sensitivity.initial_values[{i}]", naive))
        return errors

    @staticmethod
    def _validate_logging(log: Dict) -> List[str]:
        if not isinstance(log, dict):
            return ["logging must be a dictionary"]
        if str(log.get('level', 'INFO')).upper() not in LOG_LEVELS:
            return [f"logging 'level' must be one of {sorted(LOG_LEVELS)}"]
        return []

    @staticmethod
    def validate_yaml_file(file_path: Union[str, Path]) -> Tuple[bool, List[str]]:
        """Validate a YAML configuration file"""
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                config_data = yaml.safe_load(f)

            return ConfigValidator.validate_config(config_data)

        except FileNotFoundError:
            return False, [f"Configuration file not found: {file_path}"]
        except yaml.YAMLError as e:
            return False, [f"Invalid YAML format: {e}"]
        except OSError as e:
            return False, [f"Error reading file: {e}"]
