import copy
import os
import time
from typing import Any, Dict, List

import yaml

from analysis import convergence, estimates
from analysis.rate_fit import CheckResult
from base.exceptions import ConfigError
from utils.logger import get_logger

# Suite order; summary rows follow it
CHECK_FUNCTIONS = {
    "endpoint_rates": estimates.check_endpoint_rates,
    "joukowski_roundtrip": estimates.check_joukowski_roundtrip,
    "frac_identity": estimates.check_frac_identity,
    "harmonic_normalization": estimates.check_harmonic_normalization,
    "tangency": estimates.check_tangency,
    "circulation_structure": estimates.check_circulation_structure,
    "integral_scaling": estimates.check_integral_scaling,
    "cutoff_lemma": estimates.check_cutoff_lemma,
    "cutoff_velocity": estimates.check_cutoff_velocity,
    "H_limit": estimates.check_H_limit,
    "velocity_lp": estimates.check_velocity_lp,
    "biholo_scalings": estimates.check_biholo_scalings,
    "assumption31_family": estimates.check_assumption31_family,
    "thickening_limit": estimates.check_thickening_limit,
    "slit_circulation": estimates.check_slit_circulation,
    "velocity_endpoint_blowup": estimates.check_velocity_endpoint_blowup,
    "jump_function": estimates.check_jump_function,
    "transport_conservation": convergence.check_transport_conservation,
    "integrator_order": convergence.check_integrator_order,
    "convergence_to_limit": convergence.sweep_convergence_to_limit,
}


class CheckRegistry:
    """Check names, sweep parameters and tolerances loaded from checks.yaml"""

    def __init__(self, checks_file_path=None):
        """Initialize registry with optional checks file path"""
        if checks_file_path is None:
            self.checks_file_path = os.path.join(os.path.dirname(__file__), '..', 'config', 'checks.yaml')
        else:
            self.checks_file_path = checks_file_path

        self.checks = self.load_checks()

    def load_checks(self) -> Dict[str, Any]:
        """Load check parameters from YAML, falling back to in-code defaults"""
        try:
            with open(self.checks_file_path, 'r', encoding='utf-8') as file:
                data = yaml.safe_load(file) or {}
        except FileNotFoundError:
            print(f"Checks file not found: {self.checks_file_path}")
            print("Using default check parameters...")
            return self.get_default_checks()
        except yaml.YAMLError as e:
            print(f"Error parsing checks file: {str(e)}")
            print("Using default check parameters...")
            return self.get_default_checks()

        checks = self.get_default_checks()
        for name, params in (data.get('checks') or {}).items():
            if name not in CHECK_FUNCTIONS:
                print(f"Ignoring unknown check in {self.checks_file_path}: {name}")
                continue
            checks[name] = params or {}
        return checks

    def get_default_checks(self) -> Dict[str, Any]:
        """Every check with its in-code parameters"""
        return {name: {} for name in CHECK_FUNCTIONS}

    def list_checks(self) -> List[str]:
        return list(CHECK_FUNCTIONS)

    def validate_check(self, name):
        """Raise ConfigError for names outside the suite"""
        if name not in CHECK_FUNCTIONS:
            raise ConfigError(f"unknown check '{name}' (known: {', '.join(CHECK_FUNCTIONS)})",
                              key="check")
        return name

    def get_check_params(self, name) -> Dict[str, Any]:
        self.validate_check(name)
        return copy.deepcopy(self.checks.get(name, {}))

    def get_tolerance(self, name, key, default=None):
        return self.get_check_params(name).get('tolerances', {}).get(key, default)

    def run_check(self, name, out_dir=None, seed=None, overrides=None) -> CheckResult:
        """Run one check, timing it and logging its boundaries"""
        logger = get_logger()
        params = self.get_check_params(name)
        if seed is not None:
            params['seed'] = seed
        if overrides:
            params.update(overrides)

        logger.log_check_start(name)
        logger.log_parameters(name, params)
        started = time.perf_counter()
        result = CHECK_FUNCTIONS[name](params=params, out_dir=out_dir)
        result.duration = time.perf_counter() - started
        headline = next(iter(result.measured.items()), None)
        logger.log_check_end(name, result.status, None if headline is None else f"{headline[0]}={headline[1]}")
        for failure in result.failures:
            logger.warning(f"{name}: {failure}")
        return result


# Global registry instance
check_registry = None

def get_check_registry(checks_file_path=None):
    """Get global check registry instance"""
    global check_registry
    if check_registry is None:
        check_registry = CheckRegistry(checks_file_path)
    return check_registry
