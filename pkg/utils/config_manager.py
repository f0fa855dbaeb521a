"""
Configuration manager for run defaults, logging and output settings.
Loads config/config.yaml and falls back to built-in defaults.
"""

import copy
import os
from typing import Any, Dict

import yaml


DEFAULT_CONFIG = {
    'run': {
        'epsilon': 0.1,
        'gamma': 0.0,
        'eta': 0.0,
        'vorticity_preset': 'gaussian',
        'grid_origin': [-2.0, -2.0],
        'grid_h': 0.0625,
        'grid_nx': 64,
        'grid_ny': 64,
        'dt': 0.002,
        't_final': 1.0,
        'blob_delta': None,
        'output_dir': 'output',
        'seed': 1234,
        'snapshot_cadence': 0,
        'check': None,
        'eps_list': [0.2, 0.1, 0.05],
        'particle_h': 0.05,
        'jobs': 1,
    },
    'logging': {
        'level': 'INFO',
        'console_output': True,
        'log_dir': 'logs/',
    },
    'output': {
        'csv_digits': 17,
        'summary_file': 'summary.csv',
        'report_file': 'report.json',
    },
}


class ConfigManager:
    """Manages run defaults and framework settings from YAML configuration"""

    def __init__(self, config_file_path=None):
        """Initialize ConfigManager with optional config file path"""
        if config_file_path is None:
            self.config_file_path = os.path.join(
                os.path.dirname(__file__), '..', 'config', 'config.yaml'
            )
        else:
            self.config_file_path = config_file_path

        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file, filling missing sections from defaults"""
        config = self.get_default_config()
        try:
            with open(self.config_file_path, 'r', encoding='utf-8') as file:
                loaded = yaml.safe_load(file) or {}
        except FileNotFoundError:
            self._warn(f"Config file not found at: {self.config_file_path}, using default configuration")
            return config
        except Exception as e:
            self._warn(f"Config loading failed: {e}, using default configuration")
            return config

        for section, values in loaded.items():
            if isinstance(values, dict) and isinstance(config.get(section), dict):
                config[section].update(values)
            else:
                config[section] = values
        return config

    def get_default_config(self) -> Dict[str, Any]:
        """Return default configuration structure"""
        return copy.deepcopy(DEFAULT_CONFIG)

    def get_run_defaults(self) -> Dict[str, Any]:
        """Get defaults for every run configuration key"""
        return dict(self.config.get('run', {}))

    def get_logging_settings(self) -> Dict[str, Any]:
        """Get logging settings"""
        return dict(self.config.get('logging', {}))

    def get_output_settings(self) -> Dict[str, Any]:
        """Get output settings"""
        return dict(self.config.get('output', {}))

    @staticmethod
    def _warn(message):
        # The logger itself is configured from this file, so it cannot be used here
        print(f"WARNING: {message}")


# Global config manager instance
config_manager = None

def get_config_manager(config_file_path=None):
    """Get global config manager instance"""
    global config_manager
    if config_manager is None:
        config_manager = ConfigManager(config_file_path)
    return config_manager
