import logging
import os
from datetime import datetime
import json


class SimulationLogger:
    """Logger for simulation runs and estimate checks"""

    def __init__(self, log_file_path=None, log_level=logging.INFO, console_output=True):
        """Initialize SimulationLogger with optional log file path and level"""
        self.log_level = log_level
        self.console_output = console_output

        if log_file_path is None:
            # Create logs directory if it doesn't exist
            logs_dir = os.path.join(os.path.dirname(__file__), '..', 'logs')
            os.makedirs(logs_dir, exist_ok=True)

            # Create log file with timestamp
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            self.log_file_path = os.path.join(logs_dir, f"slitflow_{timestamp}.log")
        else:
            os.makedirs(os.path.dirname(os.path.abspath(log_file_path)), exist_ok=True)
            self.log_file_path = log_file_path

        self.setup_logger()

    def setup_logger(self):
        """Set up the logger with file and console handlers"""
        self.logger = logging.getLogger('SlitFlowLogger')
        self.logger.setLevel(self.log_level)
        self.logger.propagate = False

        # Clear any existing handlers
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # File handler with UTF-8 encoding
        file_handler = logging.FileHandler(self.log_file_path, encoding='utf-8')
        file_handler.setLevel(self.log_level)
        file_handler.setFormatter(formatter)
        self.logger.addHandler(file_handler)

        if self.console_output:
            console_handler = logging.StreamHandler()
            console_handler.setLevel(self.log_level)
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

        self.logger.debug(f"Logger initialized. Log file: {self.log_file_path}")

    def info(self, message):
        """Log info message"""
        self.logger.info(message)

    def debug(self, message):
        """Log debug message"""
        self.logger.debug(message)

    def warning(self, message):
        """Log warning message"""
        self.logger.warning(message)

    def error(self, message):
        """Log error message"""
        self.logger.error(message)

    def critical(self, message):
        """Log critical message"""
        self.logger.critical(message)

    def log_run_start(self, mode):
        """Log the start of a batch command"""
        self.logger.info(f"{'='*50}")
        self.logger.info(f"STARTING RUN: {mode}")
        self.logger.info(f"{'='*50}")

    def log_run_end(self, mode, status):
        """Log the end of a batch command with its status"""
        self.logger.info(f"{'='*50}")
        self.logger.info(f"FINISHED RUN: {mode} - STATUS: {status}")
        self.logger.info(f"{'='*50}")

    def log_check_start(self, check_name):
        """Log check start"""
        self.logger.info(f"STARTING CHECK: {check_name}")

    def log_check_end(self, check_name, status, measured=None):
        """Log check end with status and the headline measurement"""
        if measured is None:
            self.logger.info(f"FINISHED CHECK: {check_name} - STATUS: {status}")
        else:
            self.logger.info(f"FINISHED CHECK: {check_name} - STATUS: {status} - MEASURED: {measured}")

    def log_step(self, step_description):
        """Log a run step"""
        self.logger.info(f"STEP: {step_description}")

    def log_measurement(self, name, value):
        """Log a measured quantity"""
        self.logger.info(f"MEASURED: {name} = {value}")

    def log_sweep_point(self, check_name, parameter, value):
        """Log one point of a parameter sweep"""
        self.logger.debug(f"SWEEP ({check_name}): {parameter} = {value}")

    def log_parameters(self, description, parameters):
        """Log run parameters"""
        self.logger.debug(f"PARAMETERS ({description}): {json.dumps(parameters, indent=2, default=str)}")

    def log_exception(self, exception, context=""):
        """Log exception with context"""
        if context:
            self.logger.error(f"EXCEPTION in {context}: {str(exception)}")
        else:
            self.logger.error(f"EXCEPTION: {str(exception)}")

    def close(self):
        """Close all handlers"""
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)


# Global logger instance
simulation_logger = None

def get_logger(log_file_path=None, log_level=logging.INFO, console_output=True):
    """Get global logger instance"""
    global simulation_logger
    if simulation_logger is None:
        simulation_logger = SimulationLogger(log_file_path, log_level, console_output)
    return simulation_logger
