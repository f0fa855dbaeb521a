"""
Base class for the simulation test suites.

Loads configuration and the logger once per class, logs every test's start
and duration, and gives tests access to oracle values and artifact attachment.
"""

import os
import time

import allure

from utils.config_manager import get_config_manager
from utils.logger import get_logger
from utils.test_data_manager import OracleDataManager

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class SimulationBaseTest:
    """Shared setup for class-based simulation tests"""

    _config = None
    _logger = None
    _oracles = None

    @classmethod
    def setup_class(cls):
        """Setup once per test class"""
        cls._setup_logger()
        cls._config = get_config_manager().config
        cls._oracles = OracleDataManager()
        cls.logger.info(f"Setting up {cls.__name__}")

    @classmethod
    def _setup_logger(cls):
        """Setup logger with fallback"""
        try:
            cls._logger = get_logger()
        except OSError:
            # Read-only checkouts cannot create logs/
            import logging
            logging.basicConfig(level=logging.INFO)
            cls._logger = logging.getLogger(cls.__name__)
        cls.logger = cls._logger

    def setup_method(self, method):
        """Setup for each test method"""
        self.logger = self.__class__._logger
        self.config = self.__class__._config
        self._test_start_time = time.time()
        self.logger.info(f"Starting test: {method.__name__}")

    def teardown_method(self, method):
        """Log the duration of each test method"""
        duration = time.time() - getattr(self, '_test_start_time', time.time())
        self.logger.info(f"Test {method.__name__} completed in {duration:.2f}s")

    def oracle(self, name):
        """Oracle value or table from test_data/test_data.json"""
        return self.__class__._oracles.get_oracle(name)

    def attach_artifact(self, path, name=None):
        """Attach an emitted CSV (or any text file) to the allure report"""
        if not os.path.exists(path):
            self.logger.warning(f"Artifact missing: {path}")
            return None
        allure.attach.file(path, name=name or os.path.basename(path),
                           attachment_type=allure.attachment_type.CSV
                           if path.endswith(".csv") else allure.attachment_type.TEXT)
        return path
