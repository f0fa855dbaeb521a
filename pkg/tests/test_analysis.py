"""
Rate fitting, check results and the estimate-check registry.
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from analysis.convergence import annulus_quadrature, sweep_table
from analysis.rate_fit import CheckResult, fit_loglog, ratio_spread, strictly_decreasing
from analysis.registry import CHECK_FUNCTIONS, CheckRegistry
from base.base_test import SimulationBaseTest
from base.exceptions import ConfigError, DomainError

LIGHT_OVERRIDES = {
    "endpoint_rates": {},
    "joukowski_roundtrip": {"samples": 2000, "jet_samples": 200},
    "frac_identity": {"samples": 1000},
    "harmonic_normalization": {},
    "integrator_order": {},
    "jump_function": {},
    "tangency": {"cloud_size": 10},
    "slit_circulation": {"particle_h": 0.2},
    "velocity_endpoint_blowup": {},
}


@pytest.mark.analysis
@pytest.mark.fast
class TestRateFit(SimulationBaseTest):
    """Least-squares slopes on log-log data"""

    def test_01_exact_power_law(self):
        """y = 3 x^2 fits slope 2 with zero residual"""
        x = np.array([0.1, 0.2, 0.4, 0.8])
        fit = fit_loglog(x, 3.0 * x ** 2)
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert np.exp(fit.intercept) == pytest.approx(3.0, rel=1e-12)
        assert fit.max_residual <= 1e-12
        assert len(fit.points) == 4

    def test_02_needs_three_points(self):
        """Two points are not enough"""
        with pytest.raises(DomainError):
            fit_loglog([1.0, 2.0], [1.0, 4.0])

    def test_03_needs_positive_data(self):
        """Logs of non-positive data are rejected"""
        with pytest.raises(DomainError):
            fit_loglog([0.1, 0.2, 0.4], [1.0, 0.0, 2.0])

    def test_04_fit_row(self):
        """A fit renders as one CSV row"""
        fit = fit_loglog([1.0, 2.0, 4.0], [1.0, 0.5, 0.25])
        row = fit.as_row("sup_I1")
        assert row[0] == "sup_I1"
        assert row[1] == pytest.approx(-1.0)

    def test_05_spread_and_monotonicity(self):
        """max/min ratio and strict decrease"""
        assert ratio_spread([2.0, 3.0, 4.0]) == 2.0
        with pytest.raises(DomainError):
            ratio_spread([1.0, -1.0])
        assert strictly_decreasing([3.0, 2.0, 1.0])
        assert not strictly_decreasing([3.0, 3.0, 1.0])


@pytest.mark.analysis
@pytest.mark.fast
class TestCheckResult(SimulationBaseTest):
    """Pass/fail bookkeeping of a check"""

    def test_01_expect_fails_check(self):
        """A false expectation fails the check and names the value"""
        result = CheckResult("demo")
        result.record("slope", 0.7, "1 +- 0.1")
        assert not result.expect(False, "slope", "out of window")
        assert result.status == "fail"
        assert "slope" in result.failures[0] and "0.7" in result.failures[0]

    def test_02_summary_row(self):
        """Scalars appear in the summary; sequences stay in JSON only"""
        result = CheckResult("demo")
        result.record("slope", 0.5, "0.5 +- 0.01")
        result.record("sequence", [3.0, 2.0])
        name, status, measured, tolerance = result.summary_row()
        assert (name, status) == ("demo", "pass")
        assert measured == "slope=0.5"
        assert tolerance == "slope=0.5 +- 0.01"
        assert result.to_dict()["measured"]["sequence"] == [3.0, 2.0]


@pytest.mark.analysis
@pytest.mark.fast
class TestCheckRegistry(SimulationBaseTest):
    """Suite listing, validation and parameter lookup"""

    @classmethod
    def setup_class(cls):
        super().setup_class()
        cls.registry = CheckRegistry()

    def test_01_suite_listing(self):
        """The suite lists every check once, endpoint rates first"""
        names = self.registry.list_checks()
        assert names == list(CHECK_FUNCTIONS)
        assert len(set(names)) == len(names)
        assert len(names) >= self.oracle("cli.minimum_suite_size")
        assert names[0] == "endpoint_rates"

    def test_02_unknown_check(self):
        """Unknown names raise ConfigError"""
        with pytest.raises(ConfigError):
            self.registry.validate_check("no_such_check")

    def test_03_parameters_from_yaml(self):
        """Sweep parameters and tolerances come from checks.yaml"""
        assert self.registry.get_tolerance("endpoint_rates", "d1_window") == 0.01
        assert self.registry.get_check_params("harmonic_normalization")["radius"] == 5.0
        assert self.registry.get_tolerance("endpoint_rates", "missing", 7) == 7

    def test_04_parameters_are_copies(self):
        """Mutating returned parameters leaves the registry intact"""
        params = self.registry.get_check_params("frac_identity")
        params["samples"] = 3
        assert self.registry.get_check_params("frac_identity")["samples"] == 10000

    def test_05_missing_file_falls_back(self, tmp_path):
        """A missing checks file still lists the whole suite with in-code defaults"""
        registry = CheckRegistry(str(tmp_path / "absent.yaml"))
        assert registry.list_checks() == list(CHECK_FUNCTIONS)
        assert registry.get_check_params("tangency") == {}

    @pytest.mark.parametrize("name", sorted(LIGHT_OVERRIDES))
    def test_06_light_checks_pass(self, name, tmp_path):
        """Inexpensive checks pass and write their CSV artifacts"""
        result = self.registry.run_check(name, out_dir=str(tmp_path), overrides=LIGHT_OVERRIDES[name])
        assert result.status == "pass", result.failures
        assert result.artifacts
        for path in result.artifacts:
            assert os.path.getsize(path) > 0
            self.attach_artifact(path)

    def test_07_same_seed_same_result(self):
        """A seeded check is reproducible"""
        a = self.registry.run_check("joukowski_roundtrip", seed=7, overrides={"samples": 500, "jet_samples": 50})
        b = self.registry.run_check("joukowski_roundtrip", seed=7, overrides={"samples": 500, "jet_samples": 50})
        assert a.measured == b.measured

    def test_08_integrator_order_ratio(self, tmp_path):
        """The dt / dt/2 error ratio against a dt/4 reference sits near 17"""
        result = self.registry.run_check("integrator_order", out_dir=str(tmp_path))
        assert result.status == "pass", result.failures
        assert 12.0 <= result.measured["error_ratio"] <= 20.0
        rows = np.loadtxt(result.artifacts[0], delimiter=",", skiprows=1)
        np.testing.assert_array_equal(rows[:, 0], [0.5, 0.25])
        assert rows[0, 1] > rows[1, 1] > 0


@pytest.mark.analysis
@pytest.mark.slow
class TestFullSuite(SimulationBaseTest):
    """Every check at its configured resolution"""

    @pytest.mark.parametrize("name", list(CHECK_FUNCTIONS))
    def test_01_check_passes(self, name, tmp_path):
        """The check meets its tolerances"""
        result = CheckRegistry().run_check(name, out_dir=str(tmp_path))
        assert result.status == "pass", result.failures

    def test_02_sweep_table_decreases(self):
        """The L^1 discrepancy shrinks with eps for a circulation-only flow"""
        rows = sweep_table([0.2, 0.1, 0.05], "zero", 1.0, 0.125, 0.25, quad=annulus_quadrature(0.5, 4.0, 0.2))
        assert strictly_decreasing([row[1] for row in rows])
