"""
Run configuration parsing and the batch commands behind the slitflow CLI.
"""

import csv
import math
import os
import sys

import numpy as np
import pytest
from scipy.interpolate import RegularGridInterpolator

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from base.base_test import SimulationBaseTest
from base.exceptions import ConfigError
from cli.commands import (EXIT_OK, EXIT_USAGE, MAP_HEADER, cmd_advect, cmd_field, cmd_probe_map,
                          cmd_sweep_eps, main)
from cli.config_parser import ECHO_FILE, RunConfig, parse_config, read_pairs, write_config_echo
from utils.complexplane import Contour, contour_circulation


def config_text(**pairs):
    return "".join(f"{key} = {value}\n" for key, value in pairs.items())


def make_config(tmp_path, mode, **pairs):
    pairs.setdefault("output_dir", str(tmp_path / "out"))
    return parse_config(config_text(mode=mode, **pairs))


def write_config_file(tmp_path, **pairs):
    path = tmp_path / "run.cfg"
    path.write_text(config_text(**pairs), encoding="utf-8")
    return str(path)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as file:
        return list(csv.DictReader(file))


@pytest.mark.cli
@pytest.mark.fast
class TestConfigParser(SimulationBaseTest):
    """key = value files, validation and the effective-config echo"""

    def test_01_valid_file(self):
        """Values are coerced per key and missing keys take defaults"""
        config = parse_config("# a run\nmode = field\nepsilon = 0.1  # slit half-width\n"
                              "grid_origin = -1, -1.5\ngrid_nx = 8\n")
        assert isinstance(config, RunConfig)
        assert config.mode == "field"
        assert config.epsilon == 0.1
        assert config.grid_origin == (-1.0, -1.5)
        assert config.grid_nx == 8
        assert config.grid().nodes().size == 8 * config.grid_ny

    def test_02_rejects_negative_epsilon(self):
        """epsilon = -1 is rejected with its line number"""
        with pytest.raises(ConfigError) as info:
            parse_config("mode = field\nepsilon = -1\n")
        assert info.value.line_number == 2
        assert info.value.key == "epsilon"
        assert "> 0" in str(info.value)

    def test_03_empty_file_needs_mode(self):
        """An empty file has no mode"""
        with pytest.raises(ConfigError) as info:
            parse_config("")
        assert "mode" in str(info.value)
        assert parse_config("", {"mode": "check"}).mode == "check"

    def test_04_unknown_and_duplicate_keys(self):
        """Unknown keys, duplicates and lines without '=' are errors"""
        with pytest.raises(ConfigError) as info:
            read_pairs("mode = field\nepsilom = 0.1\n")
        assert info.value.line_number == 2
        with pytest.raises(ConfigError) as info:
            read_pairs("epsilon = 0.1\nepsilon = 0.2\n")
        assert info.value.line_number == 2
        with pytest.raises(ConfigError):
            read_pairs("epsilon 0.1\n")

    def test_05_type_errors(self):
        """Non-numeric numbers and non-integer counts are rejected"""
        with pytest.raises(ConfigError):
            parse_config("mode = field\ngamma = lots\n")
        with pytest.raises(ConfigError):
            parse_config("mode = field\ngrid_nx = 2.5\n")
        with pytest.raises(ConfigError):
            parse_config("mode = field\nvorticity_preset = hurricane\n")

    def test_06_overrides(self):
        """Command-line values win; a conflicting file mode is an error"""
        config = parse_config("mode = check\nseed = 3\n", {"mode": "check", "seed": 9, "output_dir": None})
        assert config.seed == 9
        with pytest.raises(ConfigError):
            parse_config("mode = field\n", {"mode": "advect"})

    def test_07_echo_round_trip(self, tmp_path):
        """The effective-config echo parses back to the same configuration"""
        config = make_config(tmp_path, "sweep-eps", epsilon="1e-5", eps_list="0.3, 0.03",
                             blob_delta="0.05", check="tangency")
        path = write_config_echo(config)
        assert os.path.basename(path) == ECHO_FILE
        with open(path, encoding="utf-8") as file:
            assert parse_config(file.read()) == config


@pytest.mark.cli
@pytest.mark.fast
class TestBatchCommands(SimulationBaseTest):
    """probe-map, field, advect and sweep-eps outputs"""

    def test_01_probe_map(self, tmp_path):
        """map.csv has one row per node and leaves slit nodes empty"""
        config = make_config(tmp_path, "probe-map", epsilon=0.5, grid_origin="-1, -1", grid_h=0.5,
                             grid_nx=5, grid_ny=5)
        path, = cmd_probe_map(config)
        rows = read_rows(path)
        assert list(rows[0]) == MAP_HEADER
        assert len(rows) == 25
        centre = rows[12]
        assert (float(centre["x"]), float(centre["y"])) == (0.0, 0.0)
        assert centre["admissible"] == "0" and centre["Tx"] == ""
        far = rows[0]
        assert far["admissible"] == "1"
        assert float(far["abs_T"]) > 1.0

    def test_02_zero_field(self, tmp_path):
        """No vorticity and no circulation give zero velocity"""
        config = make_config(tmp_path, "field", vorticity_preset="zero", gamma=0, grid_h=0.25,
                             grid_nx=16, grid_ny=16)
        rows = read_rows(cmd_field(config)[0])
        evaluated = [row for row in rows if row["admissible"] == "1"]
        assert len(evaluated) == len(rows) - 1
        assert all(float(row["ux"]) == 0.0 and float(row["uy"]) == 0.0 for row in evaluated)
        slit = [row for row in rows if row["admissible"] == "0"][0]
        assert slit["ux"] == "" and float(slit["phi_eps"]) == 0.0

    def test_03_field_is_deterministic(self, tmp_path):
        """Two runs with the same configuration write identical bytes"""
        outputs = []
        for name in ("a", "b"):
            config = make_config(tmp_path, "field", output_dir=str(tmp_path / name), gamma=0.5,
                                 particle_h=0.25, grid_h=0.25, grid_nx=16, grid_ny=16)
            with open(cmd_field(config)[0], "rb") as file:
                outputs.append(file.read())
        assert outputs[0] == outputs[1]

    def test_04_field_circulation(self, tmp_path):
        """The circulation of the written gamma-only field around the slit is gamma"""
        gamma = self.oracle("cli.field_circulation_gamma")
        config = make_config(tmp_path, "field", vorticity_preset="zero", gamma=gamma)
        rows = read_rows(cmd_field(config)[0])
        nx, ny = config.grid_nx, config.grid_ny
        xs = np.array([float(row["x"]) for row in rows[:nx]])
        ys = np.array([float(rows[k * nx]["y"]) for k in range(ny)])
        ux = np.array([float(row["ux"] or "nan") for row in rows]).reshape(ny, nx)
        uy = np.array([float(row["uy"] or "nan") for row in rows]).reshape(ny, nx)
        interp_x = RegularGridInterpolator((ys, xs), ux)
        interp_y = RegularGridInterpolator((ys, xs), uy)

        def field(points):
            points = np.asarray(points)
            sample = np.column_stack([points.imag.ravel(), points.real.ravel()])
            return (interp_x(sample) + 1j * interp_y(sample)).reshape(points.shape)

        contour = Contour.circle(-0.03125 - 0.03125j, 1.9, 512)
        circulation = contour_circulation(field, contour)
        assert abs(circulation - gamma) <= self.oracle("cli.field_circulation_tolerance")

    def test_05_advect_outputs(self, tmp_path):
        """cadence 0 keeps the first and last snapshot; conservation has one row per step"""
        config = make_config(tmp_path, "advect", particle_h=0.25, dt=0.01, t_final=0.05,
                             snapshot_cadence=0)
        paths, code = cmd_advect(config)
        assert code == EXIT_OK
        names = sorted(os.listdir(config.output_dir))
        assert "snap_0.csv" in names and "snap_5.csv" in names
        assert len([name for name in names if name.startswith("snap_")]) == 2
        conservation = read_rows(os.path.join(config.output_dir, "conservation.csv"))
        assert len(conservation) == 6
        assert float(conservation[-1]["t"]) == pytest.approx(0.05)
        with open(os.path.join(config.output_dir, "status.txt"), encoding="utf-8") as file:
            assert file.read().startswith("completed steps=5")
        first = read_rows(os.path.join(config.output_dir, "snap_0.csv"))
        last = read_rows(os.path.join(config.output_dir, "snap_5.csv"))
        assert [row["omega"] for row in first] == [row["omega"] for row in last]

    def test_06_advect_cadence(self, tmp_path):
        """Snapshots every 2 steps plus the final one"""
        config = make_config(tmp_path, "advect", particle_h=0.25, dt=0.01, t_final=0.05,
                             snapshot_cadence=2)
        cmd_advect(config)
        names = sorted(name for name in os.listdir(config.output_dir) if name.startswith("snap_"))
        assert names == ["snap_0.csv", "snap_2.csv", "snap_4.csv", "snap_5.csv"]

    def test_07_sweep_eps(self, tmp_path):
        """The sweep lists eps in decreasing order and fits the discrepancy rate"""
        config = make_config(tmp_path, "sweep-eps", vorticity_preset="zero", gamma=1.0,
                             eps_list="0.05, 0.2, 0.1")
        cmd_sweep_eps(config)
        rows = read_rows(os.path.join(config.output_dir, "sweep_eps.csv"))
        assert [float(row["epsilon"]) for row in rows] == [0.2, 0.1, 0.05]
        discrepancy = [float(row["l1_discrepancy"]) for row in rows]
        assert discrepancy[0] > discrepancy[1] > discrepancy[2]
        fits = read_rows(os.path.join(config.output_dir, "sweep_fit.csv"))
        assert [row["quantity"] for row in fits] == ["l1_discrepancy"]
        assert float(fits[0]["slope"]) > 0

    def test_08_tracer_field_on_default_grid(self, tmp_path):
        """A passive tracer sitting on a grid node leaves the gamma-only field unchanged"""
        tracer = make_config(tmp_path, "field", output_dir=str(tmp_path / "tracer"),
                             vorticity_preset="tracer", gamma=1)
        bare = make_config(tmp_path, "field", output_dir=str(tmp_path / "bare"),
                           vorticity_preset="zero", gamma=1)
        rows = read_rows(cmd_field(tracer)[0])
        reference = read_rows(cmd_field(bare)[0])
        assert len(rows) == tracer.grid_nx * tracer.grid_ny
        node = [row for row in rows if float(row["x"]) == 1.0 and float(row["y"]) == 0.0]
        assert len(node) == 1 and node[0]["admissible"] == "1"
        assert math.isfinite(float(node[0]["ux"])) and math.isfinite(float(node[0]["uy"]))
        for row, expected in zip(rows, reference):
            assert row["admissible"] == expected["admissible"]
            if row["admissible"] == "1":
                assert float(row["ux"]) == pytest.approx(float(expected["ux"]), rel=1e-12, abs=1e-15)
                assert float(row["uy"]) == pytest.approx(float(expected["uy"]), rel=1e-12, abs=1e-15)


@pytest.mark.cli
@pytest.mark.fast
class TestMain(SimulationBaseTest):
    """Exit codes of the command-line entry point"""

    def test_01_single_check(self, tmp_path):
        """--check endpoint_rates runs one check and writes one summary row"""
        path = write_config_file(tmp_path, mode="check")
        out = tmp_path / "checks"
        assert main(["check", "--config", path, "--check", "endpoint_rates", "--out", str(out)]) == EXIT_OK
        rows = read_rows(str(out / "summary.csv"))
        assert [(row["name"], row["status"]) for row in rows] == [("endpoint_rates", "pass")]
        assert (out / "report.json").exists()
        assert (out / ECHO_FILE).exists()
        self.attach_artifact(str(out / "summary.csv"))

    def test_02_unknown_check(self, tmp_path, capsys):
        """An unknown check name is a usage error"""
        path = write_config_file(tmp_path, mode="check")
        code = main(["check", "--config", path, "--check", "no_such_check", "--out", str(tmp_path / "o")])
        assert code == EXIT_USAGE
        assert "no_such_check" in capsys.readouterr().err

    def test_03_invalid_config(self, tmp_path, capsys):
        """An invalid value exits 2 and names the line"""
        path = write_config_file(tmp_path, mode="field", epsilon=-1)
        assert main(["field", "--config", path, "--out", str(tmp_path / "o")]) == EXIT_USAGE
        assert "line 2" in capsys.readouterr().err

    def test_04_missing_config_file(self, tmp_path):
        """An unreadable config file exits 2"""
        assert main(["field", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE

    def test_05_usage(self):
        """Missing --config is an argparse usage error"""
        with pytest.raises(SystemExit) as info:
            main(["field"])
        assert info.value.code == 2


@pytest.mark.cli
@pytest.mark.slow
class TestTracerOrbit(SimulationBaseTest):
    """End-to-end advection of a tracer around a tiny slit"""

    def test_01_tracer_returns_after_one_period(self, tmp_path):
        """After 4 pi^2 the unit-radius tracer is back at (1, 0)"""
        period = self.oracle("transport.tracer_period")
        path = write_config_file(tmp_path, mode="advect", epsilon=1e-4, vorticity_preset="tracer",
                                 gamma=1.0, dt=0.01, t_final=repr(period))
        out = tmp_path / "orbit"
        assert main(["advect", "--config", path, "--out", str(out)]) == EXIT_OK
        steps = math.ceil(period / 0.01 - 1e-9)
        final = read_rows(str(out / f"snap_{steps}.csv"))[0]
        assert abs(complex(float(final["x"]), float(final["y"])) - 1.0) <= 1e-4
