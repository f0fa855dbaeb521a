"""
Batch commands behind `slitflow <mode> --config <path>`.

Each command reads a validated RunConfig, writes its CSV files into the
output directory and returns a process exit code: 0 success, 1 failed
checks or an aborted run, 2 usage or infrastructure problems.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime

import numpy as np

from analysis.convergence import sweep_table
from analysis.rate_fit import fit_loglog
from analysis.registry import get_check_registry
from base.exceptions import ConfigError, DomainError, SlitFlowError
from cli.config_parser import MODES, RunConfig, load_config_file, write_config_echo
from flow.biotsavart import ExteriorModel, physical_to_mapped_delta
from flow.cutoff import phi_eps
from flow.particles import build_preset
from flow.transport import TransportState, run
from maps.slit_map import ScaledSlitMap, ThickenedMap, dist_to_slit
from utils.config_manager import get_config_manager
from utils.logger import get_logger
from utils.report_generator import CheckReportGenerator, write_csv

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

MAP_HEADER = ["x", "y", "Tx", "Ty", "dTx", "dTy", "d2Tx", "d2Ty", "abs_T", "dist_to_slit", "admissible"]
FIELD_HEADER = ["x", "y", "ux", "uy", "phi_eps", "admissible"]
SNAPSHOT_HEADER = ["id", "x", "y", "omega"]
CONSERVATION_HEADER = ["t", "m", "l1", "l2", "l4", "linf", "support_radius", "max_step"]
SWEEP_HEADER = ["epsilon", "l1_discrepancy", "sup_I1", "sup_I2tilde"]
FIT_HEADER = ["quantity", "slope", "intercept", "max_residual"]


def _digits():
    return get_config_manager().get_output_settings().get('csv_digits', 17)


def _output(config: RunConfig, name):
    os.makedirs(config.output_dir, exist_ok=True)
    return os.path.join(config.output_dir, name)


def build_map(config: RunConfig):
    """The slit map, or the thickened map when eta > 0"""
    if config.eta > 0:
        return ThickenedMap(config.epsilon, config.eta)
    return ScaledSlitMap(config.epsilon)


def build_model(config: RunConfig, particles):
    """Exterior model; blob_delta is a physical-plane size, None picks the particle default"""
    model_map = build_map(config)
    if config.blob_delta is None:
        return ExteriorModel.for_particles(model_map, config.gamma, particles)
    return ExteriorModel(model_map, config.gamma, physical_to_mapped_delta(config.epsilon, config.blob_delta))


def cmd_probe_map(config: RunConfig):
    """map.csv: value, derivatives and slit distance of the map at every grid node"""
    nodes = config.grid().nodes()
    model_map = build_map(config)
    admissible = np.asarray(model_map.admissible(nodes), dtype=bool)
    distance = np.asarray(dist_to_slit(config.epsilon, nodes))

    value = np.full(nodes.size, np.nan, dtype=complex)
    d1 = np.full(nodes.size, np.nan, dtype=complex)
    d2 = np.full(nodes.size, np.nan, dtype=complex)
    if np.any(admissible):
        jet = model_map.jet(nodes[admissible])
        value[admissible] = jet.value
        d1[admissible] = jet.d1
        d2[admissible] = jet.d2

    rows = ([x.real, x.imag, t.real, t.imag, a.real, a.imag, b.real, b.imag,
             abs(t), dist, ok]
            for x, t, a, b, dist, ok in zip(nodes, value, d1, d2, distance, admissible))
    path = write_csv(_output(config, "map.csv"), MAP_HEADER, rows, _digits())
    get_logger().info(f"probe-map: {int(admissible.sum())} of {nodes.size} nodes admissible")
    return [path]


def cmd_field(config: RunConfig):
    """field.csv: assembled velocity and cutoff value at every grid node"""
    logger = get_logger()
    nodes = config.grid().nodes()
    particles = build_preset(config.vorticity_preset, config.particle_h)
    model = build_model(config, particles)
    logger.log_parameters("field model", {"map": repr(model.map), "gamma": model.gamma,
                                          "blob_delta": model.blob_delta, "particles": particles.count})

    admissible = np.asarray(model.admissible(nodes), dtype=bool)
    velocity = np.full(nodes.size, np.nan, dtype=complex)
    if np.any(admissible):
        velocity[admissible] = model.velocity(particles, nodes[admissible], jobs=config.jobs)

    # Phi_eps is 0 on the slit itself
    on_slit = ~np.asarray(ScaledSlitMap(config.epsilon).admissible(nodes), dtype=bool)
    phi = np.zeros(nodes.size)
    if np.any(~on_slit):
        phi[~on_slit] = phi_eps(config.epsilon, nodes[~on_slit])

    rows = ([x.real, x.imag, u.real, u.imag, p, ok]
            for x, u, p, ok in zip(nodes, velocity, phi, admissible))
    path = write_csv(_output(config, "field.csv"), FIELD_HEADER, rows, _digits())
    logger.info(f"field: {int(admissible.sum())} of {nodes.size} nodes evaluated")
    return [path]


def write_snapshot(config: RunConfig, index, particles):
    rows = ([k, x.real, x.imag, w]
            for k, (x, w) in enumerate(zip(particles.positions, particles.values)))
    return write_csv(_output(config, f"snap_{index}.csv"), SNAPSHOT_HEADER, rows, _digits())


def cmd_advect(config: RunConfig):
    """
    Advect the preset with RK4 and write snapshots, conservation.csv and status.txt.

    Snapshots are named by step index: snap_0 is the initial state, then one
    every snapshot_cadence steps (0 keeps only the first and last). A rejected
    step keeps everything written so far and flags the abort in status.txt.
    """
    logger = get_logger()
    particles = build_preset(config.vorticity_preset, config.particle_h)
    model = build_model(config, particles)
    logger.log_parameters("advect model", {"map": repr(model.map), "gamma": model.gamma,
                                           "blob_delta": model.blob_delta, "particles": particles.count})

    paths = [write_snapshot(config, 0, particles)]
    written = {0}
    cadence = config.snapshot_cadence

    def on_step(index, state, report):
        if cadence and index % cadence == 0:
            paths.append(write_snapshot(config, index, state.particles))
            written.add(index)

    outcome = run(TransportState(0.0, particles, model), config.dt, config.t_final,
                  jobs=config.jobs, keep_every=10 ** 9, on_step=on_step)

    last_index = len(outcome.reports) - 1
    if last_index not in written:
        paths.append(write_snapshot(config, last_index, outcome.final_state.particles))

    paths.append(write_csv(_output(config, "conservation.csv"), CONSERVATION_HEADER,
                           (report.as_row() for report in outcome.reports), _digits()))

    status_path = _output(config, "status.txt")
    with open(status_path, "w", encoding="utf-8", newline="\n") as file:
        if outcome.completed:
            file.write(f"completed steps={last_index} dt={outcome.dt!r}\n")
        else:
            error = outcome.error
            file.write(f"aborted steps={last_index} t={error.time!r} dt={error.dt!r} "
                       f"stage={error.stage} indices={error.indices}\n")
    paths.append(status_path)

    if not outcome.completed:
        logger.error(f"advect aborted after {last_index} steps: {outcome.error}")
        return paths, EXIT_FAILED
    return paths, EXIT_OK


def cmd_sweep_eps(config: RunConfig):
    """sweep_eps.csv and sweep_fit.csv: L^1 discrepancy to the limit flow over eps_list"""
    logger = get_logger()
    epsilons = sorted(config.eps_list, reverse=True)
    delta_phys = 2.0 * config.particle_h if config.blob_delta is None else config.blob_delta
    rows = sweep_table(epsilons, config.vorticity_preset, config.gamma, config.particle_h,
                       delta_phys, jobs=config.jobs)
    paths = [write_csv(_output(config, "sweep_eps.csv"), SWEEP_HEADER, rows, _digits())]

    fits = []
    for column, quantity in enumerate(SWEEP_HEADER[1:], start=1):
        try:
            fit = fit_loglog([row[0] for row in rows], [row[column] for row in rows])
        except DomainError as e:
            logger.warning(f"sweep-eps: no rate for {quantity}: {e}")
            continue
        logger.log_measurement(f"slope_{quantity}", fit.slope)
        fits.append(fit.as_row(quantity))
    paths.append(write_csv(_output(config, "sweep_fit.csv"), FIT_HEADER, fits, _digits()))
    return paths


def cmd_check(config: RunConfig):
    """Run the check suite (or the one named by config.check); exit 0 iff every check passes"""
    logger = get_logger()
    registry = get_check_registry()
    names = [registry.validate_check(config.check)] if config.check else registry.list_checks()

    output = get_config_manager().get_output_settings()
    report = CheckReportGenerator(config.output_dir, output.get('summary_file', 'summary.csv'),
                                  output.get('report_file', 'report.json'))
    report.start_execution()

    def job(name):
        return registry.run_check(name, out_dir=config.output_dir, seed=config.seed)

    # results are collected in registry order whatever the completion order
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = [(name, pool.submit(job, name)) for name in names]
        for name, future in futures:
            try:
                report.add_check_result(future.result())
            except Exception as e:
                logger.log_exception(e, f"check {name}")
                report.add_error(name, e)

    report.end_execution()
    report.write_summary_csv()
    report.export_json_report()

    summary = report.execution_summary
    logger.info(f"checks: {summary['passed']} passed, {summary['failed']} failed, {summary['errors']} errors")
    if summary['errors']:
        return EXIT_USAGE
    return EXIT_OK if report.all_passed else EXIT_FAILED


def dispatch(config: RunConfig):
    """Run the command for config.mode and return its exit code"""
    match config.mode:
        case "probe-map":
            cmd_probe_map(config)
            return EXIT_OK
        case "field":
            cmd_field(config)
            return EXIT_OK
        case "advect":
            _, code = cmd_advect(config)
            return code
        case "sweep-eps":
            cmd_sweep_eps(config)
            return EXIT_OK
        case "check":
            return cmd_check(config)
    raise ConfigError(f"unknown mode '{config.mode}'", key="mode")


def build_parser():
    defaults = get_config_manager().get_run_defaults()
    parser = argparse.ArgumentParser(
        prog="slitflow",
        description="Vortex flows outside a vanishing slit: map probes, fields, "
                    "advection, epsilon sweeps and estimate checks.",
        epilog="Config keys and defaults: " + ", ".join(f"{key}={value}" for key, value in defaults.items()),
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="run configuration file (key = value lines)")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--check", help="run only this check (mode check)")
    parser.add_argument("--seed", type=int, help="seed for randomized probe sampling")
    return parser


def _setup_logging():
    settings = get_config_manager().get_logging_settings()
    level = getattr(logging, str(settings.get('level', 'INFO')).upper(), logging.INFO)
    log_dir = settings.get('log_dir', 'logs/')
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return get_logger(os.path.join(log_dir, f"slitflow_{timestamp}.log"), level,
                      settings.get('console_output', True))


def main(argv=None):
    args = build_parser().parse_args(argv)
    logger = _setup_logging()
    overrides = {"mode": args.mode, "output_dir": args.out, "check": args.check, "seed": args.seed}

    try:
        config = load_config_file(args.config, overrides)
        write_config_echo(config)
        logger.log_run_start(config.mode)
        code = dispatch(config)
    except ConfigError as e:
        print(f"slitflow: configuration error: {e}", file=sys.stderr)
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except (SlitFlowError, OSError) as e:
        print(f"slitflow: {e}", file=sys.stderr)
        logger.log_exception(e, args.mode)
        return EXIT_USAGE
    except Exception as e:
        print(f"slitflow: unexpected error: {e}", file=sys.stderr)
        logger.log_exception(e, args.mode)
        return EXIT_USAGE

    logger.log_run_end(config.mode, "ok" if code == EXIT_OK else f"exit {code}")
    return code
