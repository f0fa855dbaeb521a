"""
Time-dependent checks: conservation along transport runs, integrator order,
and convergence of the exterior flow to the full-plane limit as eps -> 0.
"""

import math

import numpy as np

from analysis.estimates import (_configure, emit, emit_fits, expect_at_least, expect_at_most,
                                expect_decreasing, ring)
from analysis.rate_fit import CheckResult, fit_loglog
from flow.biotsavart import (ExteriorModel, LimitModel, decomposed_integrals,
                             physical_to_mapped_delta, slit_model)
from flow.particles import VortexParticleSet, build_preset, gaussian_patch, tracers
from flow.transport import TransportState, position_error, run
from maps.slit_map import ScaledSlitMap
from utils.complexplane import Contour, contour_circulation, disk_quadrature
from utils.logger import get_logger

TRACER_PERIOD = 4.0 * math.pi ** 2


def annulus_quadrature(inner, outer, h):
    """Midpoint cells of B(0, outer) minus B(0, inner)"""
    quad = disk_quadrature(outer, h)
    return quad.restrict(np.abs(quad.nodes) > inner)


def l1_discrepancy(quad, exterior: ExteriorModel, exterior_particles, limit: LimitModel,
                   limit_particles, jobs=1):
    """||u_eps - u||_{L^1} over the quadrature region"""
    u_eps = np.asarray(exterior.velocity(exterior_particles, quad.nodes, jobs))
    u_lim = np.asarray(limit.velocity(limit_particles, quad.nodes, jobs))
    return quad.lp_norm(np.abs(u_eps - u_lim), 1.0)


def check_transport_conservation(params=None, out_dir=None) -> CheckResult:
    """Norm conservation, support growth and outer circulation along a Gaussian-patch run,
    the point-vortex tracer period and centroid invariance of the full-plane flow"""
    settings, tol = _configure(params, {"epsilon": 0.1, "particle_h": 0.125, "t_final": 1.0,
                                        "dt": 2e-3, "blob_delta_phys": 0.25, "contour_radius": 6.0,
                                        "tracer_dt": 1e-3, "pair_t_final": 0.5, "pair_dt": 0.01,
                                        "pair_h": 0.1, "pair_sigma": 0.25},
                               {"norm_drift": 1e-3, "circulation_drift": 1e-3,
                                "tracer_return": 1e-4, "centroid": 1e-5, "support_slack": 1e-6})
    result = CheckResult("transport_conservation")
    logger = get_logger()
    eps = settings["epsilon"]

    patch = gaussian_patch(settings["particle_h"])
    model = slit_model(eps, 0.0, physical_to_mapped_delta(eps, settings["blob_delta_phys"]))
    logger.log_step(f"Gaussian patch run with {patch.count} particles")
    outcome = run(TransportState(0.0, patch, model), settings["dt"], settings["t_final"])
    reports = outcome.reports

    emit(result, out_dir, "transport_conservation.csv",
         ["t", "m", "l1", "l2", "l4", "linf", "support_radius", "max_step"],
         (report.as_row() for report in reports))

    result.record("completed", outcome.completed)
    result.expect(outcome.completed, "completed", "transport run was rejected before t_final")

    first = reports[0]
    drift = max(max(abs(getattr(r, key) / getattr(first, key) - 1.0) for key in ("l1", "l2", "l4"))
                for r in reports)
    expect_at_most(result, "norm_drift", drift, tol["norm_drift"])

    # d|x|/dt <= |u| gives R(t) <= R0 + sup|u| t, with sup|u| sampled at every step start
    speed = outcome.max_speed
    excess = max(r.support_radius - (first.support_radius + speed * r.time) for r in reports)
    result.record("support_excess", excess, "<= 0")
    result.record("max_speed", speed)
    result.expect(excess <= tol["support_slack"] * (1.0 + first.support_radius), "support_excess",
                  "support radius outgrew R0 + max|u| t")

    contour = Contour.circle(0j, settings["contour_radius"], 512)
    final = outcome.final_state.particles
    start = contour_circulation(lambda x: model.velocity(patch, x), contour)
    end = contour_circulation(lambda x: model.velocity(final, x), contour)
    expect_at_most(result, "circulation_drift", abs(end - start) / (1.0 + abs(start)),
                   tol["circulation_drift"])

    logger.log_step("Point-vortex tracer over one period")
    tracer = tracers((1 + 0j,))
    tracer_run = run(TransportState(0.0, tracer, LimitModel(gamma=1.0)), settings["tracer_dt"],
                     TRACER_PERIOD, keep_every=10 ** 9)
    returned = position_error(tracer, tracer_run.final_state.particles)
    expect_at_most(result, "tracer_return", returned, tol["tracer_return"])

    logger.log_step("Two-blob centroid in the full plane")
    left = gaussian_patch(settings["pair_h"], -0.6 + 0j, settings["pair_sigma"])
    right = gaussian_patch(settings["pair_h"], 0.6 + 0j, settings["pair_sigma"])
    pair = left.concatenate(right)
    pair_model = LimitModel(0.0, 2.0 * settings["pair_h"])
    pair_run = run(TransportState(0.0, pair, pair_model), settings["pair_dt"], settings["pair_t_final"])
    shift = abs(pair_run.final_state.particles.centroid() - pair.centroid())
    expect_at_most(result, "centroid_shift", shift, tol["centroid"])
    return result


def check_integrator_order(params=None, out_dir=None) -> CheckResult:
    """Halving dt divides the RK4 position error (against a dt/4 reference) by about 17"""
    settings, tol = _configure(params, {"gamma": 1.0, "points": [[1.0, 0.0], [0.0, 1.5], [-2.0, 0.5]],
                                        "t_final": 10.0, "dt": 0.5},
                               {"ratio_low": 12.0, "ratio_high": 20.0})
    result = CheckResult("integrator_order")
    points = [complex(x, y) for x, y in settings["points"]]
    start = TransportState(0.0, tracers(points), LimitModel(gamma=settings["gamma"]))

    def final(dt):
        return run(start, dt, settings["t_final"], keep_every=10 ** 9).final_state.particles

    dt = settings["dt"]
    reference = final(dt / 4.0)
    coarse = position_error(final(dt), reference)
    fine = position_error(final(dt / 2.0), reference)
    ratio = coarse / fine

    emit(result, out_dir, "integrator_order.csv", ["dt", "position_error"],
         [[dt, coarse], [dt / 2.0, fine]])
    result.record("error_ratio", ratio, f"[{tol['ratio_low']:g}, {tol['ratio_high']:g}]")
    result.expect(tol["ratio_low"] <= ratio <= tol["ratio_high"], "error_ratio",
                  "error ratio outside the fourth-order window")
    return result


def _snapshots(outcome):
    """States at t = 0, T/2 and T of a run that kept every step"""
    trajectory = outcome.trajectory
    last = len(trajectory) - 1
    return [trajectory[0], trajectory[last // 2], trajectory[last]]


def sweep_convergence_to_limit(config=None, params=None, out_dir=None) -> CheckResult:
    """||u_eps - u||_{L^1(K)} on the annulus K decreases with eps at t = 0, T/2, T"""
    settings, tol = _configure(params, {"epsilons": [0.2, 0.1, 0.05], "t_final": 0.5, "dt": 0.01,
                                        "particle_h": 0.125, "blob_delta_phys": 0.25,
                                        "inner": 0.5, "outer": 4.0, "h": 0.1, "gamma": 1.0},
                               {"gamma_only_slope": 0.9})
    if config is not None:
        settings.update({key: value for key, value in dict(config).items() if key in settings})
    result = CheckResult("convergence_to_limit")
    logger = get_logger()
    quad = annulus_quadrature(settings["inner"], settings["outer"], settings["h"])
    delta_phys = settings["blob_delta_phys"]
    epsilons = settings["epsilons"]
    rows = []

    # gamma-only field: no particles move, one evaluation covers every time
    gamma = settings["gamma"]
    none = VortexParticleSet.empty()
    limit_gamma = LimitModel(gamma)
    static = []
    for eps in epsilons:
        value = l1_discrepancy(quad, slit_model(eps, gamma), none, limit_gamma, none)
        static.append(value)
        rows.extend(["gamma_only", eps, t, value, 0.0] for t in
                    (0.0, 0.5 * settings["t_final"], settings["t_final"]))

    pair = build_preset("dipole", settings["particle_h"])
    limit_model = LimitModel(0.0, delta_phys)
    logger.log_step(f"Limit run with {pair.count} particles")
    limit_states = _snapshots(run(TransportState(0.0, pair, limit_model), settings["dt"],
                                  settings["t_final"]))

    dynamic = {k: [] for k in range(3)}
    matching = []
    for eps in epsilons:
        model = slit_model(eps, 0.0, physical_to_mapped_delta(eps, delta_phys))
        outcome = run(TransportState(0.0, pair, model), settings["dt"], settings["t_final"])
        result.expect(outcome.completed, f"completed_eps_{eps:g}", "exterior run was rejected")
        states = _snapshots(outcome)
        for k, (state, reference) in enumerate(zip(states, limit_states)):
            value = l1_discrepancy(quad, model, state.particles, limit_model, reference.particles)
            dynamic[k].append(value)
            rows.append(["dipole", eps, state.time, value,
                         position_error(state.particles, reference.particles)])
        matching.append(position_error(states[-1].particles, limit_states[-1].particles))
        logger.log_sweep_point(result.name, "epsilon", eps)

    emit(result, out_dir, "convergence_to_limit.csv",
         ["configuration", "epsilon", "t", "l1_discrepancy", "position_error"], rows)
    fit = fit_loglog(epsilons, static)
    emit_fits(result, out_dir, "convergence_to_limit_fit.csv", {"gamma_only_l1": fit})

    expect_decreasing(result, "gamma_only_sequence", static)
    expect_at_least(result, "slope_gamma_only", fit.slope, tol["gamma_only_slope"])
    for k, label in enumerate(("t0", "t_half", "t_final")):
        expect_decreasing(result, f"dipole_{label}_sequence", dynamic[k])
    expect_decreasing(result, "position_matching_sequence", matching)
    return result


def sweep_table(epsilons, preset, gamma, particle_h, blob_delta_phys, quad=None, jobs=1):
    """Static sweep rows (epsilon, L^1 discrepancy, sup |I1|, sup |I2tilde|) for the CLI"""
    quad = quad or annulus_quadrature(0.5, 4.0, 0.1)
    particles = build_preset(preset, particle_h)
    limit_model = LimitModel(gamma, blob_delta_phys)
    probes = ring(4.0, 64)
    rows = []
    for eps in epsilons:
        model = slit_model(eps, gamma, physical_to_mapped_delta(eps, blob_delta_phys))
        discrepancy = l1_discrepancy(quad, model, particles, limit_model, particles, jobs)
        near = ScaledSlitMap(eps).level_curve(1.5, 64).vertices
        integrals = decomposed_integrals(model, particles, np.concatenate([probes, near]), jobs)
        rows.append([eps, discrepancy, float(np.max(np.abs(integrals.I1))),
                     float(np.max(np.abs(integrals.I2tilde)))])
    return rows
