"""
Estimate checks for the slit maps, the exterior Biot-Savart law and the cutoff family.

Every check sweeps a parameter, writes the raw sweep data (and fitted
slopes) as CSV, and only then compares the measurements with their
tolerances. Constants whose existence is all that is known are recorded,
never asserted.
"""

import math
import os

import numpy as np

from analysis.rate_fit import CheckResult, fit_loglog, ratio_spread, strictly_decreasing
from flow.biotsavart import (ExteriorModel, decomposed_integrals, harmonic_H, jump_function_g,
                             limit_H, physical_to_mapped_delta, reduced_velocity, slit_model)
from flow.cutoff import (PROFILE_LOWER, PROFILE_UPPER, cutoff_norms, cutoff_quadrature,
                         grad_phi_eps, support_area)
from flow.particles import VortexParticleSet, dipole, gaussian_patch
from maps.slit_map import ScaledSlitMap, SlitMap, ThickenedMap, dist_to_slit, joukowski
from utils.complexplane import (Contour, contour_circulation, disk_quadrature,
                                frac_identity_check, region_quadrature)
from utils.logger import get_logger
from utils.report_generator import write_csv

FIT_HEADER = ["quantity", "slope", "intercept", "max_residual"]

DEFAULT_EPSILONS = [0.4, 0.2, 0.1, 0.05]


def _configure(params, defaults, tolerances):
    """Merge check parameters over defaults; tolerances live in their own sub-dict"""
    params = dict(params or {})
    merged_tolerances = dict(tolerances)
    merged_tolerances.update(params.pop("tolerances", None) or {})
    merged = dict(defaults)
    merged.update(params)
    return merged, merged_tolerances


def emit(result: CheckResult, out_dir, filename, header, rows):
    """Write a sweep CSV into out_dir and list it among the result's artifacts"""
    if out_dir is None:
        return None
    path = os.path.join(out_dir, filename)
    write_csv(path, header, rows)
    result.artifacts.append(path)
    return path


def emit_fits(result, out_dir, filename, fits):
    return emit(result, out_dir, filename, FIT_HEADER,
                [fit.as_row(quantity) for quantity, fit in fits.items()])


def expect_slope(result, key, fit, target, window):
    result.record(key, fit.slope, f"{target:g} +- {window:g}")
    return result.expect(abs(fit.slope - target) <= window, key,
                         f"slope differs from {target:g} by more than {window:g}")


def expect_at_least(result, key, value, bound):
    result.record(key, value, f">= {bound:g}")
    return result.expect(value >= bound, key, f"below {bound:g}")


def expect_at_most(result, key, value, bound):
    result.record(key, value, f"<= {bound:g}")
    return result.expect(value <= bound, key, f"above {bound:g}")


def expect_decreasing(result, key, values):
    values = [float(v) for v in values]
    result.record(key, values, "strictly decreasing")
    return result.expect(strictly_decreasing(values), key, "sequence is not strictly decreasing")


def _complex(value):
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def _guard_width(epsilon):
    return max(1e-3, 0.02 * epsilon)


def guarded(points, epsilon):
    """Drop points inside the guard band around the slit [-eps, eps]"""
    points = np.asarray(points, dtype=complex)
    return points[np.asarray(dist_to_slit(epsilon, points)) >= _guard_width(epsilon)]


def random_cloud(rng, count, inner, outer, epsilon, area):
    """Random particles with values in [-1, 1] in the annulus inner <= |x| <= outer"""
    radius = rng.uniform(inner, outer, count)
    angle = rng.uniform(0.0, 2.0 * math.pi, count)
    positions = guarded(radius * np.exp(1j * angle), epsilon)
    values = rng.uniform(-1.0, 1.0, positions.size)
    return VortexParticleSet(positions, values, area)


def ring(radius, count, start=0.0, stop=2.0 * math.pi):
    """count points at angles start + (k + 1/2) (stop - start) / count"""
    angles = start + (np.arange(count) + 0.5) * (stop - start) / count
    return radius * np.exp(1j * angles)


def slit_disk_quadrature(epsilon, radius, h, fine_resolution=40, fine_extent=(2.0, 1.0),
                         refine_radius=0.05):
    """Disk quadrature with a slit-scaled fine box and endpoint refinement"""
    factor = max(1, int(round(h * fine_resolution / epsilon)))
    fine_box = (complex(-fine_extent[0] * epsilon, -fine_extent[1] * epsilon),
                complex(fine_extent[0] * epsilon, fine_extent[1] * epsilon))
    return disk_quadrature(radius, h, fine_box=fine_box, fine_factor=factor,
                           refine_points=(-epsilon, epsilon),
                           refine_radius=refine_radius * epsilon, refine_levels=2)


def check_endpoint_rates(params=None, out_dir=None) -> CheckResult:
    """Slopes of |T'|, |T''| and |T - 1| approaching the endpoint z = 1 along and across the axis"""
    settings, tol = _configure(params, {"exponents": [2, 3, 4, 5, 6, 7, 8]},
                               {"d1_window": 0.01, "d2_window": 0.02, "value_window": 0.02})
    result = CheckResult("endpoint_rates")
    d = 10.0 ** (-np.asarray(settings["exponents"], dtype=float))
    approaches = {"real": 1.0 + d, "above": 1.0 + 1j * d}

    rows = []
    fits = {}
    for label, z in approaches.items():
        jet = SlitMap().jet(z)
        series = {
            "abs_d1": np.abs(jet.d1),
            "abs_d2": np.abs(jet.d2),
            "abs_T_minus_1": np.abs(jet.value - 1.0),
        }
        rows.extend([label, dk, a, b, c] for dk, a, b, c in zip(d, *series.values()))
        for name, values in series.items():
            fits[f"{name}_{label}"] = fit_loglog(d, values)

    emit(result, out_dir, "endpoint_rates.csv",
         ["approach", "d", "abs_d1", "abs_d2", "abs_T_minus_1"], rows)
    emit_fits(result, out_dir, "endpoint_rates_fit.csv", fits)

    targets = {
        "abs_d1": (-0.5, tol["d1_window"]),
        "abs_d2": (-1.5, tol["d2_window"]),
        "abs_T_minus_1": (0.5, tol["value_window"]),
    }
    for key, fit in fits.items():
        target, window = targets[key.rsplit("_", 1)[0]]
        expect_slope(result, f"slope_{key}", fit, target, window)
    return result


def sample_exterior(rng, count, d_min, d_max):
    """Random points off the unit slit with d_min <= dist_to_slit <= d_max"""
    chunks = []
    have = 0
    while have < count:
        box = rng.uniform(-d_max - 1.0, d_max + 1.0, size=(2, count))
        # pulled-back circles populate the thin layer next to the slit
        radius = 1.0 + np.exp(rng.uniform(math.log(1e-4), math.log(d_max), count))
        near = joukowski(radius * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, count)))
        candidates = np.concatenate([box[0] + 1j * box[1], near])
        distance = np.asarray(dist_to_slit(1.0, candidates))
        kept = candidates[(distance >= d_min) & (distance <= d_max)]
        chunks.append(kept)
        have += kept.size
    return np.concatenate(chunks)[:count]


def check_joukowski_roundtrip(params=None, out_dir=None) -> CheckResult:
    """G(T(z)) = z, |T| > 1, conjugation symmetry, jet consistency and the far field of T"""
    settings, tol = _configure(params, {"samples": 10000, "d_min": 1e-3, "d_max": 10.0,
                                        "jet_samples": 1000, "jet_min_distance": 0.01, "seed": 1234},
                               {"roundtrip": 1e-10, "symmetry": 1e-12, "d1_fd": 1e-6,
                                "d2_fd": 1e-4, "far_field": 1.0})
    result = CheckResult("joukowski_roundtrip")
    rng = np.random.default_rng(settings["seed"])
    z = sample_exterior(rng, int(settings["samples"]), settings["d_min"], settings["d_max"])
    slit = SlitMap()

    value = np.asarray(slit.jet(z).value)
    roundtrip = np.abs(np.asarray(joukowski(value)) - z) / np.abs(z)
    mirrored = np.asarray(slit.jet(np.conj(z)).value)
    symmetry = np.abs(mirrored - np.conj(value)) / np.abs(value)

    probes = z[np.asarray(dist_to_slit(1.0, z)) >= settings["jet_min_distance"]]
    probes = probes[:int(settings["jet_samples"])]
    step = 5e-6 * (1.0 + np.abs(probes))
    jet = slit.jet(probes)
    plus = slit.jet(probes + step)
    minus = slit.jet(probes - step)
    d1_fd = (np.asarray(plus.value) - np.asarray(minus.value)) / (2.0 * step)
    d2_fd = (np.asarray(plus.d1) - np.asarray(minus.d1)) / (2.0 * step)
    d1_error = np.abs(d1_fd - jet.d1) / np.abs(jet.d1)
    d2_error = np.abs(d2_fd - jet.d2) / np.abs(jet.d2)

    far = np.outer(np.logspace(1, 4, 40), np.exp(2j * math.pi * np.arange(64) / 64)).ravel()
    far_jet = slit.jet(far)
    value_tail = np.abs(np.asarray(far_jet.value) - 2.0 * far) * np.abs(far)
    slope_tail = np.abs(np.asarray(far_jet.d1) - 2.0) * np.abs(far) ** 2

    emit(result, out_dir, "joukowski_roundtrip.csv",
         ["x", "y", "abs_T", "roundtrip_error", "symmetry_error"],
         ([p.real, p.imag, abs(v), r, s] for p, v, r, s in zip(z, value, roundtrip, symmetry)))

    expect_at_most(result, "max_roundtrip_error", float(np.max(roundtrip)), tol["roundtrip"])
    result.record("min_abs_T", float(np.min(np.abs(value))), "> 1")
    result.expect(bool(np.all(np.abs(value) > 1.0)), "min_abs_T", "|T| must exceed 1")
    expect_at_most(result, "max_symmetry_error", float(np.max(symmetry)), tol["symmetry"])
    expect_at_most(result, "max_d1_fd_error", float(np.max(d1_error)), tol["d1_fd"])
    expect_at_most(result, "max_d2_fd_error", float(np.max(d2_error)), tol["d2_fd"])
    expect_at_most(result, "far_value_constant", float(np.max(value_tail)), tol["far_field"])
    expect_at_most(result, "far_slope_constant", float(np.max(slope_tail)), tol["far_field"])
    return result


def check_frac_identity(params=None, out_dir=None) -> CheckResult:
    """|a* - b*| = |a - b| / (|a| |b|) on random pairs"""
    settings, tol = _configure(params, {"samples": 10000, "r_min": 0.1, "r_max": 10.0, "seed": 1234},
                               {"relative": 1e-12})
    result = CheckResult("frac_identity")
    rng = np.random.default_rng(settings["seed"])
    count = int(settings["samples"])

    def draw():
        radius = np.exp(rng.uniform(math.log(settings["r_min"]), math.log(settings["r_max"]), count))
        return radius * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, count))

    a = draw()
    b = draw()
    lhs, rhs = frac_identity_check(a, b)
    error = np.abs(lhs - rhs) / (1.0 + rhs)
    emit(result, out_dir, "frac_identity.csv", ["ax", "ay", "bx", "by", "lhs", "rhs"],
         ([p.real, p.imag, q.real, q.imag, l, r] for p, q, l, r in zip(a, b, lhs, rhs)))
    expect_at_most(result, "max_relative_error", float(np.max(error)), tol["relative"])
    return result


def check_harmonic_normalization(params=None, out_dir=None) -> CheckResult:
    """Circulation of H_eps around a large circle equals 1"""
    settings, tol = _configure(params, {"epsilons": [1.0, 0.1, 0.01], "radius": 5.0, "vertices": 512},
                               {"circulation": 1e-6})
    result = CheckResult("harmonic_normalization")
    contour = Contour.circle(0j, settings["radius"], int(settings["vertices"]))
    rows = []
    for eps in settings["epsilons"]:
        slit = ScaledSlitMap(eps)
        circulation = contour_circulation(lambda x: harmonic_H(slit, x), contour)
        rows.append([eps, circulation])
        get_logger().log_sweep_point(result.name, "epsilon", eps)
    emit(result, out_dir, "harmonic_normalization.csv", ["epsilon", "circulation"], rows)
    worst = max(abs(c - 1.0) for _, c in rows)
    expect_at_most(result, "max_circulation_error", worst, tol["circulation"])
    return result


def check_tangency(params=None, out_dir=None) -> CheckResult:
    """Normal velocity at probes just above and below the slit"""
    settings, tol = _configure(params, {"epsilon": 0.1, "stations": 9, "station_extent": 0.8,
                                        "offset": 1e-7, "cloud_size": 50, "seed": 1234},
                               {"relative_normal": 1e-5})
    result = CheckResult("tangency")
    eps = settings["epsilon"]
    rng = np.random.default_rng(settings["seed"])
    s = np.linspace(-settings["station_extent"], settings["station_extent"], int(settings["stations"]))
    probes = np.concatenate([eps * s + 1j * settings["offset"], eps * s - 1j * settings["offset"]])

    cloud = random_cloud(rng, int(settings["cloud_size"]), 0.5, 2.0, eps, 0.01)
    configurations = {
        "gamma_only": (slit_model(eps, 1.0), VortexParticleSet.empty(0.01)),
        "particle_cloud": (ExteriorModel.for_particles(ScaledSlitMap(eps), 0.0, cloud), cloud),
    }

    rows = []
    for label, (model, particles) in configurations.items():
        u = np.asarray(model.velocity(particles, probes))
        ratio = float(np.max(np.abs(u.imag)) / np.max(np.abs(u)))
        rows.extend([label, p.real, p.imag, v.real, v.imag] for p, v in zip(probes, u))
        expect_at_most(result, f"normal_ratio_{label}", ratio, tol["relative_normal"])
    emit(result, out_dir, "tangency.csv", ["configuration", "x", "y", "ux", "uy"], rows)
    return result


def check_circulation_structure(params=None, out_dir=None) -> CheckResult:
    """Outer-contour circulation equals gamma + m for random configurations"""
    settings, tol = _configure(params, {"epsilon": 0.1, "configurations": 5, "cloud_size": 30,
                                        "radius": 6.0, "vertices": 512, "blob_delta_phys": 0.02,
                                        "seed": 1234},
                               {"relative": 1e-3})
    result = CheckResult("circulation_structure")
    eps = settings["epsilon"]
    rng = np.random.default_rng(settings["seed"])
    contour = Contour.circle(0j, settings["radius"], int(settings["vertices"]))
    delta = physical_to_mapped_delta(eps, settings["blob_delta_phys"])

    rows = []
    worst = 0.0
    for index in range(int(settings["configurations"])):
        gamma = float(rng.uniform(-2.0, 2.0))
        cloud = random_cloud(rng, int(settings["cloud_size"]), 0.5, 3.0, eps, 0.01)
        model = ExteriorModel(ScaledSlitMap(eps), gamma, delta)
        circulation = contour_circulation(lambda x: model.velocity(cloud, x), contour)
        expected = gamma + cloud.mass
        scaled_error = abs(circulation - expected) / (1.0 + abs(gamma) + abs(cloud.mass))
        worst = max(worst, scaled_error)
        rows.append([index, gamma, cloud.mass, circulation, scaled_error])
    emit(result, out_dir, "circulation_structure.csv",
         ["configuration", "gamma", "mass", "circulation", "scaled_error"], rows)
    expect_at_most(result, "max_scaled_error", worst, tol["relative"])
    return result


def check_integral_scaling(params=None, out_dir=None) -> CheckResult:
    """sup |I1| and sup |I2tilde| over a physical ring and a near-slit level curve scale like eps"""
    settings, tol = _configure(params, {"epsilons": DEFAULT_EPSILONS, "particle_h": 0.1,
                                        "center": [0.0, 3.0], "sigma": 0.5, "far_radius": 5.5,
                                        "near_level": 1.5, "probes": 64},
                               {"slope_window": 0.1})
    result = CheckResult("integral_scaling")
    patch = gaussian_patch(settings["particle_h"], _complex(settings["center"]), settings["sigma"])
    count = int(settings["probes"])
    far = ring(settings["far_radius"], count)

    rows = []
    for eps in settings["epsilons"]:
        near = ScaledSlitMap(eps).level_curve(settings["near_level"], count).vertices
        probes = np.concatenate([far, near])
        integrals = decomposed_integrals(slit_model(eps), patch, probes)
        rows.append([eps, float(np.max(np.abs(integrals.I1))), float(np.max(np.abs(integrals.I2tilde)))])
        get_logger().log_sweep_point(result.name, "epsilon", eps)

    eps_values = [row[0] for row in rows]
    fits = {
        "sup_I1": fit_loglog(eps_values, [row[1] for row in rows]),
        "sup_I2tilde": fit_loglog(eps_values, [row[2] for row in rows]),
    }
    emit(result, out_dir, "integral_scaling.csv", ["epsilon", "sup_I1", "sup_I2tilde"], rows)
    emit_fits(result, out_dir, "integral_scaling_fit.csv", fits)
    for key, fit in fits.items():
        expect_slope(result, f"slope_{key}", fit, 1.0, tol["slope_window"])
    return result


def check_cutoff_lemma(params=None, out_dir=None) -> CheckResult:
    """Orthogonality of grad Phi_eps and H_eps, support area, and slopes of ||grad Phi_eps||_p"""
    settings, tol = _configure(params, {"epsilon": 0.1, "epsilons": DEFAULT_EPSILONS,
                                        "exponents": [1.0, 2.0, 3.0], "resolution": 200,
                                        "orthogonality_samples": 1000, "seed": 1234},
                               {"orthogonality": 1e-10, "area": 0.02, "slope_window": 0.05})
    result = CheckResult("cutoff_lemma")
    rng = np.random.default_rng(settings["seed"])
    eps = settings["epsilon"]
    slit = ScaledSlitMap(eps)
    count = int(settings["orthogonality_samples"])
    w = rng.uniform(PROFILE_LOWER, PROFILE_UPPER, count) * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, count))
    x = np.asarray(slit.inverse(w))
    h_field = np.asarray(harmonic_H(slit, x))
    gradient = np.asarray(grad_phi_eps(eps, x))
    scale = np.abs(h_field) * np.abs(gradient)
    dot = np.abs(h_field.real * gradient.real + h_field.imag * gradient.imag)
    orthogonality = float(np.max(np.where(scale > 0, dot / np.where(scale > 0, scale, 1.0), 0.0)))

    rows = []
    for eps_k in settings["epsilons"]:
        for p in settings["exponents"]:
            norms = cutoff_norms(eps_k, p, int(settings["resolution"]))
            rows.append([eps_k, p, norms.support_measure, support_area(eps_k), norms.grad_lp])
        get_logger().log_sweep_point(result.name, "epsilon", eps_k)

    fits = {}
    for p in settings["exponents"]:
        selected = [row for row in rows if row[1] == p]
        fits[f"grad_L{p:g}"] = fit_loglog([row[0] for row in selected], [row[4] for row in selected])

    emit(result, out_dir, "cutoff_lemma.csv",
         ["epsilon", "p", "support_measure", "support_exact", "grad_lp"], rows)
    emit_fits(result, out_dir, "cutoff_lemma_fit.csv", fits)

    expect_at_most(result, "max_orthogonality", orthogonality, tol["orthogonality"])
    area_error = max(abs(row[2] / row[3] - 1.0) for row in rows)
    expect_at_most(result, "max_support_area_error", area_error, tol["area"])
    for p in settings["exponents"]:
        expect_slope(result, f"slope_grad_L{p:g}", fits[f"grad_L{p:g}"], 2.0 / p - 1.0,
                     tol["slope_window"])
    return result


def check_cutoff_velocity(params=None, out_dir=None) -> CheckResult:
    """||v_eps||_p on {|T_eps| <= 3} and ||v_eps . perp grad Phi_eps||_{3/2} against eps"""
    settings, tol = _configure(params, {"epsilons": DEFAULT_EPSILONS, "particle_h": 0.1,
                                        "blob_delta_phys": 0.2, "resolution": 100,
                                        "exponents": [2.0, 3.0]},
                               {"slope_window": 0.1, "vphi_slack": 0.05})
    result = CheckResult("cutoff_velocity")
    patch = gaussian_patch(settings["particle_h"])

    rows = []
    for eps in settings["epsilons"]:
        quad = cutoff_quadrature(eps, int(settings["resolution"]))
        modulus = np.abs(ScaledSlitMap(eps).jet(quad.nodes).value)
        region = quad.restrict(modulus <= PROFILE_UPPER)
        model = slit_model(eps, 0.0, physical_to_mapped_delta(eps, settings["blob_delta_phys"]))
        v = np.asarray(reduced_velocity(model, patch, region.nodes))
        gradient = np.asarray(grad_phi_eps(eps, region.nodes))
        # v . perp(grad) with perp(g) = i g
        along = (np.conj(v) * 1j * gradient).real
        norms = [region.lp_norm(np.abs(v), p) for p in settings["exponents"]]
        rows.append([eps, *norms, region.lp_norm(along, 1.5)])
        get_logger().log_sweep_point(result.name, "epsilon", eps)

    eps_values = [row[0] for row in rows]
    fits = {f"v_L{p:g}": fit_loglog(eps_values, [row[1 + k] for row in rows])
            for k, p in enumerate(settings["exponents"])}
    fits["v_dot_perp_grad_L1.5"] = fit_loglog(eps_values, [row[-1] for row in rows])

    emit(result, out_dir, "cutoff_velocity.csv",
         ["epsilon", *[f"v_L{p:g}" for p in settings["exponents"]], "v_dot_perp_grad_L1.5"], rows)
    emit_fits(result, out_dir, "cutoff_velocity_fit.csv", fits)

    for p in settings["exponents"]:
        expect_slope(result, f"slope_v_L{p:g}", fits[f"v_L{p:g}"], 2.0 / p, tol["slope_window"])
    expect_at_least(result, "slope_v_dot_perp_grad", fits["v_dot_perp_grad_L1.5"].slope,
                    1.0 / 3.0 - tol["vphi_slack"])
    return result


def check_H_limit(params=None, out_dir=None) -> CheckResult:
    """H_eps -> H in L^p(B(0, 2)) for p = 1, 3/2 and pointwise at x = (2, 0)"""
    settings, tol = _configure(params, {"epsilons": DEFAULT_EPSILONS, "radius": 2.0, "h": 0.02,
                                        "fine_resolution": 40, "point": [2.0, 0.0]},
                               {"p15_slack": 0.1, "p1_factor": 1.5, "pointwise_slope": 1.0})
    result = CheckResult("H_limit")
    radius = settings["radius"]
    point = _complex(settings["point"])

    rows = []
    for eps in settings["epsilons"]:
        quad = slit_disk_quadrature(eps, radius, settings["h"], settings["fine_resolution"],
                                    fine_extent=(3.0, 3.0))
        difference = np.abs(np.asarray(harmonic_H(ScaledSlitMap(eps), quad.nodes))
                            - np.asarray(limit_H(quad.nodes)))
        pointwise = abs(harmonic_H(ScaledSlitMap(eps), point) - limit_H(point))
        rows.append([eps, quad.lp_norm(difference, 1.0), quad.lp_norm(difference, 1.5), pointwise])
        get_logger().log_sweep_point(result.name, "epsilon", eps)

    eps_values = [row[0] for row in rows]
    fits = {
        "L1": fit_loglog(eps_values, [row[1] for row in rows]),
        "L1.5": fit_loglog(eps_values, [row[2] for row in rows]),
        "pointwise": fit_loglog(eps_values, [row[3] for row in rows]),
    }
    emit(result, out_dir, "H_limit.csv", ["epsilon", "L1", "L1.5", "pointwise"], rows)
    emit_fits(result, out_dir, "H_limit_fit.csv", fits)

    expect_decreasing(result, "L1_sequence", [row[1] for row in rows])
    expect_decreasing(result, "L1.5_sequence", [row[2] for row in rows])
    expect_at_least(result, "slope_L1.5", fits["L1.5"].slope, 1.0 / 3.0 - tol["p15_slack"])

    first, last = rows[0], rows[-1]

    def log_envelope(eps):
        return eps * math.log(radius / eps)

    bound = log_envelope(last[0]) / log_envelope(first[0]) * tol["p1_factor"]
    expect_at_most(result, "L1_ratio_last_first", last[1] / first[1], bound)
    expect_at_least(result, "slope_pointwise", fits["pointwise"].slope, tol["pointwise_slope"])
    return result


def check_velocity_lp(R_list=None, params=None, out_dir=None) -> CheckResult:
    """||v_eps||_{L^3(B(0,R))} is bounded in eps and grows no faster than 1 + R^(2/3)"""
    settings, tol = _configure(params, {"epsilons": DEFAULT_EPSILONS, "R_list": [1.0, 2.0, 4.0, 8.0],
                                        "R_sweep": 2.0, "p": 3.0, "h": 0.05, "particle_h": 0.1,
                                        "blob_delta_phys": 0.2, "gammas": [0.0, 5.0],
                                        "fine_resolution": 20},
                               {"eps_spread": 1.5, "R_spread": 2.0, "gamma_relative": 1e-10})
    if R_list is not None:
        settings["R_list"] = list(R_list)
    result = CheckResult("velocity_lp")
    radii = sorted(float(r) for r in settings["R_list"])
    if settings["R_sweep"] not in radii:
        radii = sorted(radii + [float(settings["R_sweep"])])
    p = settings["p"]
    patch = gaussian_patch(settings["particle_h"])
    gamma_low, gamma_high = settings["gammas"]

    rows = []
    gamma_rows = []
    for eps in settings["epsilons"]:
        quad = slit_disk_quadrature(eps, radii[-1], settings["h"], settings["fine_resolution"],
                                    refine_radius=0.1)
        delta = physical_to_mapped_delta(eps, settings["blob_delta_phys"])
        base = slit_model(eps, gamma_low, delta)
        v = np.abs(np.asarray(reduced_velocity(base, patch, quad.nodes)))
        for radius in radii:
            inside = np.abs(quad.nodes) < radius
            norm = quad.restrict(inside).lp_norm(v[inside], p)
            rows.append([eps, radius, norm, norm / (1.0 + radius ** (2.0 / p))])

        inside = np.abs(quad.nodes) < settings["R_sweep"]
        other = slit_model(eps, gamma_high, delta)
        v_other = np.abs(np.asarray(reduced_velocity(other, patch, quad.nodes[inside])))
        norm_low = quad.restrict(inside).lp_norm(v[inside], p)
        norm_high = quad.restrict(inside).lp_norm(v_other, p)
        gamma_rows.append(abs(norm_high - norm_low) / norm_low)
        get_logger().log_sweep_point(result.name, "epsilon", eps)

    emit(result, out_dir, "velocity_lp.csv", ["epsilon", "R", "v_Lp", "v_Lp_over_envelope"], rows)

    sweep = [row[2] for row in rows if row[1] == settings["R_sweep"]]
    expect_at_most(result, "eps_spread", ratio_spread(sweep), tol["eps_spread"])
    envelope_spread = max(ratio_spread([row[3] for row in rows if row[0] == eps])
                          for eps in settings["epsilons"])
    expect_at_most(result, "R_envelope_spread", envelope_spread, tol["R_spread"])
    expect_at_most(result, "gamma_relative_difference", max(gamma_rows), tol["gamma_relative"])
    return result


def check_biholo_scalings(params=None, out_dir=None) -> CheckResult:
    """eps^-2 det DT_eps^-1 bounded, eps ||DT_eps||_p bounded, far-field |DT_eps| <= C_R / eps"""
    settings, tol = _configure(params, {"epsilons": DEFAULT_EPSILONS, "exponents": [1.0, 2.0, 3.0],
                                        "radii": [1.0, 2.0], "h": 0.02, "fine_resolution": 40,
                                        "w_radii": 60, "w_angles": 720, "w_max": 50.0,
                                        "far_point": [5.0, 0.0]},
                               {"det_spread": 1.05, "norm_spread": 1.25, "far_relative": 0.01,
                                "far_constant_spread": 1.25})
    result = CheckResult("biholo_scalings")
    epsilons = settings["epsilons"]
    radial = 1.0 + np.logspace(-9, math.log10(settings["w_max"] - 1.0), int(settings["w_radii"]))
    angles = 2.0 * math.pi * np.arange(int(settings["w_angles"])) / settings["w_angles"]
    w = np.outer(radial, np.exp(1j * angles)).ravel()
    far_point = _complex(settings["far_point"])

    det_rows = []
    norm_rows = []
    far_rows = []
    for eps in epsilons:
        slit = ScaledSlitMap(eps)
        det_rows.append([eps, float(np.max(slit.inverse_jacobian_det(w))) / eps ** 2])
        for radius in settings["radii"]:
            quad = slit_disk_quadrature(eps, radius, settings["h"], settings["fine_resolution"])
            modulus = np.abs(np.asarray(slit.jet(quad.nodes).d1))
            for p in settings["exponents"]:
                norm_rows.append([eps, radius, p, eps * quad.lp_norm(modulus, p)])
            shell = np.outer(np.linspace(radius, 10.0 * radius, 64),
                             np.exp(2j * math.pi * np.arange(128) / 128)).ravel()
            far_rows.append([eps, radius, eps * float(np.max(np.abs(np.asarray(slit.jet(shell).d1))))])
        get_logger().log_sweep_point(result.name, "epsilon", eps)

    emit(result, out_dir, "biholo_det.csv", ["epsilon", "max_scaled_det"], det_rows)
    emit(result, out_dir, "biholo_norms.csv", ["epsilon", "R", "p", "eps_times_norm"], norm_rows)
    emit(result, out_dir, "biholo_far.csv", ["epsilon", "R", "C_R"], far_rows)

    expect_at_most(result, "det_spread", ratio_spread([row[1] for row in det_rows]), tol["det_spread"])
    for radius in settings["radii"]:
        for p in settings["exponents"]:
            values = [row[3] for row in norm_rows if row[1] == radius and row[2] == p]
            expect_at_most(result, f"norm_spread_L{p:g}_R{radius:g}", ratio_spread(values),
                           tol["norm_spread"])
        constants = [row[2] for row in far_rows if row[1] == radius]
        result.record(f"C_R{radius:g}", max(constants))
        expect_at_most(result, f"far_constant_spread_R{radius:g}", ratio_spread(constants),
                       tol["far_constant_spread"])

    smallest = min(epsilons)
    far_value = smallest * abs(ScaledSlitMap(smallest).jet(far_point).d1)
    expect_at_most(result, "far_point_relative_error", abs(far_value / 2.0 - 1.0), tol["far_relative"])
    return result


def check_assumption31_family(epsilon=None, params=None, out_dir=None) -> CheckResult:
    """Properties of the thickened family T_{eps,eta} = T_eps / (1 + eta) over an eta sweep"""
    settings, tol = _configure(params, {"epsilon": 1.0, "etas": [0.2, 0.1, 0.05, 0.025],
                                        "radius": 2.0, "h": 0.01, "far_radius": 2.0,
                                        "w_radii": 60, "w_angles": 720, "w_max": 50.0},
                               {"relative_gap": 1e-10, "det_factor": 1.02, "constant_spread": 1.25})
    if epsilon is not None:
        settings["epsilon"] = float(epsilon)
    result = CheckResult("assumption31_family")
    eps = settings["epsilon"]
    slit = ScaledSlitMap(eps)

    base_quad = region_quadrature(complex(-settings["radius"], -settings["radius"]),
                                  complex(settings["radius"], settings["radius"]), settings["h"],
                                  refine_points=(-eps, eps), refine_radius=0.05 * eps, refine_levels=2)
    base_quad = base_quad.restrict(np.abs(base_quad.nodes) < settings["radius"])
    probes = np.concatenate([ring(1.5 * eps, 64), ring(3.0 * eps, 64), ring(10.0 * eps, 64)])
    radial = 1.0 + np.logspace(-9, math.log10(settings["w_max"] - 1.0), int(settings["w_radii"]))
    angles = 2.0 * math.pi * np.arange(int(settings["w_angles"])) / settings["w_angles"]
    w = np.outer(radial, np.exp(1j * angles)).ravel()
    shell = np.outer(np.logspace(math.log10(settings["far_radius"]), 2, 40),
                     np.exp(2j * math.pi * np.arange(128) / 128)).ravel()
    det_reference = float(np.max(slit.inverse_jacobian_det(w)))

    rows = []
    for eta in settings["etas"]:
        family = ThickenedMap(eps, eta)
        reference = np.asarray(slit.jet(probes).value)
        gap = float(np.max(np.abs(np.asarray(family.jet(probes).value) - reference) / np.abs(reference)))
        det_ratio = float(np.max(family.inverse_jacobian_det(w))) / det_reference

        region = base_quad.restrict(family.admissible(base_quad.nodes))
        difference = np.abs(np.asarray(family.jet(region.nodes).d1) - np.asarray(slit.jet(region.nodes).d1))
        far_jet = family.jet(shell)
        c_first = float(np.max(np.abs(far_jet.d1)))
        c_second = float(np.max(np.abs(far_jet.d2) * np.abs(shell)))
        rows.append([eta, gap, eta / (1.0 + eta), det_ratio, region.lp_norm(difference, 3.0),
                     c_first, c_second])
        get_logger().log_sweep_point(result.name, "eta", eta)

    emit(result, out_dir, "assumption31_family.csv",
         ["eta", "relative_gap", "eta_over_1_plus_eta", "det_ratio", "dT_gap_L3", "C_first", "C_second"],
         rows)

    gap_error = max(abs(row[1] - row[2]) for row in rows)
    expect_at_most(result, "relative_gap_error", gap_error, tol["relative_gap"])
    det_excess = max(row[3] / (1.0 + row[0]) ** 2 for row in rows)
    expect_at_most(result, "det_ratio_over_scaling", det_excess, tol["det_factor"])
    expect_decreasing(result, "dT_gap_L3_sequence", [row[4] for row in rows])
    result.record("C_first", max(row[5] for row in rows))
    result.record("C_second", max(row[6] for row in rows))
    expect_at_most(result, "C_first_spread", ratio_spread([row[5] for row in rows]), tol["constant_spread"])
    expect_at_most(result, "C_second_spread", ratio_spread([row[6] for row in rows]), tol["constant_spread"])
    return result


def check_thickening_limit(params=None, out_dir=None) -> CheckResult:
    """The field outside the ellipse tends to the slit field as eta -> 0"""
    settings, tol = _configure(params, {"epsilon": 1.0, "gamma": 1.0, "etas": [0.2, 0.1, 0.05, 0.025],
                                        "particle_h": 0.2, "far_radius": 5.0, "near_radius": 1.3},
                               {})
    result = CheckResult("thickening_limit")
    eps = settings["epsilon"]
    patch = gaussian_patch(settings["particle_h"])
    # the lower half of the near ring stays clear of the patch above the slit
    probes = np.concatenate([ring(settings["far_radius"], 64),
                             ring(settings["near_radius"], 32, math.pi, 2.0 * math.pi)])
    slit_field = np.asarray(slit_model(eps, settings["gamma"]).velocity(patch, probes))

    rows = []
    for eta in settings["etas"]:
        model = ExteriorModel(ThickenedMap(eps, eta), settings["gamma"], 0.0)
        difference = np.abs(np.asarray(model.velocity(patch, probes)) - slit_field)
        rows.append([eta, float(np.max(difference))])
        get_logger().log_sweep_point(result.name, "eta", eta)

    emit(result, out_dir, "thickening_limit.csv", ["eta", "sup_difference"], rows)
    fit = fit_loglog([row[0] for row in rows], [row[1] for row in rows])
    emit_fits(result, out_dir, "thickening_limit_fit.csv", {"sup_difference": fit})
    result.record("slope_sup_difference", fit.slope)
    expect_decreasing(result, "sup_difference_sequence", [row[1] for row in rows])
    return result


def check_slit_circulation(params=None, out_dir=None) -> CheckResult:
    """Circulation around the level curve |T_eps| = 1.05 equals gamma"""
    settings, tol = _configure(params, {"epsilon": 0.1, "gammas": [0.0, 1.5, -2.0], "level": 1.05,
                                        "vertices": 512, "particle_h": 0.1, "blob_delta_phys": 0.0},
                               {"relative": 1e-3})
    result = CheckResult("slit_circulation")
    eps = settings["epsilon"]
    patch = gaussian_patch(settings["particle_h"])
    contour = ScaledSlitMap(eps).level_curve(settings["level"], int(settings["vertices"]))
    delta = physical_to_mapped_delta(eps, settings["blob_delta_phys"])

    rows = []
    worst = 0.0
    for gamma in settings["gammas"]:
        model = slit_model(eps, gamma, delta)
        circulation = contour_circulation(lambda x: model.velocity(patch, x), contour)
        error = abs(circulation - gamma) / (1.0 + abs(gamma))
        worst = max(worst, error)
        rows.append([gamma, patch.mass, circulation, error])
    emit(result, out_dir, "slit_circulation.csv", ["gamma", "mass", "circulation", "scaled_error"], rows)
    expect_at_most(result, "max_scaled_error", worst, tol["relative"])
    return result


def check_velocity_endpoint_blowup(params=None, out_dir=None) -> CheckResult:
    """|u| of the gamma-only field along x = eps (1 + d) blows up like d^(-1/2)"""
    settings, tol = _configure(params, {"epsilon": 0.1, "gamma": 1.0, "exponents": [2, 3, 4, 5, 6, 7, 8]},
                               {"slope_window": 0.05})
    result = CheckResult("velocity_endpoint_blowup")
    eps = settings["epsilon"]
    d = 10.0 ** (-np.asarray(settings["exponents"], dtype=float))
    model = slit_model(eps, settings["gamma"])
    speed = np.abs(np.asarray(model.velocity(VortexParticleSet.empty(), eps * (1.0 + d))))
    fit = fit_loglog(d, speed)
    emit(result, out_dir, "velocity_endpoint_blowup.csv", ["d", "speed"], zip(d, speed))
    emit_fits(result, out_dir, "velocity_endpoint_blowup_fit.csv", {"speed": fit})
    expect_slope(result, "slope_speed", fit, -0.5, tol["slope_window"])
    return result


def jump_quadrature(count):
    """
    Ascending Gauss-Chebyshev stations and weights for integrals over (-1, 1).

    The sqrt(1 - s^2) factor is folded into the weights, so a jump behaving
    like 1/sqrt(1 - s^2) integrates exactly.
    """
    s, weights = np.polynomial.chebyshev.chebgauss(count)
    order = np.argsort(s)
    s = s[order]
    return s, weights[order] * np.sqrt(1.0 - s * s)


def check_jump_function(params=None, out_dir=None) -> CheckResult:
    """Jump of the tangential velocity across the slit: total mass, endpoint blow-up, symmetry"""
    settings, tol = _configure(params, {"epsilon": 0.1, "gamma": 1.0, "stations": 64,
                                        "endpoint_distances": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
                                        "dipole_h": 0.1, "dipole_stations": 20},
                               {"integral": 1e-3, "slope_window": 0.05, "symmetric": 1e-6})
    result = CheckResult("jump_function")
    eps = settings["epsilon"]
    s, weights = jump_quadrature(int(settings["stations"]))
    model = slit_model(eps, settings["gamma"])
    none = VortexParticleSet.empty()
    g = np.asarray(jump_function_g(model, none, s))
    integral = math.fsum((g * eps * weights).tolist())

    d = np.asarray(settings["endpoint_distances"], dtype=float)
    g_end = np.abs(np.asarray(jump_function_g(model, none, 1.0 - d)))
    fit = fit_loglog(d, g_end)

    pair = dipole(settings["dipole_h"])
    symmetric_model = ExteriorModel.for_particles(ScaledSlitMap(eps), 0.0, pair)
    stations = np.linspace(-0.9, 0.9, int(settings["dipole_stations"]))
    g_dipole = np.asarray(jump_function_g(symmetric_model, pair, stations))

    emit(result, out_dir, "jump_function.csv", ["s", "g"], zip(s, g))
    emit(result, out_dir, "jump_function_endpoint.csv", ["d", "abs_g"], zip(d, g_end))
    emit(result, out_dir, "jump_function_dipole.csv", ["s", "g"], zip(stations, g_dipole))
    emit_fits(result, out_dir, "jump_function_fit.csv", {"abs_g_endpoint": fit})

    target = settings["gamma"]
    result.record("integral", integral, f"{target:g} +- {tol['integral']:g} relative")
    result.expect(abs(integral - target) <= tol["integral"] * abs(target), "integral",
                  "integral of the jump differs from gamma")
    expect_slope(result, "slope_endpoint", fit, -0.5, tol["slope_window"])
    expect_at_most(result, "max_abs_g_dipole", float(np.max(np.abs(g_dipole))), tol["symmetric"])
    return result
