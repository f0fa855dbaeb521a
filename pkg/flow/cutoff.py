"""
Cutoff family Phi_eps(x) = Phi(|T_eps(x)|) that excises the obstacle neighbourhood.

Phi vanishes for s <= 2, equals 1 for s >= 3 and follows the quintic
smoothstep in between.
"""

import math
from collections import namedtuple

import numpy as np

from base.exceptions import DomainError
from maps.slit_map import ScaledSlitMap
from utils.complexplane import region_quadrature

PROFILE_LOWER = 2.0
PROFILE_UPPER = 3.0

CutoffNorms = namedtuple("CutoffNorms", ["support_measure", "grad_lp"])


def quintic_smoothstep(t):
    """6t^5 - 15t^4 + 10t^3 on [0, 1], clamped outside"""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def quintic_smoothstep_derivative(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 30.0 * t * t * (1.0 - t) ** 2, 0.0)


def profile(s):
    """Cutoff profile Phi(s)"""
    span = PROFILE_UPPER - PROFILE_LOWER
    return quintic_smoothstep((np.asarray(s, dtype=float) - PROFILE_LOWER) / span)


def profile_derivative(s):
    span = PROFILE_UPPER - PROFILE_LOWER
    return quintic_smoothstep_derivative((np.asarray(s, dtype=float) - PROFILE_LOWER) / span) / span


def _unwrap(array):
    if np.ndim(array) == 0:
        return array.item()
    return array


def phi_eps(epsilon, x):
    """Phi(|T_eps(x)|)"""
    value = ScaledSlitMap(epsilon).jet(x).value
    return _unwrap(profile(np.abs(value)))


def grad_phi_eps(epsilon, x):
    """Gradient of Phi_eps as a planar vector, Phi'(|T|) conj(T') T / |T|"""
    jet = ScaledSlitMap(epsilon).jet(x)
    modulus = np.abs(jet.value)
    return _unwrap(profile_derivative(modulus) * np.conj(jet.d1) * jet.value / modulus)


def support_area(epsilon):
    """Closed-form area of {|T_eps| <= 3}, an ellipse with semi-axes 5eps/3 and 4eps/3"""
    return 20.0 * math.pi / 9.0 * epsilon ** 2


def cutoff_quadrature(epsilon, resolution=200):
    """Quadrature on a box holding {|T_eps| <= 3} with spacing eps/resolution"""
    return region_quadrature(complex(-2.0 * epsilon, -1.5 * epsilon),
                             complex(2.0 * epsilon, 1.5 * epsilon),
                             epsilon / resolution,
                             refine_points=(-epsilon, epsilon),
                             refine_radius=0.05 * epsilon, refine_levels=2)


def cutoff_norms(epsilon, p, resolution=200) -> CutoffNorms:
    """Measure of supp(Phi_eps - 1) and ||grad Phi_eps||_{L^p} for 1 <= p < 4"""
    p = float(p)
    if not p < 4.0:
        raise DomainError("grad Phi_eps norms need p < 4", {"p": p})
    if not p >= 1.0:
        raise DomainError("L^p norm needs p >= 1", {"p": p})

    quad = cutoff_quadrature(epsilon, resolution)
    jet = ScaledSlitMap(epsilon).jet(quad.nodes)
    modulus = np.abs(jet.value)
    support = quad.restrict(modulus <= PROFILE_UPPER)
    gradient = profile_derivative(modulus) * np.abs(jet.d1)
    return CutoffNorms(support.area, quad.lp_norm(gradient, p))
