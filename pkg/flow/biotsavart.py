"""
Biot-Savart assembly for the flow outside a slit (or a confocal ellipse) and
for the full-plane point-vortex limit.

Exterior law, for the map T of the obstacle exterior:

    u(x) = (1/2pi) DT(x)^t (I1 - I2) + (gamma + m) H(x)

with I1 the direct mapped-plane vortex sum, I2 the image sum at the
inverted points T(y)* and H the harmonic field of unit circulation.
Blob regularisation acts in the mapped plane; the image denominator gets
delta^2 / |T(y)|^2 so the velocity stays tangent to the obstacle.
"""

import math
from abc import ABC, abstractmethod
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from base.base_map import ConformalMap
from base.exceptions import DomainError
from flow.particles import VortexParticleSet, median_spacing
from maps.slit_map import ScaledSlitMap
from utils.complexplane import as_points

TWO_PI = 2.0 * math.pi

# Upper bound on probe x particle entries per vectorised block
BLOCK_ENTRIES = 1 << 21

GreenEval = namedtuple("GreenEval", ["value"])
DecomposedIntegrals = namedtuple("DecomposedIntegrals", ["I1", "I2", "I2tilde"])


def _unwrap(array):
    if np.ndim(array) == 0:
        return array.item()
    return array


def _blocks(count, particles):
    size = max(1, BLOCK_ENTRIES // max(1, particles))
    return [slice(start, min(start + size, count)) for start in range(0, count, size)]


def _map_blocks(function, count, particles, jobs):
    """Evaluate function(block) for every probe block, results kept in block order"""
    blocks = _blocks(count, particles)
    if jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(function, blocks))
    return [function(block) for block in blocks]


def _weighted_sums(diff, denom, weights, message):
    """sum_j diff^perp * weights_j / denom; coincident zero-weight sources contribute nothing"""
    hit = denom == 0
    if np.any(hit):
        loaded = hit & (weights[None, :] != 0)
        if np.any(loaded):
            raise DomainError(message, {"count": int(np.count_nonzero(loaded))})
        denom = np.where(hit, np.inf, denom)
    scale = weights[None, :] / denom
    return 1j * (np.sum(diff.real * scale, axis=1) + 1j * np.sum(diff.imag * scale, axis=1))


def vortex_sums(w, sources, weights, delta=0.0, image_delta2=None):
    """
    Mapped-plane sums sum_j (w - s_j)^perp / (|w - s_j|^2 + d_j^2) * weights_j.

    w has shape (M,), sources and weights (N,). image_delta2 overrides the
    per-source regularisation d_j^2 (default delta^2).
    """
    diff = w[:, None] - sources[None, :]
    dist2 = diff.real ** 2 + diff.imag ** 2
    reg = delta * delta if image_delta2 is None else image_delta2[None, :]
    return _weighted_sums(diff, dist2 + reg, weights, "probe coincides with an unregularised vortex")


def green_function(model_map: ConformalMap, x, y) -> GreenEval:
    """(1/2pi) ln(|T(x) - T(y)| / (|T(x) - T(y)*| |T(y)|)), zero on the obstacle"""
    x = as_points(x)
    y = as_points(y)
    if np.any(x == y):
        raise DomainError("Green's function is singular for coincident points")
    w = np.asarray(model_map.jet(x).value)
    eta = np.asarray(model_map.jet(y).value)
    # |w - eta*| |eta| = |w conj(eta) - 1|
    value = np.log(np.abs(w - eta) / np.abs(w * np.conj(eta) - 1.0)) / TWO_PI
    return GreenEval(_unwrap(value))


def kernel_K(model_map: ConformalMap, x, y, blob_delta=0.0):
    """Exterior Biot-Savart kernel K(x, y) for every pair of x and y (broadcast)"""
    x, y = np.broadcast_arrays(as_points(x), as_points(y))
    jet = model_map.jet(x)
    w = np.asarray(jet.value)
    eta = np.asarray(model_map.jet(y).value)
    eta_star = 1.0 / np.conj(eta)
    delta2 = float(blob_delta) ** 2

    direct = w - eta
    image = w - eta_star
    direct_den = np.abs(direct) ** 2 + delta2
    image_den = np.abs(image) ** 2 + delta2 / np.abs(eta) ** 2
    if np.any(direct_den == 0):
        raise DomainError("kernel is singular for coincident points without regularisation")
    bracket = 1j * direct / direct_den - 1j * image / image_den
    return _unwrap(np.conj(np.asarray(jet.d1)) * bracket / TWO_PI)


def harmonic_H(model_map: ConformalMap, x):
    """Harmonic field (1/2pi) DT^t T^perp / |T|^2 with unit circulation around the obstacle"""
    jet = model_map.jet(x)
    w = np.asarray(jet.value)
    return _unwrap(np.conj(np.asarray(jet.d1)) * 1j * w / (np.abs(w) ** 2) / TWO_PI)


def limit_H(x):
    """Point-vortex field x^perp / (2pi |x|^2)"""
    x = as_points(x)
    if np.any(x == 0):
        raise DomainError("point-vortex field is singular at the origin")
    return _unwrap(1j * x / (np.abs(x) ** 2) / TWO_PI)


class VelocityModel(ABC):
    """Velocity evaluator shared by the exterior and the full-plane models"""

    gamma = 0.0
    blob_delta = 0.0

    @abstractmethod
    def velocity(self, particles: VortexParticleSet, x, jobs=1):
        """Velocity at probes x"""

    @abstractmethod
    def particle_velocity(self, particles: VortexParticleSet, jobs=1):
        """Velocity at the particles themselves, direct self-interaction excluded"""

    @abstractmethod
    def admissible(self, x):
        """Boolean mask of points where the velocity is defined"""


@dataclass(frozen=True)
class ExteriorModel(VelocityModel):
    """Biot-Savart law outside the obstacle of a conformal map"""

    map: ConformalMap
    gamma: float = 0.0
    blob_delta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError("circulation must be finite", {"gamma": self.gamma})
        if not (self.blob_delta >= 0 and math.isfinite(self.blob_delta)):
            raise DomainError("blob_delta must be non-negative", {"blob_delta": self.blob_delta})

    @property
    def epsilon(self):
        return self.map.epsilon

    @classmethod
    def for_particles(cls, model_map, gamma, particles, blob_delta=None):
        """Model whose blob size defaults to twice the median mapped-plane spacing"""
        if blob_delta is None:
            blob_delta = default_blob_delta(model_map, particles)
        return cls(model_map, float(gamma), float(blob_delta))

    def admissible(self, x):
        return self.map.admissible(as_points(x))

    def _sources(self, particles):
        if particles.count == 0:
            empty = np.zeros(0, dtype=complex)
            return empty, empty, np.zeros(0), np.zeros(0)
        self.map.require_admissible(particles.positions)
        eta = np.asarray(self.map.jet(particles.positions).value, dtype=complex).ravel()
        eta_star = 1.0 / np.conj(eta)
        image_delta2 = self.blob_delta ** 2 / np.abs(eta) ** 2
        return eta, eta_star, image_delta2, particles.weights

    def integrals(self, particles, x, jobs=1, self_pairs=False):
        """Mapped-plane sums (I1, I2) and the jet at the probes"""
        x = as_points(x)
        shape = x.shape
        flat = x.ravel()
        jet = self.map.jet(flat)
        w = np.atleast_1d(np.asarray(jet.value, dtype=complex))
        eta, eta_star, image_delta2, weights = self._sources(particles)

        if eta.size == 0:
            zero = np.zeros(w.size, dtype=complex)
            return zero.reshape(shape), zero.copy().reshape(shape), jet

        def block_sums(block):
            if self_pairs:
                direct = _self_block(w, eta, weights, self.blob_delta, block)
            else:
                direct = vortex_sums(w[block], eta, weights, self.blob_delta)
            image = vortex_sums(w[block], eta_star, weights, image_delta2=image_delta2)
            return direct, image

        results = _map_blocks(block_sums, w.size, eta.size, jobs)
        I1 = np.concatenate([r[0] for r in results]).reshape(shape)
        I2 = np.concatenate([r[1] for r in results]).reshape(shape)
        return I1, I2, jet

    def velocity(self, particles, x, jobs=1):
        return self._assemble(particles, x, jobs, self_pairs=False)

    def particle_velocity(self, particles, jobs=1):
        return self._assemble(particles, particles.positions, jobs, self_pairs=True)

    def _assemble(self, particles, x, jobs, self_pairs):
        I1, I2, jet = self.integrals(particles, x, jobs, self_pairs)
        w = np.asarray(jet.value).reshape(np.shape(I1))
        d1 = np.asarray(jet.d1).reshape(np.shape(I1))
        alpha = self.gamma + particles.mass
        harmonic = 1j * w / np.abs(w) ** 2
        return _unwrap(np.conj(d1) * ((I1 - I2) + alpha * harmonic) / TWO_PI)


def _self_block(w, sources, weights, delta, block):
    """Direct sums for a probe block of the particle positions, diagonal removed"""
    diff = w[block][:, None] - sources[None, :]
    denom = diff.real ** 2 + diff.imag ** 2 + delta * delta
    rows = np.arange(block.stop - block.start)
    denom[rows, rows + block.start] = np.inf
    return _weighted_sums(diff, denom, weights, "particles coincide without regularisation")


@dataclass(frozen=True)
class LimitModel(VelocityModel):
    """Full-plane Biot-Savart law with a point vortex gamma at the origin"""

    gamma: float = 0.0
    blob_delta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError("circulation must be finite", {"gamma": self.gamma})
        if not (self.blob_delta >= 0 and math.isfinite(self.blob_delta)):
            raise DomainError("blob_delta must be non-negative", {"blob_delta": self.blob_delta})

    def admissible(self, x):
        x = as_points(x)
        if self.gamma != 0 and self.blob_delta == 0:
            return x != 0
        return np.ones(x.shape, dtype=bool)

    def velocity(self, particles, x, jobs=1):
        return self._assemble(particles, x, jobs, self_pairs=False)

    def particle_velocity(self, particles, jobs=1):
        return self._assemble(particles, particles.positions, jobs, self_pairs=True)

    def _assemble(self, particles, x, jobs, self_pairs):
        x = as_points(x)
        shape = x.shape
        flat = np.atleast_1d(x.ravel())
        at_origin = flat == 0
        if self.gamma != 0 and self.blob_delta == 0 and np.any(at_origin):
            raise DomainError("point vortex evaluated at the origin", {"gamma": self.gamma})

        if particles.count:
            sources = particles.positions
            weights = particles.weights

            def block_sums(block):
                if self_pairs:
                    return _self_block(flat, sources, weights, self.blob_delta, block)
                return vortex_sums(flat[block], sources, weights, self.blob_delta)

            induced = np.concatenate(_map_blocks(block_sums, flat.size, sources.size, jobs)) / TWO_PI
        else:
            induced = np.zeros(flat.size, dtype=complex)

        if self.gamma != 0:
            # x^perp vanishes at the origin, so the regularised value there is zero
            safe = np.where(at_origin, 1.0, flat)
            point = np.where(at_origin, 0.0, 1j * safe / np.abs(safe) ** 2 / TWO_PI)
            induced = induced + self.gamma * point
        return _unwrap(induced.reshape(shape))


def default_blob_delta(model_map: ConformalMap, particles: VortexParticleSet):
    """Twice the median nearest-neighbour distance of the mapped particles"""
    if particles.count < 2:
        return 0.0
    mapped = model_map.jet(particles.positions).value
    return 2.0 * median_spacing(mapped)


def physical_to_mapped_delta(epsilon, physical_delta):
    """Mapped-plane blob size matching a physical one in the far field (T_eps ~ 2x/eps)"""
    return 2.0 * physical_delta / epsilon


def velocity_exterior(model: ExteriorModel, particles: VortexParticleSet, x, jobs=1):
    """u = K[omega] + (gamma + m) H at probes x"""
    return model.velocity(particles, x, jobs)


def velocity_limit(model: LimitModel, particles: VortexParticleSet, x, jobs=1):
    """sum_i (x - y_i)^perp omega_i h^2 / (2pi(|x - y_i|^2 + delta^2)) + gamma x^perp / (2pi|x|^2)"""
    return model.velocity(particles, x, jobs)


def decomposed_integrals(model: ExteriorModel, particles: VortexParticleSet, x, jobs=1):
    """I1, I2 and I2tilde = -I2 + m T^perp / |T|^2 at probes x"""
    I1, I2, jet = model.integrals(particles, x, jobs)
    w = np.asarray(jet.value).reshape(np.shape(I1))
    I2tilde = -I2 + particles.mass * 1j * w / np.abs(w) ** 2
    return DecomposedIntegrals(_unwrap(I1), _unwrap(I2), _unwrap(I2tilde))


def assemble_from_integrals(model: ExteriorModel, particles, x, integrals: DecomposedIntegrals):
    """Velocity rebuilt as (1/2pi) DT^t (I1 + I2tilde) + gamma H"""
    jet = model.map.jet(x)
    d1 = np.asarray(jet.d1)
    v = np.conj(d1) * (np.asarray(integrals.I1) + np.asarray(integrals.I2tilde)) / TWO_PI
    return _unwrap(v + model.gamma * np.asarray(harmonic_H(model.map, x)))


def reduced_velocity(model: ExteriorModel, particles, x, jobs=1):
    """v = u - gamma H"""
    u = np.asarray(model.velocity(particles, x, jobs))
    return _unwrap(u - model.gamma * np.asarray(harmonic_H(model.map, x)))


def jump_function_g(model: ExteriorModel, particles: VortexParticleSet, s,
                    probe_offsets=(1e-5, 5e-6)):
    """
    Jump g(s) = u1(eps s - i0) - u1(eps s + i0) of the tangential velocity
    across the slit, from one-sided probes Richardson-extrapolated to zero offset.
    """
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 1.0) or not np.all(np.isfinite(s)):
        raise DomainError("jump is defined at interior slit stations |s| < 1",
                          {"max_abs_s": float(np.max(np.abs(s))) if s.size else 0.0})
    eps = model.epsilon
    coarse, fine = probe_offsets

    def one_sided(offset):
        above = np.asarray(model.velocity(particles, eps * s + 1j * eps * offset))
        below = np.asarray(model.velocity(particles, eps * s - 1j * eps * offset))
        return below.real - above.real

    ratio = coarse / fine
    g = (ratio * one_sided(fine) - one_sided(coarse)) / (ratio - 1.0)
    return _unwrap(g)


def slit_model(epsilon, gamma=0.0, blob_delta=0.0):
    """ExteriorModel for the slit [-eps, eps]"""
    return ExteriorModel(ScaledSlitMap(epsilon), float(gamma), float(blob_delta))
