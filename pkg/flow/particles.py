"""
Vortex particle sets and the built-in initial vorticity presets.

Particles sit at grid-cell midpoints and carry the sampled vorticity value;
every particle owns the same cell area h^2.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from base.exceptions import DomainError
from flow.cutoff import quintic_smoothstep
from utils.complexplane import Grid, as_points

# Samples below this fraction of the peak are dropped
DROP_FRACTION = 1e-12

PRESET_NAMES = ("gaussian", "dipole", "zero", "disk", "tracer")


@dataclass(frozen=True)
class VortexParticleSet:
    """Positions, carried vorticity values and the common cell area"""

    positions: np.ndarray
    values: np.ndarray
    area: float

    def __post_init__(self):
        positions = as_points(self.positions, "particle position").ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if positions.shape != values.shape:
            raise DomainError("positions and values differ in length",
                              {"positions": positions.size, "values": values.size})
        if not np.all(np.isfinite(values)):
            raise DomainError("non-finite vorticity value")
        if not (self.area > 0 and math.isfinite(self.area)):
            raise DomainError("cell area must be positive", {"area": self.area})
        positions.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "area", float(self.area))

    @classmethod
    def empty(cls, area=1.0):
        return cls(np.zeros(0, dtype=complex), np.zeros(0), area)

    @property
    def count(self):
        return int(self.positions.size)

    def __len__(self):
        return self.count

    @property
    def weights(self):
        """Circulation carried by each particle, omega_i h^2"""
        return self.values * self.area

    @property
    def mass(self):
        """Total vorticity m = sum omega_i h^2"""
        return math.fsum(self.values.tolist()) * self.area

    def centroid(self):
        """Vorticity-weighted center sum(omega_i x_i) / sum(omega_i)"""
        total = math.fsum(self.values.tolist())
        if total == 0:
            raise DomainError("centroid undefined for zero total vorticity")
        re = math.fsum((self.values * self.positions.real).tolist())
        im = math.fsum((self.values * self.positions.imag).tolist())
        return complex(re, im) / total

    def with_positions(self, positions):
        """Same values and area at new positions"""
        positions = as_points(positions, "particle position").ravel()
        if positions.size != self.count:
            raise DomainError("particle count must not change",
                              {"expected": self.count, "got": positions.size})
        clone = object.__new__(VortexParticleSet)
        positions = positions.copy()
        positions.setflags(write=False)
        object.__setattr__(clone, "positions", positions)
        object.__setattr__(clone, "values", self.values)
        object.__setattr__(clone, "area", self.area)
        return clone

    def scaled(self, factor):
        """Same positions with every value multiplied by factor"""
        return VortexParticleSet(self.positions, self.values * factor, self.area)

    def reflected_imaginary_axis(self):
        """Mirror every position across the imaginary axis"""
        return self.with_positions(-np.conj(self.positions))

    def concatenate(self, other):
        if other.area != self.area:
            raise DomainError("particle sets with different cell areas",
                              {"area": self.area, "other": other.area})
        return VortexParticleSet(np.concatenate([self.positions, other.positions]),
                                 np.concatenate([self.values, other.values]), self.area)


def sample_vorticity(omega: Callable, center, half_width, h) -> VortexParticleSet:
    """Sample omega at cell midpoints of the square center +- half_width"""
    if h <= 0:
        raise DomainError("particle spacing must be positive", {"h": h})
    n = max(1, int(math.ceil(2.0 * half_width / h - 1e-9)))
    origin = complex(center) - 0.5 * n * h * (1 + 1j)
    points = Grid(origin, h, n, n).cell_midpoints()
    values = np.asarray(omega(points), dtype=float)
    peak = np.max(np.abs(values)) if values.size else 0.0
    if peak == 0:
        return VortexParticleSet.empty(h * h)
    keep = np.abs(values) >= DROP_FRACTION * peak
    return VortexParticleSet(points[keep], values[keep], h * h)


def gaussian_patch(h=0.05, center=2j, sigma=0.5, amplitude=1.0):
    """omega = amplitude exp(-|x - center|^2 / sigma^2), truncated to center +- 3 sigma"""
    center = complex(center)

    def omega(x):
        return amplitude * np.exp(-np.abs(x - center) ** 2 / sigma ** 2)

    return sample_vorticity(omega, center, 3.0 * sigma, h)


def dipole(h=0.05, center=2j, sigma=0.5):
    """Positive patch at center and its negated mirror image across the real axis"""
    upper = gaussian_patch(h, center, sigma)
    lower = VortexParticleSet(np.conj(upper.positions), -upper.values, upper.area)
    return upper.concatenate(lower)


def mollified_disk(h=0.05, center=2j, core=0.5, radius=1.0):
    """Flat core of value 1 for r < core, smooth decay to 0 at r = radius"""
    center = complex(center)

    def omega(x):
        t = (np.abs(x - center) - core) / (radius - core)
        return 1.0 - quintic_smoothstep(t)

    return sample_vorticity(omega, center, radius, h)


def tracers(points=(1 + 0j,), h=0.05):
    """Passive particles carrying zero vorticity"""
    points = as_points(list(points), "tracer")
    return VortexParticleSet(points, np.zeros(points.size), h * h)


def build_preset(name, h=0.05):
    """Build a named initial particle set"""
    match name:
        case "gaussian":
            return gaussian_patch(h)
        case "dipole":
            return dipole(h)
        case "zero":
            return VortexParticleSet.empty(h * h)
        case "disk":
            return mollified_disk(h)
        case "tracer":
            return tracers(h=h)
        case _:
            raise DomainError(f"unknown vorticity preset '{name}'",
                              {"known": ", ".join(PRESET_NAMES)})


def median_spacing(points):
    """Median nearest-neighbour distance of a point cloud"""
    points = np.asarray(points, dtype=complex).ravel()
    if points.size < 2:
        return 0.0
    tree = cKDTree(np.column_stack([points.real, points.imag]))
    distances, _ = tree.query(np.column_stack([points.real, points.imag]), k=2)
    return float(np.median(distances[:, 1]))
