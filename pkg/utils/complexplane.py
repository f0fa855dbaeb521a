"""
Complex-plane primitives shared by the map, flow and analysis packages.

Points and planar vectors are complex numbers x1 + i*x2. Every operation
accepts a scalar or a numpy array of points and works elementwise.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple

import numpy as np

from base.exceptions import DomainError, EvaluationError


def as_points(points, name="point"):
    """Convert input to a complex array, rejecting NaN/Inf"""
    array = np.asarray(points, dtype=complex)
    if not np.all(np.isfinite(array)):
        raise DomainError(f"non-finite {name} rejected", {"name": name})
    return array


def _unwrap(array):
    """Return a Python scalar for 0-d arrays, the array otherwise"""
    if np.ndim(array) == 0:
        return array.item()
    return array


def perp(v):
    """Rotate by a quarter turn: (v1, v2) -> (-v2, v1)"""
    return _unwrap(1j * as_points(v, "vector"))


def invert_star(v):
    """Inversion in the unit circle, v / |v|^2"""
    v = as_points(v, "vector")
    if np.any(v == 0):
        raise DomainError("inversion of the origin is undefined", {"abs_v": 0.0})
    return _unwrap(1.0 / np.conj(v))


def frac_identity_check(a, b):
    """Evaluate both sides of |a* - b*| = |a - b| / (|a| |b|)"""
    a = as_points(a, "a")
    b = as_points(b, "b")
    if np.any(a == 0) or np.any(b == 0):
        raise DomainError("identity requires nonzero points")
    lhs = np.abs(a / np.abs(a) ** 2 - b / np.abs(b) ** 2)
    rhs = np.abs(a - b) / (np.abs(a) * np.abs(b))
    return _unwrap(lhs), _unwrap(rhs)


def signed_area(vertices):
    """Shoelace signed area of a closed polygon"""
    z = np.asarray(vertices, dtype=complex)
    nxt = np.roll(z, -1)
    return 0.5 * math.fsum((z.real * nxt.imag - nxt.real * z.imag).tolist())


@dataclass(frozen=True)
class Contour:
    """Closed counter-clockwise polygon given by its vertices"""

    vertices: np.ndarray

    def __post_init__(self):
        vertices = as_points(self.vertices, "contour vertex").ravel()
        if vertices.size < 3:
            raise DomainError("contour needs at least 3 vertices", {"count": int(vertices.size)})
        area = signed_area(vertices)
        if not area > 0:
            raise DomainError("contour must be counter-clockwise", {"signed_area": area})
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)

    @classmethod
    def circle(cls, center=0j, radius=1.0, n=512):
        """Regular n-gon inscribed in a circle"""
        if radius <= 0:
            raise DomainError("circle radius must be positive", {"radius": radius})
        theta = 2.0 * np.pi * np.arange(n) / n
        return cls(complex(center) + radius * np.exp(1j * theta))

    def __len__(self):
        return int(self.vertices.size)


def polygon_circulation(field_sampler: Callable, vertices) -> float:
    """Line integral of a planar field along a closed polygon in vertex order"""
    a = as_points(vertices, "contour vertex").ravel()
    b = np.roll(a, -1)
    midpoints = 0.5 * (a + b)

    samples = np.asarray(field_sampler(np.concatenate([a, midpoints])), dtype=complex)
    if not np.all(np.isfinite(samples)):
        bad = int(np.count_nonzero(~np.isfinite(samples)))
        raise EvaluationError(f"field returned {bad} non-finite sample(s) on the contour")
    fa = samples[:a.size]
    fm = samples[a.size:]
    fb = np.roll(fa, -1)

    # Simpson on each edge; endpoint samples are paired first so that a
    # reversed traversal yields exactly the negated edge terms
    averaged = ((fa + fb) + 4.0 * fm) / 6.0
    dz = b - a
    edge_terms = averaged.real * dz.real + averaged.imag * dz.imag
    return math.fsum(edge_terms.tolist())


def contour_circulation(field_sampler: Callable, contour: Contour) -> float:
    """Counter-clockwise circulation of a field around a contour"""
    return polygon_circulation(field_sampler, contour.vertices)


def discrete_lp_norm(values, weights, p) -> float:
    """Weighted discrete L^p norm; p = inf gives the max norm"""
    p = float(p)
    if not p >= 1.0:
        raise DomainError("L^p norm needs p >= 1", {"p": p})
    values = np.abs(np.asarray(values, dtype=float).ravel())
    weights = np.asarray(weights, dtype=float).ravel()
    if values.shape != weights.shape:
        raise DomainError("values and weights differ in length",
                          {"values": values.size, "weights": weights.size})
    if np.any(weights < 0):
        raise DomainError("weights must be non-negative")
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(values))
    return float(np.sum(weights * values ** p) ** (1.0 / p))


@dataclass(frozen=True)
class Grid:
    """Uniform grid with row-major node enumeration (x fastest)"""

    origin: complex
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise DomainError("grid spacing must be positive", {"h": self.h})
        if self.nx < 1 or self.ny < 1:
            raise DomainError("grid needs positive node counts", {"nx": self.nx, "ny": self.ny})
        object.__setattr__(self, "origin", complex(as_points(self.origin, "grid origin")))

    @property
    def cell_area(self):
        return self.h * self.h

    @property
    def size(self):
        return self.nx * self.ny

    def _lattice(self, offset):
        i = np.arange(self.nx, dtype=float) + offset
        j = np.arange(self.ny, dtype=float) + offset
        jj, ii = np.meshgrid(j, i, indexing="ij")
        return (self.origin + ii * self.h + 1j * (jj * self.h)).ravel()

    def nodes(self):
        """Node positions origin + (i h, j h), row-major"""
        return self._lattice(0.0)

    def cell_midpoints(self):
        """Midpoints of the cells whose lower-left corners are the nodes"""
        return self._lattice(0.5)


@dataclass(frozen=True)
class RegionQuadrature:
    """Midpoint quadrature nodes and cell weights over a planar region"""

    nodes: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def area(self):
        return float(np.sum(self.weights))

    def __len__(self):
        return int(self.nodes.size)

    def restrict(self, mask):
        """Keep only the cells selected by a boolean mask"""
        mask = np.asarray(mask, dtype=bool)
        return RegionQuadrature(self.nodes[mask], self.weights[mask])

    def integrate(self, values):
        return float(np.sum(self.weights * np.asarray(values, dtype=float)))

    def lp_norm(self, values, p):
        return discrete_lp_norm(values, self.weights, p)


def _even_count(length, h):
    count = max(2, int(math.ceil(length / h - 1e-9)))
    return count + (count % 2)


def _subdivide(centers, dx, dy, factor):
    offsets = (np.arange(factor) + 0.5) / factor - 0.5
    oy, ox = np.meshgrid(offsets, offsets, indexing="ij")
    shifts = (ox.ravel()[None, :] * dx[:, None]) + 1j * (oy.ravel()[None, :] * dy[:, None])
    children = (centers[:, None] + shifts).ravel()
    repeat = factor * factor
    return children, np.repeat(dx / factor, repeat), np.repeat(dy / factor, repeat)


def region_quadrature(lower, upper, h, fine_box: Tuple[complex, complex] = None,
                      fine_factor: int = 1, refine_points: Sequence[complex] = (),
                      refine_radius: float = 0.0, refine_levels: int = 2) -> RegionQuadrature:
    """
    Build midpoint quadrature on the box [lower, upper].

    Cells are squares of side about h (counts rounded up to even numbers so
    no midpoint lies on the box's symmetry axes). Coarse cells centred in
    fine_box are split into fine_factor^2 cells; afterwards, refine_levels
    passes split every cell reaching within refine_radius of a refine point
    into 2x2 children.
    """
    lower = complex(lower)
    upper = complex(upper)
    width = upper.real - lower.real
    height = upper.imag - lower.imag
    if width <= 0 or height <= 0 or h <= 0:
        raise DomainError("quadrature box must have positive extent",
                          {"width": width, "height": height, "h": h})

    nx = _even_count(width, h)
    ny = _even_count(height, h)
    hx = width / nx
    hy = height / ny
    grid_x = lower.real + (np.arange(nx) + 0.5) * hx
    grid_y = lower.imag + (np.arange(ny) + 0.5) * hy
    gy, gx = np.meshgrid(grid_y, grid_x, indexing="ij")
    centers = (gx + 1j * gy).ravel()
    dx = np.full(centers.size, hx)
    dy = np.full(centers.size, hy)

    if fine_box is not None and fine_factor > 1:
        fine_lo, fine_hi = complex(fine_box[0]), complex(fine_box[1])
        inside = ((centers.real > fine_lo.real) & (centers.real < fine_hi.real)
                  & (centers.imag > fine_lo.imag) & (centers.imag < fine_hi.imag))
        children = _subdivide(centers[inside], dx[inside], dy[inside], int(fine_factor))
        centers = np.concatenate([centers[~inside], children[0]])
        dx = np.concatenate([dx[~inside], children[1]])
        dy = np.concatenate([dy[~inside], children[2]])

    points = np.asarray(list(refine_points), dtype=complex)
    if points.size and refine_radius > 0:
        for _ in range(int(refine_levels)):
            reach = refine_radius + 0.5 * np.hypot(dx, dy)
            near = np.zeros(centers.size, dtype=bool)
            for point in points:
                near |= np.abs(centers - point) < reach
            if not np.any(near):
                break
            children = _subdivide(centers[near], dx[near], dy[near], 2)
            centers = np.concatenate([centers[~near], children[0]])
            dx = np.concatenate([dx[~near], children[1]])
            dy = np.concatenate([dy[~near], children[2]])

    return RegionQuadrature(centers, dx * dy)


def disk_quadrature(radius, h, **kwargs) -> RegionQuadrature:
    """Midpoint quadrature restricted to the cells centred in the disk B(0, radius)"""
    quad = region_quadrature(complex(-radius, -radius), complex(radius, radius), h, **kwargs)
    return quad.restrict(np.abs(quad.nodes) < radius)
