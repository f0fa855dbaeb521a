"""
Exterior conformal maps of the slit [-1, 1] and its scaled and thickened families.

T(z) = z + sqrt(z^2 - 1) with the root of modulus > 1, the inverse of the
Joukowski function G(w) = (w + 1/w) / 2.
"""

import numpy as np

from base.base_map import ConformalMap, MapJet
from base.exceptions import DomainError
from utils.complexplane import as_points

# Points closer than this (relative to epsilon) count as lying on the slit
ADMISSIBILITY_MARGIN = 1e-14


def _unwrap(array):
    if np.ndim(array) == 0:
        return array.item()
    return array


def joukowski(w):
    """G(w) = (w + 1/w) / 2"""
    w = as_points(w)
    if np.any(w == 0):
        raise DomainError("Joukowski function is singular at 0", {"w": 0})
    return _unwrap(0.5 * (w + 1.0 / w))


def joukowski_derivative(w):
    w = as_points(w)
    if np.any(w == 0):
        raise DomainError("Joukowski function is singular at 0", {"w": 0})
    return _unwrap(0.5 * (1.0 - 1.0 / (w * w)))


def dist_to_slit(epsilon, x):
    """Euclidean distance from x to the segment [-epsilon, epsilon]"""
    x = as_points(x)
    overshoot = np.maximum(np.abs(x.real) - epsilon, 0.0)
    return _unwrap(np.hypot(overshoot, x.imag))


def _unit_slit_jet(z):
    distance = np.asarray(dist_to_slit(1.0, z))
    if np.any(distance < ADMISSIBILITY_MARGIN):
        raise DomainError("point on the slit", {"dist_to_slit": float(np.min(distance))})

    # sqrt(z-1) sqrt(z+1) keeps the branch cut exactly on [-1, 1]
    root = np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
    root = np.where(np.abs(z + root) >= np.abs(z - root), root, -root)
    value = z + root
    d1 = 1.0 + z / root
    d2 = -1.0 / root ** 3
    return value, d1, d2


def slit_map_jet(z) -> MapJet:
    """Jet of the exterior slit map T at points off [-1, 1]"""
    z = as_points(z)
    value, d1, d2 = _unit_slit_jet(z)
    return MapJet(_unwrap(value), _unwrap(d1), _unwrap(d2))


class SlitMap(ConformalMap):
    """T: exterior of [-1, 1] onto the exterior of the unit disk, T'(inf) = 2"""

    epsilon = 1.0
    scale = 1.0

    def __repr__(self):
        return "SlitMap()"

    def jet(self, x):
        return slit_map_jet(x)

    def admissible(self, x):
        return np.asarray(dist_to_slit(self.epsilon, x)) >= ADMISSIBILITY_MARGIN * self.epsilon

    def inverse(self, w):
        return joukowski(w)

    def inverse_derivative(self, w):
        return joukowski_derivative(w)


class ScaledSlitMap(SlitMap):
    """T_eps(x) = T(x / eps) for the slit [-eps, eps]"""

    def __init__(self, epsilon):
        epsilon = float(epsilon)
        if not epsilon > 0 or not np.isfinite(epsilon):
            raise DomainError("epsilon must be positive", {"epsilon": epsilon})
        self.epsilon = epsilon

    def __repr__(self):
        return f"ScaledSlitMap(epsilon={self.epsilon!r})"

    def __eq__(self, other):
        return type(other) is type(self) and other.epsilon == self.epsilon

    def __hash__(self):
        return hash((type(self).__name__, self.epsilon))

    def jet(self, x):
        x = as_points(x)
        value, d1, d2 = _unit_slit_jet(x / self.epsilon)
        return MapJet(_unwrap(value), _unwrap(d1 / self.epsilon),
                      _unwrap(d2 / self.epsilon ** 2))

    def inverse(self, w):
        return _unwrap(self.epsilon * np.asarray(joukowski(w)))

    def inverse_derivative(self, w):
        return _unwrap(self.epsilon * np.asarray(joukowski_derivative(w)))


class ThickenedMap(ScaledSlitMap):
    """T_{eps,eta} = T_eps / (1 + eta), the exterior map of a confocal ellipse"""

    def __init__(self, epsilon, eta):
        super().__init__(epsilon)
        eta = float(eta)
        if not eta >= 0 or not np.isfinite(eta):
            raise DomainError("eta must be non-negative", {"eta": eta})
        self.eta = eta
        self.scale = 1.0 + eta

    def __repr__(self):
        return f"ThickenedMap(epsilon={self.epsilon!r}, eta={self.eta!r})"

    def __eq__(self, other):
        return (type(other) is type(self) and other.epsilon == self.epsilon
                and other.eta == self.eta)

    def __hash__(self):
        return hash((type(self).__name__, self.epsilon, self.eta))

    @property
    def semi_axes(self):
        """Semi-axes (along, across the slit) of the obstacle ellipse"""
        half = 0.5 * self.epsilon
        return half * (self.scale + 1.0 / self.scale), half * (self.scale - 1.0 / self.scale)

    def _outside(self, x):
        x = np.asarray(x, dtype=complex)
        a, b = self.semi_axes
        if b == 0:
            return np.asarray(dist_to_slit(self.epsilon, x)) >= ADMISSIBILITY_MARGIN * self.epsilon
        return (x.real / a) ** 2 + (x.imag / b) ** 2 > 1.0 + ADMISSIBILITY_MARGIN

    def admissible(self, x):
        return self._outside(as_points(x))

    def jet(self, x):
        x = as_points(x)
        inside = ~self._outside(x)
        if np.any(inside):
            raise DomainError("point inside or on the obstacle ellipse",
                              {"eta": self.eta, "count": int(np.count_nonzero(inside))})
        return super().jet(x).scaled(1.0 / self.scale)

    def inverse(self, w):
        w = as_points(w)
        return _unwrap(self.epsilon * np.asarray(joukowski(self.scale * w)))

    def inverse_derivative(self, w):
        w = as_points(w)
        return _unwrap(self.epsilon * self.scale * np.asarray(joukowski_derivative(self.scale * w)))


def scaled_jet(slit_map: ScaledSlitMap, x) -> MapJet:
    """Jet of T_eps at x"""
    return ScaledSlitMap.jet(slit_map, x)


def thickened_jet(thickened_map: ThickenedMap, x) -> MapJet:
    """Jet of T_{eps,eta} at x"""
    return thickened_map.jet(x)
