"""
Base class for exterior conformal maps.

A map sends the exterior of an obstacle onto the exterior of the unit disk
with T(inf) = inf. Concrete maps live in the maps package.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from base.exceptions import DomainError
from utils.complexplane import Contour, as_points


@dataclass(frozen=True)
class MapJet:
    """Value, first and second complex derivative of a map at some points"""

    value: complex
    d1: complex
    d2: complex

    def scaled(self, factor):
        """Jet of factor * T"""
        return MapJet(self.value * factor, self.d1 * factor, self.d2 * factor)


class ConformalMap(ABC):
    """Interface shared by the slit map and its scaled and thickened families"""

    epsilon = 1.0

    @abstractmethod
    def jet(self, x) -> MapJet:
        """Return (T, T', T'') at admissible points, raising DomainError otherwise"""

    @abstractmethod
    def admissible(self, x):
        """Boolean mask of points strictly outside the obstacle"""

    @abstractmethod
    def inverse(self, w):
        """Inverse map from the exterior of the unit disk"""

    @abstractmethod
    def inverse_derivative(self, w):
        """Complex derivative of the inverse map"""

    def inverse_jacobian_det(self, w):
        """det D(T^-1)(w) = |(T^-1)'(w)|^2 for a holomorphic inverse"""
        return np.abs(self.inverse_derivative(w)) ** 2

    def level_curve(self, radius=1.0, n=512) -> Contour:
        """Counter-clockwise pull-back of the circle |T| = radius"""
        if radius <= 1.0:
            raise DomainError("level curves are taken outside the unit circle", {"radius": radius})
        theta = 2.0 * np.pi * np.arange(n) / n
        return Contour(self.inverse(radius * np.exp(1j * theta)))

    def require_admissible(self, x):
        """Raise DomainError when any point lies on or inside the obstacle"""
        x = as_points(x)
        mask = self.admissible(x)
        if not np.all(mask):
            bad = np.flatnonzero(~np.atleast_1d(mask))
            raise DomainError(f"{len(bad)} point(s) not admissible for {self!r}",
                              {"first_index": int(bad[0])})
        return x
