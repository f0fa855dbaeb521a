"""
Complex-plane primitives: perp, inversion, the fraction identity,
contour circulation, discrete L^p norms, grids and region quadrature.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from base.base_test import SimulationBaseTest
from base.exceptions import DomainError, EvaluationError
from utils.complexplane import (Contour, Grid, contour_circulation, discrete_lp_norm, disk_quadrature,
                                frac_identity_check, invert_star, perp, polygon_circulation,
                                region_quadrature)


def point_vortex(x):
    return 1j * x / (2.0 * math.pi * np.abs(x) ** 2)


@pytest.mark.complexplane
@pytest.mark.fast
class TestComplexPlane(SimulationBaseTest):
    """Pointwise operations on CPoints"""

    def test_01_perp_examples(self):
        """perp rotates by a quarter turn"""
        assert perp(1 + 0j) == 1j
        assert perp(1j) == -1 + 0j
        assert perp(3 - 2j) == 2 + 3j

    def test_02_perp_twice_negates(self):
        """perp applied twice is minus the identity"""
        rng = np.random.default_rng(7)
        v = rng.normal(size=50) + 1j * rng.normal(size=50)
        np.testing.assert_array_equal(perp(perp(v)), -v)

    def test_03_invert_star_examples(self):
        """x* = x / |x|^2 on simple inputs"""
        assert invert_star(2 + 0j) == pytest.approx(0.5 + 0j)
        assert invert_star(1j) == pytest.approx(1j)
        assert invert_star(1 + 1j) == pytest.approx(0.5 + 0.5j)

    def test_04_invert_star_involution(self):
        """Inversion is an involution and inverts the modulus"""
        rng = np.random.default_rng(11)
        v = (rng.uniform(0.1, 10, 200)) * np.exp(2j * np.pi * rng.uniform(size=200))
        np.testing.assert_allclose(invert_star(invert_star(v)), v, rtol=1e-14)
        np.testing.assert_allclose(np.abs(invert_star(v)), 1.0 / np.abs(v), rtol=1e-14)

    def test_05_invert_star_rejects_origin(self):
        """Zero has no inverse"""
        with pytest.raises(DomainError):
            invert_star(0j)

    def test_06_non_finite_rejected(self):
        """NaN and Inf never enter a public operation"""
        with pytest.raises(DomainError):
            perp(complex(float("nan"), 0.0))
        with pytest.raises(DomainError):
            invert_star(complex(float("inf"), 1.0))

    def test_07_frac_identity_examples(self):
        """Both sides of the fraction identity on simple pairs"""
        lhs, rhs = frac_identity_check(1 + 0j, 1j)
        assert lhs == pytest.approx(math.sqrt(2)) and rhs == pytest.approx(math.sqrt(2))
        lhs, rhs = frac_identity_check(2 + 0j, 1 + 0j)
        assert lhs == pytest.approx(0.5) and rhs == pytest.approx(0.5)

    def test_08_frac_identity_random(self):
        """The identity holds to 1e-12 relative on random annulus pairs"""
        rng = np.random.default_rng(1234)
        n = 10000
        a = rng.uniform(0.1, 10, n) * np.exp(2j * np.pi * rng.uniform(size=n))
        b = rng.uniform(0.1, 10, n) * np.exp(2j * np.pi * rng.uniform(size=n))
        lhs, rhs = frac_identity_check(a, b)
        assert np.all(np.abs(lhs - rhs) <= 1e-12 * (1.0 + rhs))

    def test_09_frac_identity_rejects_zero(self):
        """Zero inputs are rejected"""
        with pytest.raises(DomainError):
            frac_identity_check(0j, 1 + 0j)


@pytest.mark.complexplane
@pytest.mark.fast
class TestContourCirculation(SimulationBaseTest):
    """Line integrals along closed polygons"""

    def test_01_point_vortex_unit_circle(self):
        """The point-vortex field has circulation 1 around the unit circle"""
        value = contour_circulation(point_vortex, Contour.circle(0j, 1.0, 256))
        assert abs(value - 1.0) <= 1e-6

    def test_02_constant_field(self):
        """A constant field circulates to zero"""
        contour = Contour.circle(0.3 + 0.2j, 2.0, 97)
        value = contour_circulation(lambda x: np.full(np.shape(x), 2.5 - 1.5j), contour)
        assert abs(value) <= 1e-12

    def test_03_gradient_field_square(self):
        """F(x) = x is conservative"""
        square = Contour(np.array([0, 1, 1 + 1j, 1j]))
        assert abs(contour_circulation(lambda x: x, square)) <= 1e-12

    def test_04_orientation_odd(self):
        """Reversing the vertex order negates the result exactly"""
        vertices = Contour.circle(0.5j, 1.7, 128).vertices
        forward = polygon_circulation(point_vortex, vertices)
        backward = polygon_circulation(point_vortex, vertices[::-1])
        assert backward == -forward

    def test_05_clockwise_contour_rejected(self):
        """Contours must be counter-clockwise"""
        with pytest.raises(DomainError):
            Contour(np.array([0, 1j, 1 + 1j, 1]))

    def test_06_too_few_vertices(self):
        """A contour needs three vertices"""
        with pytest.raises(DomainError):
            Contour(np.array([0, 1]))

    def test_07_non_finite_samples(self):
        """A field returning NaN raises EvaluationError"""
        contour = Contour.circle(0j, 1.0, 16)
        with pytest.raises(EvaluationError):
            contour_circulation(lambda x: np.full(np.shape(x), np.nan, dtype=complex), contour)


@pytest.mark.complexplane
@pytest.mark.fast
class TestNormsAndQuadrature(SimulationBaseTest):
    """Discrete norms, grids and region quadrature"""

    def test_01_lp_norm_examples(self):
        """Three closed-form discrete norms"""
        assert discrete_lp_norm([1, 1, 1, 1], [0.25] * 4, 1) == pytest.approx(1.0)
        assert discrete_lp_norm([2], [1], math.inf) == 2.0
        assert discrete_lp_norm([3, 4], [1, 1], 2) == pytest.approx(5.0)

    def test_02_lp_norm_rejects_small_p(self):
        """p < 1 is not a norm"""
        with pytest.raises(DomainError):
            discrete_lp_norm([1.0], [1.0], 0.5)

    def test_03_lp_norm_length_mismatch(self):
        """Values and weights must pair up"""
        with pytest.raises(DomainError):
            discrete_lp_norm([1.0, 2.0], [1.0], 2)

    def test_04_grid_enumeration(self):
        """Nodes are row-major with x fastest and the cell area is h^2"""
        grid = Grid(-1 - 1j, 0.5, 3, 2)
        nodes = grid.nodes()
        assert grid.cell_area == 0.25
        assert nodes.size == 6
        assert nodes[0] == -1 - 1j
        assert nodes[1] == -0.5 - 1j
        assert nodes[3] == -1 - 0.5j

    def test_05_grid_rejects_bad_spacing(self):
        """Grid spacing must be positive"""
        with pytest.raises(DomainError):
            Grid(0j, 0.0, 4, 4)

    def test_06_region_area(self):
        """Box and disk quadratures integrate 1 to their area"""
        box = region_quadrature(-1 - 2j, 3 + 1j, 0.1)
        assert box.area == pytest.approx(12.0, rel=1e-12)
        disk = disk_quadrature(2.0, 0.02)
        assert disk.area == pytest.approx(4.0 * math.pi, rel=5e-3)

    def test_07_refinement_keeps_area(self):
        """Fine boxes and endpoint refinement split cells without changing the area"""
        quad = region_quadrature(-1 - 1j, 1 + 1j, 0.1, fine_box=(-0.5 - 0.5j, 0.5 + 0.5j), fine_factor=4,
                                 refine_points=(-0.25, 0.25), refine_radius=0.05)
        assert quad.area == pytest.approx(4.0, rel=1e-12)
        assert len(quad) > 400
