"""
RK4 particle transport and the conservation diagnostics.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from base.base_test import SimulationBaseTest
from base.exceptions import DomainError, StepRejectedError
from flow.biotsavart import ExteriorModel, LimitModel, physical_to_mapped_delta, slit_model
from flow.particles import VortexParticleSet, gaussian_patch, tracers
from flow.transport import (TransportState, conservation_report, position_error, rk4_step, run,
                            step_count)
from maps.slit_map import ScaledSlitMap


def tracer_state(model, point=1 + 0j):
    return TransportState(0.0, tracers((point,)), model)


def orbit_error(dt, t_final):
    """Distance of a unit-radius tracer from the exact circular orbit of a unit point vortex"""
    result = run(tracer_state(LimitModel(1.0)), dt, t_final)
    exact = np.exp(1j * t_final / (2 * math.pi))
    return abs(result.final_state.particles.positions[0] - exact)


@pytest.mark.transport
@pytest.mark.fast
class TestConservationReport(SimulationBaseTest):
    """Mass, norms and support radius"""

    def test_01_uniform_patch(self):
        """100 unit-valued cells of area 0.01"""
        positions = (np.arange(10)[:, None] + 1j * np.arange(10)[None, :]).ravel() * 0.1 + 5
        state = TransportState(0.0, VortexParticleSet(positions, np.ones(100), 0.01), LimitModel())
        report = conservation_report(state)
        assert report.mass == pytest.approx(1.0, rel=1e-14)
        assert report.l1 == pytest.approx(1.0, rel=1e-14)
        assert report.l2 == pytest.approx(1.0, rel=1e-14)
        assert report.l4 == pytest.approx(1.0, rel=1e-14)
        assert report.linf == 1.0
        assert report.support_radius == pytest.approx(abs(5.9 + 0.9j))

    def test_02_empty_state(self):
        """No particles report zeros"""
        report = conservation_report(TransportState(0.0, VortexParticleSet.empty(), LimitModel()))
        assert report.as_row()[1:] == [0.0] * 7

    def test_03_sign_and_norms(self):
        """A dipole has zero mass but positive norms"""
        values = np.array([2.0, -2.0])
        state = TransportState(1.5, VortexParticleSet(np.array([1j, -1j]), values, 0.5), LimitModel())
        report = conservation_report(state, max_step=0.1)
        assert report.mass == 0.0
        assert report.l1 == pytest.approx(2.0)
        assert report.l2 == pytest.approx(2.0)
        assert report.linf == 2.0
        assert report.as_row()[0] == 1.5
        assert report.as_row()[-1] == 0.1

    def test_04_step_count(self):
        """Steps cover t_final with steps no longer than dt"""
        assert step_count(0.1, 1.0) == 10
        assert step_count(0.3, 1.0) == 4
        with pytest.raises(DomainError):
            step_count(0.1, 0.0)

    def test_05_doubled_values_double_norms(self):
        """Scaling every value by 2 doubles the mass and each L^p norm"""
        patch = gaussian_patch(0.1, center=1 + 2j)
        base = conservation_report(TransportState(0.0, patch, LimitModel()))
        doubled = conservation_report(TransportState(0.0, patch.scaled(2.0), LimitModel()))
        assert doubled.mass == pytest.approx(2.0 * base.mass, rel=1e-14)
        for name in ("l1", "l2", "l4", "linf"):
            assert getattr(doubled, name) == pytest.approx(2.0 * getattr(base, name), rel=1e-12)
        assert doubled.support_radius == base.support_radius

    def test_06_reflection_keeps_norms(self):
        """Mirroring the configuration across the imaginary axis changes no diagnostic"""
        patch = gaussian_patch(0.1, center=1 + 2j)
        mirrored = patch.reflected_imaginary_axis()
        base = conservation_report(TransportState(0.0, patch, LimitModel()))
        report = conservation_report(TransportState(0.0, mirrored, LimitModel()))
        np.testing.assert_array_equal(mirrored.positions, -np.conj(patch.positions))
        assert report.mass == base.mass
        for name in ("l1", "l2", "l4", "linf"):
            assert getattr(report, name) == getattr(base, name)
        assert report.support_radius == base.support_radius


@pytest.mark.transport
@pytest.mark.fast
class TestRungeKutta(SimulationBaseTest):
    """Single steps and whole runs"""

    def test_01_empty_run(self):
        """N = 0 runs to completion with empty reports"""
        result = run(TransportState(0.0, VortexParticleSet.empty(), slit_model(0.1, 1.0)), 0.1, 1.0)
        assert result.completed
        assert len(result.reports) == 11
        assert result.final_state.time == pytest.approx(1.0)
        assert result.final_state.particles.count == 0

    def test_02_zero_velocity(self):
        """A tracer in a quiescent flow does not move"""
        state = tracer_state(LimitModel(0.0), 0.3 + 0.4j)
        moved = rk4_step(state, 0.5)
        np.testing.assert_array_equal(moved.particles.positions, state.particles.positions)
        assert moved.time == 0.5

    def test_03_rejects_bad_dt(self):
        """dt must be positive"""
        with pytest.raises(DomainError):
            rk4_step(tracer_state(LimitModel(1.0)), 0.0)

    def test_04_tracer_period(self):
        """A tracer at radius 1 around a unit point vortex returns after 4 pi^2"""
        period = self.oracle("transport.tracer_period")
        result = run(tracer_state(LimitModel(1.0)), 0.05, period)
        assert result.completed
        assert abs(result.final_state.particles.positions[0] - 1.0) <= 1e-6
        assert result.max_speed == pytest.approx(self.oracle("transport.tracer_speed_at_unit_radius"), rel=1e-4)

    def test_05_exterior_tracer_period(self):
        """Around a tiny slit the tracer follows the point-vortex orbit"""
        period = self.oracle("transport.tracer_period")
        result = run(tracer_state(ExteriorModel(ScaledSlitMap(1e-4), 1.0, 0.0)), 0.05, period)
        assert result.completed
        assert abs(result.final_state.particles.positions[0] - 1.0) <= 1e-4

    def test_06_values_and_norms_conserved(self):
        """Transport moves positions only"""
        patch = gaussian_patch(0.2)
        model = ExteriorModel.for_particles(ScaledSlitMap(0.1), 0.5, patch)
        result = run(TransportState(0.0, patch, model), 0.01, 0.05)
        first, last = result.reports[0], result.reports[-1]
        np.testing.assert_array_equal(result.final_state.particles.values, patch.values)
        assert last.mass == first.mass
        assert last.l1 == first.l1
        assert last.linf == first.linf
        assert position_error(result.final_state.particles, patch) > 0

    def test_07_centroid_invariance(self):
        """Full-plane transport without a point vortex keeps the vorticity centroid"""
        patch = gaussian_patch(0.2, center=0.3 + 0.1j)
        result = run(TransportState(0.0, patch, LimitModel(0.0, 0.2)), 0.05, 0.5)
        assert abs(result.final_state.particles.centroid() - patch.centroid()) <= 1e-10

    def test_08_fourth_order(self):
        """Halving dt cuts the orbit error by about 16"""
        ratio = orbit_error(2.0, 20.0) / orbit_error(1.0, 20.0)
        assert 12.0 <= ratio <= 20.0

    def test_09_reversibility(self):
        """Integrating the negated field returns the particles to their start"""
        patch = gaussian_patch(0.2)
        model = LimitModel(0.5, 0.2)
        forward = run(TransportState(0.0, patch, model), 0.02, 0.2)
        backward = run(forward.final_state, 0.02, 0.2, reverse=True)
        assert position_error(backward.final_state.particles, patch) <= 1e-6

    def test_10_keep_every_and_callback(self):
        """Snapshots thin out the trajectory; the callback sees every step"""
        seen = []
        result = run(tracer_state(LimitModel(1.0)), 0.1, 1.0, keep_every=4,
                     on_step=lambda index, state, report: seen.append(index))
        assert seen == list(range(1, 11))
        assert [round(state.time, 12) for state in result.trajectory] == [0.0, 0.4, 0.8, 1.0]

    def test_11_step_through_slit_rejected(self):
        """An oversized step that would carry a tracer through the slit is rejected"""
        state = tracer_state(slit_model(1.0, 1.0), 0.3 + 0.01j)
        with pytest.raises(StepRejectedError) as info:
            rk4_step(state, 20.0)
        assert info.value.indices == [0]
        assert info.value.stage in (3, 4, 5)

    def test_12_rejected_run_stops(self):
        """A rejected step ends the run and keeps the last good state"""
        state = tracer_state(slit_model(1.0, 1.0), 0.3 + 0.01j)
        result = run(state, 20.0, 40.0)
        assert not result.completed
        assert isinstance(result.error, StepRejectedError)
        assert result.final_state is state

    def test_13_position_error(self):
        """RMS distance between matched sets"""
        a = tracers((0j, 1 + 0j))
        b = a.with_positions(np.array([0j, 1 + 2j]))
        assert position_error(a, b) == pytest.approx(math.sqrt(2.0))
        with pytest.raises(DomainError):
            position_error(a, tracers((0j,)))

    def test_14_max_speed_is_particle_speed(self):
        """Each report carries sup |u| over the particles at the start of its step"""
        patch = gaussian_patch(0.25)
        model = slit_model(0.1, 1.0, physical_to_mapped_delta(0.1, 0.5))
        result = run(TransportState(0.0, patch, model), 0.01, 0.03)
        assert result.reports[0].max_speed == 0.0
        for before, report in zip(result.trajectory[:-1], result.reports[1:]):
            speeds = np.abs(np.asarray(model.particle_velocity(before.particles)))
            assert report.max_speed == pytest.approx(float(np.max(speeds)), rel=1e-14)
        first = result.reports[0]
        for report in result.reports:
            assert report.support_radius <= first.support_radius + result.max_speed * report.time + 1e-9
