"""
Timings of the vectorised Biot-Savart hot spots.
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from base.base_test import SimulationBaseTest
from flow.biotsavart import ExteriorModel, vortex_sums
from flow.particles import gaussian_patch
from maps.slit_map import ScaledSlitMap


@pytest.mark.perf
class TestKernelBenchmark(SimulationBaseTest):
    """pytest-benchmark timings; skipped with --benchmark-disable"""

    def test_01_vortex_sums(self, benchmark):
        """Direct mapped-plane sums, 4096 probes x 900 sources"""
        rng = np.random.default_rng(0)
        w = rng.normal(size=4096) + 1j * rng.normal(size=4096)
        sources = rng.normal(size=900) + 1j * rng.normal(size=900)
        weights = rng.normal(size=900)
        result = benchmark(vortex_sums, w, sources, weights, 0.1)
        assert result.shape == (4096,)

    def test_02_particle_velocity(self, benchmark):
        """Self-induced exterior velocity of a Gaussian patch"""
        patch = gaussian_patch(0.1)
        model = ExteriorModel.for_particles(ScaledSlitMap(0.1), 1.0, patch)
        u = benchmark(model.particle_velocity, patch)
        assert np.all(np.isfinite(u))
