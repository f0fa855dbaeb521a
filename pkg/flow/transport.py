"""
Lagrangian vorticity transport: particles follow the assembled velocity with
classical RK4 and keep their vorticity values and cell areas.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from base.exceptions import DomainError, StepRejectedError
from flow.biotsavart import ExteriorModel, VelocityModel
from flow.particles import VortexParticleSet
from utils.complexplane import discrete_lp_norm
from utils.logger import get_logger

LP_EXPONENTS = (1.0, 2.0, 4.0, math.inf)


@dataclass(frozen=True)
class TransportState:
    """Time, particle set and the velocity model driving it"""

    time: float
    particles: VortexParticleSet
    model: VelocityModel


@dataclass(frozen=True)
class ConservationReport:
    """Conservation diagnostics of one state"""

    time: float
    mass: float
    l1: float
    l2: float
    l4: float
    linf: float
    support_radius: float
    max_step: float = 0.0
    max_speed: float = 0.0

    def as_row(self):
        return [self.time, self.mass, self.l1, self.l2, self.l4, self.linf,
                self.support_radius, self.max_step]


@dataclass
class RunResult:
    """Trajectory, per-step reports and the completion flag of a run"""

    trajectory: List[TransportState] = field(default_factory=list)
    reports: List[ConservationReport] = field(default_factory=list)
    completed: bool = True
    error: Optional[StepRejectedError] = None
    dt: float = 0.0

    @property
    def final_state(self):
        return self.trajectory[-1]

    @property
    def max_speed(self):
        return max((report.max_speed for report in self.reports), default=0.0)


def conservation_report(state: TransportState, max_step=0.0, max_speed=0.0) -> ConservationReport:
    """Mass, L^p norms (p = 1, 2, 4, inf) and support radius of a state"""
    particles = state.particles
    weights = np.full(particles.count, particles.area)
    norms = [discrete_lp_norm(particles.values, weights, p) for p in LP_EXPONENTS]
    support = float(np.max(np.abs(particles.positions))) if particles.count else 0.0
    return ConservationReport(state.time, particles.mass, *norms, support,
                              float(max_step), float(max_speed))


def _crossed_slit(model, start, end):
    """Indices whose straight move from start to end passes through the slit"""
    if not isinstance(model, ExteriorModel):
        return np.zeros(start.size, dtype=bool)
    eps = model.map.epsilon
    flips = (start.imag * end.imag) < 0
    if not np.any(flips):
        return flips
    t = np.where(flips, start.imag / np.where(flips, start.imag - end.imag, 1.0), 0.0)
    crossing = start.real + t * (end.real - start.real)
    return flips & (np.abs(crossing) <= eps)


def _check_stage(state, dt, stage, start, positions):
    bad = ~np.asarray(state.model.admissible(positions), dtype=bool)
    bad |= _crossed_slit(state.model, start, positions)
    if np.any(bad):
        raise StepRejectedError(state.time, dt, stage, np.flatnonzero(bad).tolist())


def rk4_step(state: TransportState, dt, reverse=False, jobs=1) -> TransportState:
    """One classical Runge-Kutta step; reverse integrates the negated velocity"""
    return _advance(state, dt, reverse, jobs)[0]


def _advance(state: TransportState, dt, reverse=False, jobs=1):
    """RK4 step plus the largest particle speed |k1| at the starting state"""
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError("time step must be positive", {"dt": dt})
    particles = state.particles
    if particles.count == 0:
        return TransportState(state.time + dt, particles, state.model), 0.0

    sign = -1.0 if reverse else 1.0
    model = state.model
    x0 = particles.positions

    def velocity(positions):
        moved = particles.with_positions(positions)
        return sign * np.asarray(model.particle_velocity(moved, jobs=jobs), dtype=complex)

    k1 = velocity(x0)
    x1 = x0 + 0.5 * dt * k1
    _check_stage(state, dt, 2, x0, x1)
    k2 = velocity(x1)
    x2 = x0 + 0.5 * dt * k2
    _check_stage(state, dt, 3, x0, x2)
    k3 = velocity(x2)
    x3 = x0 + dt * k3
    _check_stage(state, dt, 4, x0, x3)
    k4 = velocity(x3)
    x_new = x0 + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    _check_stage(state, dt, 5, x0, x_new)

    speed = float(np.max(np.abs(k1)))
    return TransportState(state.time + dt, particles.with_positions(x_new), model), speed


def step_count(dt, t_final):
    """Number of equal steps covering t_final with steps no longer than dt"""
    if not (t_final > 0 and dt > 0):
        raise DomainError("run needs t_final > 0 and dt > 0", {"dt": dt, "t_final": t_final})
    return max(1, int(math.ceil(t_final / dt - 1e-9)))


def run(state0: TransportState, dt, t_final, reverse=False, jobs=1, keep_every=1,
        on_step: Callable = None) -> RunResult:
    """
    Advance state0 to t_final with fixed steps and collect reports every step.

    The step is adjusted to t_final / n so the run ends exactly at t_final.
    A rejected step ends the run early with completed=False.
    """
    logger = get_logger()
    steps = step_count(dt, t_final)
    dt_eff = t_final / steps
    if abs(dt_eff - dt) > 1e-12 * dt:
        logger.debug(f"Time step adjusted from {dt} to {dt_eff} for {steps} steps")

    result = RunResult(dt=dt_eff)
    state = state0
    result.trajectory.append(state)
    result.reports.append(conservation_report(state))

    for index in range(1, steps + 1):
        try:
            new_state, speed = _advance(state, dt_eff, reverse=reverse, jobs=jobs)
        except StepRejectedError as error:
            logger.warning(f"Run aborted at step {index}: {error}")
            result.completed = False
            result.error = error
            if result.trajectory[-1] is not state:
                result.trajectory.append(state)
            return result

        # keep the time grid exact instead of accumulating dt
        new_state = TransportState(state0.time + index * dt_eff, new_state.particles, new_state.model)
        displacement = np.abs(new_state.particles.positions - state.particles.positions)
        max_step = float(np.max(displacement)) if displacement.size else 0.0
        report = conservation_report(new_state, max_step, speed)
        result.reports.append(report)
        if index % max(1, keep_every) == 0 or index == steps:
            result.trajectory.append(new_state)
        if on_step is not None:
            on_step(index, new_state, report)
        state = new_state

    return result


def position_error(a: VortexParticleSet, b: VortexParticleSet):
    """Discrete L2 distance between matched particle positions"""
    if a.count != b.count:
        raise DomainError("particle sets differ in size", {"a": a.count, "b": b.count})
    if a.count == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.abs(a.positions - b.positions) ** 2)))
