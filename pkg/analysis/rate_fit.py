"""
Log-log rate fitting and the result record shared by every check.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from base.exceptions import DomainError


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (ln x, ln y)"""

    slope: float
    intercept: float
    max_residual: float
    points: Tuple[Tuple[float, float], ...]

    def as_row(self, quantity):
        return [quantity, self.slope, self.intercept, self.max_residual]


def fit_loglog(xs, ys) -> RateFit:
    """Fit ln y = slope ln x + intercept"""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.shape != ys.shape:
        raise DomainError("fit needs equally long data", {"xs": xs.size, "ys": ys.size})
    if xs.size < 3:
        raise DomainError("fit needs at least 3 points", {"count": int(xs.size)})
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise DomainError("fit data must be finite")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("log-log fit needs positive data",
                          {"min_x": float(np.min(xs)), "min_y": float(np.min(ys))})

    log_x = np.log(xs)
    log_y = np.log(ys)
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = float(np.max(np.abs(log_y - (slope * log_x + intercept))))
    points = tuple((float(a), float(b)) for a, b in zip(log_x, log_y))
    return RateFit(float(slope), float(intercept), residual, points)


def ratio_spread(values):
    """max / min of positive values"""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or np.any(values <= 0):
        raise DomainError("spread needs positive values")
    return float(np.max(values) / np.min(values))


def strictly_decreasing(values):
    values = list(values)
    return all(b < a for a, b in zip(values, values[1:]))


@dataclass
class CheckResult:
    """Outcome of one estimate check"""

    name: str
    passed: bool = True
    measured: Dict[str, Any] = field(default_factory=dict)
    tolerance: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    duration: float = 0.0

    @property
    def status(self):
        return "pass" if self.passed else "fail"

    def record(self, key, value, tolerance=None):
        """Store a measured value and, optionally, the bound it is held to"""
        self.measured[key] = value
        if tolerance is not None:
            self.tolerance[key] = tolerance

    def expect(self, condition, key, message):
        """Fail the check when condition is false, naming the measured value"""
        if not condition:
            self.passed = False
            self.failures.append(f"{key}: {message} (measured {self.measured.get(key)!r})")
        return bool(condition)

    def summary_row(self):
        measured = ";".join(f"{k}={_compact(v)}" for k, v in self.measured.items()
                            if not isinstance(v, (list, tuple, dict)))
        tolerance = ";".join(f"{k}={v}" for k, v in self.tolerance.items())
        return [self.name, self.status, measured, tolerance]

    def to_dict(self):
        return {
            "name": self.name,
            "status": self.status,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "artifacts": list(self.artifacts),
            "failures": list(self.failures),
            "duration": self.duration,
        }


def _compact(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
