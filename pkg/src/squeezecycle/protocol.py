"""Cyclic control ramp g(t) driving the coupling to g_f and back.

Units: energies in omega, times in 1/omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

G_CRITICAL = 1.0


@dataclass(frozen=True)
class RampSpec:
    """Parameters of the cycle g(0) = 0 -> g(tau) = g_f -> g(2 tau) = 0.

    Attributes:
        g_f: coupling reached at the turning point, 0 <= g_f <= 1.
        r: nonlinear exponent shaping the approach to g_f.
        tau: half-cycle duration.
        omega: mode frequency.
    """

    g_f: float = 1.0
    r: float = 1.0
    tau: float = 10.0
    omega: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.g_f <= G_CRITICAL:
            raise DomainError(f"g_f must lie in [0, {G_CRITICAL}], got {self.g_f}")
        for name in ("r", "tau", "omega"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")

    @property
    def duration(self) -> float:
        return 2.0 * self.tau


def _check_time(spec: RampSpec, t: float) -> None:
    if not 0.0 <= t <= 2.0 * spec.tau:
        raise DomainError(f"t={t} outside the cycle [0, {2.0 * spec.tau}]")


def coupling_at(spec: RampSpec, t: float) -> float:
    """Coupling g(t) of the cycle; symmetric about t = tau."""
    _check_time(spec, t)
    return spec.g_f * (1.0 - (abs(spec.tau - t) / spec.tau) ** spec.r)


def coupling_rate(spec: RampSpec, t: float) -> float:
    """Signed derivative dg/dt. Diverges at t = tau when r < 1."""
    _check_time(spec, t)
    u = t - spec.tau
    if u == 0.0:
        if spec.r > 1:
            return 0.0
        if spec.r == 1:
            # one-sided values are +-g_f/tau; the cusp itself has no derivative
            return 0.0
        return math.inf
    mag = spec.g_f * spec.r * abs(u) ** (spec.r - 1.0) / spec.tau**spec.r
    return mag if u < 0 else -mag


def gap_at(spec: RampSpec, t: float) -> float:
    """Instantaneous excitation gap omega * sqrt(1 - g(t)^2)."""
    g = coupling_at(spec, t)
    return spec.omega * math.sqrt(max(0.0, 1.0 - g * g))
