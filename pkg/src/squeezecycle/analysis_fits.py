"""Power-law fits in log-log space."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import MEAN_FIELD_Z_NU, w_irr_universal
from .errors import DomainError
from .gaussian_dynamics import ThermalSpec, cycle_outcome
from .protocol import RampSpec


@dataclass(frozen=True)
class FitResult:
    """y ~ prefactor * x**(-exponent); ``exponent > 0`` means decay."""

    exponent: float
    prefactor: float
    r_squared: float
    sample_count: int
    window: tuple

    @property
    def slope(self) -> float:
        return -self.exponent


def fit_power_law(points, window=None) -> FitResult:
    """Unweighted least-squares line through (ln x, ln y).

    Args:
        points: iterable of (x, y) pairs.
        window: optional (x_min, x_max); points outside are ignored.

    Raises:
        DomainError: fewer than 4 points in the window, or x, y not positive.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if window is not None:
        lo, hi = window
        pts = [(x, y) for x, y in pts if lo <= x <= hi]
    if len(pts) < 4:
        raise DomainError(f"need at least 4 points for a fit, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise DomainError("power-law fit needs positive, finite x and y")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - float(np.sum(resid**2)) / ss_tot))
    return FitResult(exponent=float(-slope), prefactor=math.exp(intercept), r_squared=r2,
                     sample_count=len(pts), window=(float(x.min()), float(x.max())))


def finite_time_points(r: float, taus, tol: float = 1e-10, g_f: float = 1.0):
    """(tau, w_irr(inf) - w_irr(tau)) for a vacuum cycle, with the slow limit from its closed form."""
    limit = w_irr_universal(math.inf, MEAN_FIELD_Z_NU, r)
    out = []
    for tau in taus:
        w = cycle_outcome(RampSpec(g_f=g_f, r=r, tau=float(tau)), ThermalSpec.vacuum(), tol).w_irr
        out.append((float(tau), limit - w))
    return out


def finite_time_exponent(r: float, taus, tol: float = 1e-10) -> FitResult:
    """Fitted decay exponent of the gap between the slow-limit work and its finite-time value."""
    return fit_power_law(finite_time_points(r, taus, tol))
