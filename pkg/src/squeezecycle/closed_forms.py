"""Closed-form universal expressions for slow cycles through the critical point.

All results depend on the ramp exponent ``r`` only through the product
``z_nu * r``; mean-field values use ``z_nu = 1/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

MEAN_FIELD_Z_NU = 0.5


@dataclass(frozen=True)
class CriticalExponents:
    z_nu: float = MEAN_FIELD_Z_NU
    d: int = 0

    def __post_init__(self):
        if not self.z_nu > 0:
            raise DomainError(f"z_nu must be positive, got {self.z_nu}")
        if self.d not in (0, 1):
            raise DomainError(f"d must be 0 or 1, got {self.d}")


def _half_angle(z_nu, r):
    # pi / (2 (1 + z_nu r)); the angle whose cot^2 is sinh^2|s|
    if z_nu <= 0 or r < 0:
        raise DomainError(f"need z_nu > 0 and r >= 0, got z_nu={z_nu}, r={r}")
    return math.pi / (2.0 * (1.0 + z_nu * r))


def squeezing_universal(z_nu: float = MEAN_FIELD_Z_NU, r: float = 1.0) -> float:
    """Squeezing amplitude left by an infinitely slow cycle to the critical point.

    Evaluates arcosh(csc(pi / (2 (1 + z_nu r)))) through the equivalent
    ``2 atanh(tan(pi z_nu r / (4 (1 + z_nu r))))``, which keeps full relative
    precision as r -> 0.
    """
    _half_angle(z_nu, r)
    x = z_nu * r
    return 2.0 * math.atanh(math.tan(math.pi * x / (4.0 * (1.0 + x))))


def _coth_half(beta_omega):
    if beta_omega < 0 or math.isnan(beta_omega):
        raise DomainError(f"beta_omega must be non-negative, got {beta_omega}")
    if math.isinf(beta_omega):
        return 1.0
    if beta_omega == 0.0:
        return math.inf
    return 1.0 / math.tanh(0.5 * beta_omega)


def w_irr_universal(beta_omega: float, z_nu: float = MEAN_FIELD_Z_NU, r: float = 1.0,
                    omega: float = 1.0) -> float:
    """Irreversible work omega coth(beta omega / 2) cot^2(pi / (2 (1 + z_nu r)))."""
    theta = _half_angle(z_nu, r)
    return omega * _coth_half(beta_omega) / math.tan(theta) ** 2


def s_irr_universal(beta_omega: float, z_nu: float = MEAN_FIELD_Z_NU, r: float = 1.0) -> float:
    """Irreversible entropy beta <W_irr>.

    Returns ``math.inf`` for ``beta_omega = inf`` (the zero-temperature entropy
    diverges) and the high-temperature plateau ``2 cot^2(...)`` for
    ``beta_omega = 0``.
    """
    theta = _half_angle(z_nu, r)
    cot2 = 1.0 / math.tan(theta) ** 2
    if math.isinf(beta_omega):
        return math.inf if cot2 > 0 else 0.0
    if beta_omega == 0.0:
        return 2.0 * cot2
    return beta_omega * _coth_half(beta_omega) * cot2


def s_irr_high_temperature(z_nu: float = MEAN_FIELD_Z_NU, r: float = 1.0) -> float:
    return 2.0 / math.tan(_half_angle(z_nu, r)) ** 2


def nonclassicality_threshold(n_beta: float) -> float:
    """Smallest ramp exponent for which the squeezed thermal state is nonclassical."""
    if n_beta < 0:
        raise DomainError(f"n_beta must be non-negative, got {n_beta}")
    arg = math.sqrt(1.0 + 2.0 * n_beta) / (1.0 + n_beta)
    return -2.0 + math.pi / math.asin(min(1.0, arg))


def nonclassicality_threshold_asymptote(n_beta: float) -> float:
    return math.pi * math.sqrt(n_beta / 2.0) - 2.0


def vacuum_cumulants(squeeze_amp: float, omega: float = 1.0):
    """First three work cumulants and the skewness for an initial vacuum.

    Returns:
        tuple: ``(kappa1, kappa2, kappa3, skewness)``. The skewness is
        ``kappa3 / kappa2**1.5 = 2 sqrt(2) coth(2|s|)`` and is ``inf`` at |s| = 0.
    """
    s = float(squeeze_amp)
    if s < 0:
        raise DomainError(f"squeeze amplitude must be non-negative, got {s}")
    sh2 = math.sinh(s) ** 2
    k1 = omega * sh2
    k2 = 2.0 * omega**2 * math.cosh(s) ** 2 * sh2
    k3 = omega**3 * math.cosh(2 * s) * math.sinh(2 * s) ** 2
    skew = math.inf if s == 0 else 2.0 * math.sqrt(2.0) / math.tanh(2.0 * s)
    return k1, k2, k3, skew


def vacuum_skewness_printed(squeeze_amp: float) -> float:
    """Trigonometric variant 2 sqrt(2) cot(2|s|) of the skewness, kept for comparison.

    It disagrees with kappa3 / kappa2**1.5 built from the cumulants above and
    is not used anywhere else in the package.
    """
    return 2.0 * math.sqrt(2.0) / math.tan(2.0 * squeeze_amp)


def _log_central_binomial_ratio(n):
    # log((2n)! / (4^n (n!)^2))
    n = np.asarray(n, dtype=float)
    return gammaln(2 * n + 1) - n * math.log(4.0) - 2.0 * gammaln(n + 1)


def _even_populations(log_p0, log_ratio, n_max, tail):
    if n_max is not None:
        n = np.arange(int(n_max) + 1)
        with np.errstate(divide="ignore"):
            return np.exp(_log_central_binomial_ratio(n) + log_p0 + n * log_ratio)
    if log_ratio == -math.inf:
        return np.array([math.exp(log_p0)])
    size = 64
    while True:
        n = np.arange(size)
        p = np.exp(_log_central_binomial_ratio(n) + log_p0 + n * log_ratio)
        below = np.nonzero(1.0 - np.cumsum(p) < tail)[0]
        if below.size:
            return p[: below[0] + 1]
        if p[-1] == 0.0:
            return p
        size *= 2


def squeezed_vacuum_populations(z_nu: float = MEAN_FIELD_Z_NU, r: float = 1.0,
                                n_max: int | None = None, tail: float = 1e-12) -> np.ndarray:
    """Even Fock populations p_{2n} of the squeezed vacuum left by a slow cycle.

    ``result[n]`` is the probability of 2n excitations; odd populations vanish.
    With ``n_max=None`` the array is extended until the missing mass is below
    ``tail``.
    """
    theta = math.pi / (2.0 + 2.0 * z_nu * r)
    _half_angle(z_nu, r)
    log_ratio = 2.0 * math.log(math.cos(theta)) if math.cos(theta) > 0 else -math.inf
    return _even_populations(math.log(math.sin(theta)), log_ratio, n_max, tail)


def squeezed_vacuum_populations_s(squeeze_amp: float, n_max: int | None = None,
                                  tail: float = 1e-12) -> np.ndarray:
    """Same as :func:`squeezed_vacuum_populations` parametrized by |s| directly."""
    s = float(squeeze_amp)
    if s < 0:
        raise DomainError(f"squeeze amplitude must be non-negative, got {s}")
    log_ratio = 2.0 * math.log(math.tanh(s)) if s > 0 else -math.inf
    return _even_populations(-math.log(math.cosh(s)), log_ratio, n_max, tail)


def kz_exponent_b(z_nu: float = MEAN_FIELD_Z_NU, r: float = 1.0) -> float:
    """Finite-time correction exponent 2 z_nu r / (1 + z_nu r) of the mean-field work."""
    if z_nu <= 0 or r <= 0:
        raise DomainError("z_nu and r must be positive")
    return 2.0 * z_nu * r / (1.0 + z_nu * r)


def kz_exponent_w(d: float, nu: float, z: float, r: float) -> float:
    """Kibble-Zurek decay exponent d nu r / (1 + z nu r) of the irreversible work."""
    if nu <= 0 or z <= 0 or r <= 0 or d < 0:
        raise DomainError("nu, z, r must be positive and d non-negative")
    return d * nu * r / (1.0 + z * nu * r)
