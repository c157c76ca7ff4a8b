"""Covariance-matrix dynamics of the driven mode over one cycle.

The state stays Gaussian with zero first moments, so three symmetrized second
moments of the quadratures x = a + a^dag, p = i(a^dag - a) carry all the
information. They obey dR/dt = M(t) R(t) with the drift matrix below.

With the Heisenberg equations dx/dt = omega p, dp/dt = -omega (1 - g^2) x,
this M propagates R = (<p^2>, -<xp + px>/2, <x^2>). Trace, determinant and
eigenvalues, which is all the cycle observables use, are blind to that
ordering.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConsistencyError, DomainError, IntegrationError, NumericalError
from .protocol import RampSpec

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ThermalSpec:
    """Initial thermal state, parametrized by beta*omega.

    ``beta_omega = inf`` is the vacuum and has ``n_beta = 0`` exactly.
    Prefer the ``from_beta`` / ``from_occupation`` constructors; the latter
    keeps a user-supplied occupation exact instead of round-tripping it
    through a logarithm.
    """

    beta_omega: float
    n_beta: float

    def __post_init__(self):
        if not self.beta_omega > 0:
            raise DomainError(f"beta_omega must be positive, got {self.beta_omega}")
        if not (self.n_beta >= 0 and math.isfinite(self.n_beta)):
            raise DomainError(f"n_beta must be finite and non-negative, got {self.n_beta}")
        if (self.n_beta == 0) != math.isinf(self.beta_omega):
            raise DomainError("n_beta = 0 if and only if beta_omega = inf")

    @classmethod
    def from_beta(cls, beta_omega: float) -> "ThermalSpec":
        beta_omega = float(beta_omega)
        if math.isinf(beta_omega) and beta_omega > 0:
            return cls(math.inf, 0.0)
        if not beta_omega > 0:
            raise DomainError(f"beta_omega must be positive, got {beta_omega}")
        n = 1.0 / math.expm1(beta_omega)
        if n == 0.0:
            return cls(math.inf, 0.0)
        return cls(beta_omega, n)

    @classmethod
    def from_occupation(cls, n_beta: float) -> "ThermalSpec":
        n_beta = float(n_beta)
        if n_beta == 0:
            return cls(math.inf, 0.0)
        if not n_beta > 0:
            raise DomainError(f"n_beta must be non-negative, got {n_beta}")
        beta = math.log1p(1.0 / n_beta)
        if math.isinf(beta):
            # subnormal occupations are indistinguishable from the vacuum
            return cls(math.inf, 0.0)
        return cls(beta, n_beta)

    @classmethod
    def vacuum(cls) -> "ThermalSpec":
        return cls(math.inf, 0.0)

    @property
    def is_vacuum(self) -> bool:
        return self.n_beta == 0.0

    @property
    def ratio(self) -> float:
        """Geometric ratio N/(1+N) = exp(-beta omega) of thermal populations."""
        return self.n_beta / (1.0 + self.n_beta)

    def populations(self, n_max: int) -> np.ndarray:
        """Thermal Fock populations N^n / (1+N)^(n+1) for n = 0..n_max."""
        n = np.arange(int(n_max) + 1)
        if self.is_vacuum:
            out = np.zeros(n.size)
            out[0] = 1.0
            return out
        return np.exp(n * math.log(self.ratio) - math.log1p(self.n_beta))


@dataclass(frozen=True)
class CovarianceState:
    r11: float
    r12: float
    r22: float
    t: float = 0.0

    @property
    def det(self) -> float:
        return self.r11 * self.r22 - self.r12 * self.r12

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r12, self.r22]])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.r11, self.r12, self.r22])

    @property
    def n_excitations(self) -> float:
        """Mean boson number (Tr R - 2) / 4."""
        return (self.r11 + self.r22 - 2.0) / 4.0

    def eigenvalues(self):
        """Return (lambda_plus, lambda_minus), the minus branch taken as det/lambda_plus."""
        half_trace = 0.5 * (self.r11 + self.r22)
        radius = math.hypot(0.5 * (self.r11 - self.r22), self.r12)
        lam_plus = half_trace + radius
        if lam_plus <= 0:
            return lam_plus, lam_plus
        return lam_plus, self.det / lam_plus


@dataclass(frozen=True)
class CycleOutcome:
    squeeze_amp: float
    mean_excitations: float
    w_irr: float
    s_irr: float


def thermal_covariance(th: ThermalSpec) -> CovarianceState:
    v = 1.0 + 2.0 * th.n_beta
    return CovarianceState(v, 0.0, v, 0.0)


def drift_matrix(g: float, omega: float = 1.0) -> np.ndarray:
    """3x3 generator M(g) acting on (R11, R12, R22)."""
    if abs(g) > 1.0:
        raise DomainError(f"|g| must not exceed 1, got {g}")
    a = g * g - 1.0
    return np.array([
        [0.0, -2.0 * omega * a, 0.0],
        [-omega, 0.0, -omega * a],
        [0.0, -2.0 * omega, 0.0],
    ])


def _rhs_factory(spec: RampSpec):
    g_f, r, tau, omega = spec.g_f, spec.r, spec.tau, spec.omega

    def rhs(t, y):
        g = g_f * (1.0 - (abs(tau - t) / tau) ** r)
        a = g * g - 1.0
        return [-2.0 * omega * a * y[1], -omega * y[0] - omega * a * y[2], -2.0 * omega * y[1]]

    return rhs


def _integrate(spec: RampSpec, y0, tol, sample_times=None):
    """Integrate over [0, tau] and [tau, 2 tau] separately so tau is a grid point."""
    rhs = _rhs_factory(spec)
    # integrate two orders below the requested accuracy; det R then holds to ~tol
    rtol = max(tol * 1e-2, 1e-13)
    atol = rtol * 1e-2
    y = np.asarray(y0, dtype=float)
    ts, ys = [], []
    for t0, t1 in ((0.0, spec.tau), (spec.tau, 2.0 * spec.tau)):
        t_eval = None
        if sample_times is not None:
            inside = sample_times[(sample_times >= t0) & (sample_times < t1)]
            # t_eval only adds dense-output samples; the accepted steps are unchanged
            t_eval = np.append(inside, t1)
        sol = solve_ivp(rhs, (t0, t1), y, method="DOP853", rtol=rtol, atol=atol,
                        max_step=spec.tau / 100.0, t_eval=t_eval)
        if sol.status != 0:
            t_fail = float(sol.t[-1]) if sol.t.size else t0
            raise IntegrationError(f"covariance integration failed at t={t_fail}: {sol.message}",
                                   time=t_fail)
        ts.append(sol.t)
        ys.append(sol.y)
        y = sol.y[:, -1]
    return y, ts, ys


def evolve_cycle(spec: RampSpec, th: ThermalSpec, tol: float = DEFAULT_TOL) -> CovarianceState:
    """Propagate the thermal covariance through the full cycle.

    Args:
        spec: ramp parameters.
        th: initial thermal state.
        tol: target relative accuracy; the embedded Runge-Kutta 8(5,3) integrator
            runs at ``tol / 100``.

    Returns:
        CovarianceState at t = 2 tau.

    Raises:
        IntegrationError: the adaptive integrator could not finish.
        ConsistencyError: det R drifted by more than 10*tol.
    """
    start = thermal_covariance(th)
    y, _, _ = _integrate(spec, start.vector, tol)
    final = CovarianceState(float(y[0]), float(y[1]), float(y[2]), 2.0 * spec.tau)
    drift = abs(final.det / start.det - 1.0)
    if drift > 10.0 * tol:
        raise ConsistencyError(f"det R drifted by {drift:.3e} over the cycle")
    return final


def trajectory(spec: RampSpec, th: ThermalSpec, n_points: int = 201, tol: float = DEFAULT_TOL):
    """Sample the covariance along the cycle.

    Returns:
        dict of equal-length arrays with keys t, g, r11, r12, r22, detR, n_excitations.
    """
    times = np.linspace(0.0, 2.0 * spec.tau, int(n_points))
    _, ts, ys = _integrate(spec, thermal_covariance(th).vector, tol, sample_times=times)
    t = np.concatenate(ts)
    y = np.concatenate(ys, axis=1)
    g = spec.g_f * (1.0 - (np.abs(spec.tau - t) / spec.tau) ** spec.r)
    det = y[0] * y[2] - y[1] ** 2
    return {
        "t": t, "g": g, "r11": y[0], "r12": y[1], "r22": y[2],
        "detR": det, "n_excitations": (y[0] + y[2] - 2.0) / 4.0,
    }


def write_trajectory_csv(path, traj) -> None:
    cols = ["t", "g", "r11", "r12", "r22", "detR", "n_excitations"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in zip(*(traj[c] for c in cols)):
            w.writerow([f"{v:.12g}" for v in row])


def extract_squeezing(cov: CovarianceState, th: ThermalSpec | None = None) -> float:
    """Squeezing amplitude |s| = ln(lambda_plus / lambda_minus) / 4.

    The eigenvalue ratio does not depend on the thermal prefactor 1 + 2N, so
    ``th`` only serves as a cross-check: when given, lambda_plus*lambda_minus
    must equal (1 + 2N)^2 to a relative 1e-6.
    """
    lam_p, lam_m = cov.eigenvalues()
    if not (lam_p > 0 and lam_m > 0):
        raise NumericalError(f"covariance is not positive definite: eigenvalues {lam_p}, {lam_m}")
    if th is not None:
        expected = (1.0 + 2.0 * th.n_beta) ** 2
        if abs(lam_p * lam_m / expected - 1.0) > 1e-6:
            raise ConsistencyError(
                f"det R = {lam_p * lam_m:.12g} does not match thermal value {expected:.12g}")
    return max(0.0, 0.25 * math.log(lam_p / lam_m))


def cycle_outcome(spec: RampSpec, th: ThermalSpec, tol: float = DEFAULT_TOL) -> CycleOutcome:
    final = evolve_cycle(spec, th, tol)
    s = extract_squeezing(final, th)
    n_final = final.n_excitations
    w_irr = spec.omega * (n_final - th.n_beta)
    s_irr = math.inf if th.is_vacuum else th.beta_omega * w_irr / spec.omega
    return CycleOutcome(squeeze_amp=s, mean_excitations=n_final, w_irr=w_irr, s_irr=s_irr)
