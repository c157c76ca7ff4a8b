"""Brute-force reference: Schrodinger evolution in a truncated Fock basis.

Deliberately naive. The Hamiltonian is a dense matrix, the thermal input is a
mixture of number states, and each number state with non-negligible weight is
propagated as one column of the evolution operator. Nothing here shares code
with the covariance solver or the overlap routines; it exists to check them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError, UnreliableResultError
from .gaussian_dynamics import ThermalSpec
from .protocol import RampSpec

DEFAULT_DIM = 120
MAX_DIM = 960
LEAKAGE_LIMIT = 1e-6


def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1)


def _x_squared(dim):
    # matrix elements of (a + a^dag)^2 in the full space, restricted to the block
    n = np.arange(dim, dtype=float)
    out = np.diag(2.0 * n + 1.0)
    off = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
    out += np.diag(off, 2) + np.diag(off, -2)
    return out


def build_hamiltonian(g: float, omega: float = 1.0, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Dense matrix of omega a^dag a - (omega g^2 / 4)(a + a^dag)^2 on levels 0..dim-1."""
    if dim < 2:
        raise DomainError(f"dim must be at least 2, got {dim}")
    return omega * np.diag(np.arange(dim, dtype=float)) - 0.25 * omega * g * g * _x_squared(dim)


@dataclass(frozen=True)
class TruncatedState:
    """Final state of a truncated run.

    ``columns[:, j]`` is U|j>, and ``weights[j]`` the (renormalized) thermal
    weight of |j>, so rho = sum_j weights[j] U|j><j|U^dag.
    """

    dim: int
    columns: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    leakage: float

    @property
    def rho(self) -> np.ndarray:
        c = self.columns
        return (c * self.weights) @ c.conj().T

    def populations(self) -> np.ndarray:
        return (np.abs(self.columns) ** 2) @ self.weights

    def mean_excitations(self) -> float:
        return float(np.arange(self.dim) @ self.populations())

    def quadrature_moments(self):
        """(<x^2>, <{x, p}>/2, <p^2>) with x = a + a^dag, p = i(a^dag - a)."""
        rho = self.rho
        a = _ladder(self.dim)
        n = np.arange(self.dim, dtype=float)
        a2 = a @ a
        # a^2 on the truncated block is exact; so are the number-diagonal parts
        x2 = np.diag(2 * n + 1) + a2 + a2.T
        p2 = np.diag(2 * n + 1) - a2 - a2.T
        xp = 1j * (a2.T - a2)
        r11 = float(np.real(np.trace(rho @ x2)))
        r22 = float(np.real(np.trace(rho @ p2)))
        r12 = float(np.real(np.trace(rho @ xp)))
        return r11, r12, r22

    def covariance_vector(self) -> np.ndarray:
        """Second moments ordered as the covariance solver propagates them."""
        x2, sym, p2 = self.quadrature_moments()
        return np.array([p2, -sym, x2])

    def work_distribution(self) -> dict:
        """Two-point-measurement P(W = 2k omega) as a map k -> probability."""
        trans = np.abs(self.columns) ** 2 * self.weights
        out = {}
        for j in range(trans.shape[1]):
            for m in range(j % 2, self.dim, 2):
                k = (m - j) // 2
                out[k] = out.get(k, 0.0) + trans[m, j]
        return out


def _thermal_weights(th: ThermalSpec, dim: int):
    if th.is_vacuum:
        return np.array([1.0])
    x = th.ratio
    ncols = max(1, min(dim // 3, int(math.ceil(math.log(1e-15) / math.log(x)))))
    w = x ** np.arange(ncols)
    return w / w.sum()


def _propagate_once(spec: RampSpec, th: ThermalSpec, dim: int, tol: float, samples: int):
    weights = _thermal_weights(th, dim)
    ncols = weights.size
    n_op = spec.omega * np.diag(np.arange(dim, dtype=float))
    x2 = 0.25 * spec.omega * _x_squared(dim)
    g_f, r, tau = spec.g_f, spec.r, spec.tau

    def rhs(t, y):
        g = g_f * (1.0 - (abs(tau - t) / tau) ** r)
        u = y.reshape(dim, ncols)
        return (-1j * (n_op @ u - g * g * (x2 @ u))).ravel()

    edge = max(4, dim // 8)
    y = np.eye(dim, ncols, dtype=complex).ravel()
    leak = 0.0
    for t0, t1 in ((0.0, tau), (tau, 2.0 * tau)):
        sol = solve_ivp(rhs, (t0, t1), y, method="DOP853", rtol=tol, atol=tol * 1e-2,
                        t_eval=np.linspace(t0, t1, samples))
        if sol.status != 0:
            raise IntegrationError(f"Fock propagation failed near t={sol.t[-1] if sol.t.size else t0}",
                                   time=float(sol.t[-1]) if sol.t.size else t0)
        pops = np.abs(sol.y.reshape(dim, ncols, -1)) ** 2
        leak = max(leak, float(np.max(np.tensordot(weights, pops[-edge:].sum(axis=0), axes=(0, 0)))))
        y = sol.y[:, -1]
    return TruncatedState(dim=dim, columns=y.reshape(dim, ncols), weights=weights, leakage=leak)


def propagate(spec: RampSpec, th: ThermalSpec, dim: int = DEFAULT_DIM, tol: float = 1e-10,
              max_dim: int = MAX_DIM, leakage_limit: float = LEAKAGE_LIMIT,
              samples: int = 81) -> TruncatedState:
    """Evolve the thermal state through the cycle in a Fock space of size ``dim``.

    The largest population found in the top eighth of the basis at any of the
    ``samples`` checkpoints per half cycle is the leakage estimate. On failure
    the dimension is doubled until ``max_dim``.

    Raises:
        UnreliableResultError: leakage stays above ``leakage_limit`` at ``max_dim``.
    """
    if dim < 2:
        raise DomainError(f"dim must be at least 2, got {dim}")
    while True:
        state = _propagate_once(spec, th, dim, tol, samples)
        if state.leakage <= leakage_limit:
            return state
        if dim * 2 > max_dim:
            raise UnreliableResultError(
                f"leakage {state.leakage:.2e} above {leakage_limit:.0e} at dim={dim}; "
                f"raise max_dim beyond {max_dim}")
        dim *= 2
