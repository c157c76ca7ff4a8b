"""Reference implementations kept independent of the package internals."""
import math

import numpy as np
from scipy.linalg import expm


def squeeze_populations_expm(s, dim=200):
    """|<m|S(s)|n>|^2 from a dense matrix exponential of (s/2)(a^2 - a^dag^2)."""
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1)
    gen = 0.5 * s * (a @ a - a.T @ a.T)
    u = expm(gen)
    return np.abs(u.T) ** 2  # [n, m]: column n of U holds S|n>


def squeezed_vacuum_even(s, n):
    """p_{2n} of a squeezed vacuum from exact binomials."""
    return math.comb(2 * n, n) / 4**n * math.tanh(s) ** (2 * n) / math.cosh(s)


def shannon(p):
    return -sum(x * math.log(x) for x in p if x > 0)


def _mode_matrix(g, k):
    return 2.0 * np.array([[g - math.cos(k), math.sin(k)], [math.sin(k), math.cos(k) - g]])


def tfim_sudden_excitation(k, g_from, g_to):
    """Weight of the g_from ground state on the g_to excited state, from eigh."""
    _, v0 = np.linalg.eigh(_mode_matrix(g_from, k))
    _, v1 = np.linalg.eigh(_mode_matrix(g_to, k))
    return abs(v1[:, 1] @ v0[:, 0]) ** 2


def tfim_stepwise_excitation(k, field, t_end, steps):
    """Excitation at t_end after midpoint piecewise-constant propagation of one mode."""
    _, v0 = np.linalg.eigh(_mode_matrix(field(0.0), k))
    psi = v0[:, 0].astype(complex)
    dt = t_end / steps
    for j in range(steps):
        psi = expm(-1j * dt * _mode_matrix(field((j + 0.5) * dt), k)) @ psi
    _, v1 = np.linalg.eigh(_mode_matrix(field(t_end), k))
    return abs(v1[:, 1].conj() @ psi) ** 2
