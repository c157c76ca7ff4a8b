"""Two-point-measurement work statistics of a squeezed thermal state.

For a cycle the final Hamiltonian equals the initial one, so a transition
n -> m costs W = (m - n) omega. Squeezing only connects levels of equal
parity, hence W = 2k omega with integer k and

    P(2k omega) = sum_n q_n S_{n, n+2k}

with thermal weights q_n = N^n / (1+N)^(n+1).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, PrecisionError
from .gaussian_dynamics import ThermalSpec
from .overlaps import overlap_matrix, squeezed_number_overlap, support_top

__all__ = [
    "WorkDistribution", "squeezed_number_overlap", "work_distribution",
    "cumulants_from_distribution", "negative_work_probability",
    "write_distribution_csv", "distribution_json", "MAX_CUTOFF",
]

MAX_CUTOFF = 16000
_LOG_RESOLVED = math.log(1e-250)


@dataclass(frozen=True)
class WorkDistribution:
    """Probabilities of W = 2k omega for k = k_min .. k_min + len(values) - 1.

    ``tail_mass`` is the probability not represented by any stored bin.
    """

    omega: float
    k_min: int
    values: np.ndarray = field(repr=False)
    tail_mass: float
    beta_omega: float
    squeeze_amp: float
    n_beta: float = 0.0
    cutoffs: tuple = (0, 0)

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_min + self.values.size)

    @property
    def probs(self) -> dict:
        return {int(k): float(p) for k, p in zip(self.ks, self.values)}

    def probability(self, k: int) -> float:
        """P(2k omega)."""
        i = int(k) - self.k_min
        if 0 <= i < self.values.size:
            return float(self.values[i])
        return 0.0

    def probability_at(self, work_over_omega: int) -> float:
        """P(W) for W an integer multiple of omega; zero for odd multiples."""
        w = int(work_over_omega)
        if w % 2:
            return 0.0
        return self.probability(w // 2)

    def total(self) -> float:
        return math.fsum(self.values)


def _thermal_cutoff(th: ThermalSpec, eps_tail: float) -> int:
    if th.is_vacuum:
        return 0
    x = th.ratio
    # smallest n_max with x^(n_max + 1) < eps_tail / 10
    return max(0, int(math.ceil(math.log(eps_tail / 10.0) / math.log(x))) - 1)


def _choose_m_max(tail_of, n_max, s, cap):
    m = n_max + int(math.ceil(10.0 * (1.0 + math.sinh(s) ** 2)))
    while True:
        if m > cap:
            raise CapacityError(f"Fock cutoff m_max={m} exceeds the cap {cap}")
        if tail_of(m):
            return m
        m *= 2


def work_distribution(th: ThermalSpec, squeeze_amp: float, eps_tail: float = 1e-10,
                      omega: float = 1.0, cap: int = MAX_CUTOFF) -> WorkDistribution:
    """Exact work distribution for the thermal state ``th`` squeezed by |s|.

    The pair set (n, m) is truncated symmetrically: a transition n -> m and
    its reverse m -> n are either both kept or both dropped, using
    S_{n,m} = S_{m,n}. Forward and backward bins then stand in the ratio
    exp(-2k beta omega) up to rounding.

    Raises:
        DomainError: eps_tail outside (0, 1e-6] or |s| < 0.
        CapacityError: the required Fock cutoff exceeds ``cap``.
    """
    s = float(squeeze_amp)
    if not 0.0 < eps_tail <= 1e-6:
        raise DomainError(f"eps_tail must lie in (0, 1e-6], got {eps_tail}")
    if s < 0:
        raise DomainError(f"squeeze amplitude must be non-negative, got {s}")

    n_max = _thermal_cutoff(th, eps_tail)
    top = max(n_max, support_top(s, n_max)) if s > 0 else n_max
    if top > cap:
        raise CapacityError(
            f"squeezed thermal support reaches Fock level {top} (n_max={n_max}, |s|={s:.4g}), "
            f"above the cap {cap}")
    block = overlap_matrix(s, n_max, top, top=top)
    q = th.populations(top)
    thermal_tail = 0.0 if th.is_vacuum else th.ratio ** (n_max + 1)

    # forward weight beyond column c, and mirrored weight of rows n_max < n <= c
    weighted = q[: n_max + 1, None] * block
    col_mass = weighted.sum(axis=0)
    beyond = np.concatenate([np.cumsum(col_mass[::-1])[::-1][1:], [0.0]])
    mirrored = np.zeros(top + 1)
    if top > n_max:
        mirrored[n_max + 1:] = q[n_max + 1:] * block[:, n_max + 1:].sum(axis=0)
    mirrored = np.cumsum(mirrored)

    def tail(c):
        return thermal_tail - mirrored[c] + beyond[c]

    m_max = _choose_m_max(lambda c: tail(min(c, top)) <= eps_tail, n_max, s, cap)
    m_max = min(m_max, top)

    k_hi = m_max // 2
    k_lo = -(m_max // 2)
    values = np.zeros(k_hi - k_lo + 1)
    for k in range(0, k_hi + 1):
        d = 2 * k
        rows = min(n_max, m_max - d) + 1
        if rows <= 0:
            continue
        diag = block[np.arange(rows), np.arange(rows) + d]
        values[k - k_lo] = float(np.dot(q[:rows], diag))
        if k:
            values[-k - k_lo] = float(np.dot(q[d: d + rows], diag))

    nz = np.nonzero(values)[0]
    if nz.size:
        values = values[nz[0]: nz[-1] + 1]
        k_lo += int(nz[0])
    return WorkDistribution(
        omega=omega, k_min=k_lo, values=values, tail_mass=max(0.0, float(tail(m_max))),
        beta_omega=th.beta_omega, squeeze_amp=s, n_beta=th.n_beta, cutoffs=(n_max, m_max))


def cumulants_from_distribution(wd: WorkDistribution, order: int = 3, tol: float = 1e-6):
    """First ``order`` cumulants of the stored distribution, in powers of omega.

    Raises:
        DomainError: order outside 1..4.
        PrecisionError: the unrepresented tail, placed at the edge of the support,
            could shift the order-``order`` moment by more than ``tol`` relative.
    """
    if order not in (1, 2, 3, 4):
        raise DomainError(f"order must be 1..4, got {order}")
    w = 2.0 * wd.ks * wd.omega
    p = wd.values
    if w.size == 0:
        return [0.0] * order
    edge = float(np.abs(w).max()) + 2.0 * wd.omega
    bound = wd.tail_mass * edge**order
    scale = max(wd.omega**order, math.fsum(p * np.abs(w) ** order))
    if bound > tol * scale:
        raise PrecisionError(
            f"tail mass {wd.tail_mass:.3e} allows a moment error of {bound:.3e} at order {order}")
    mean = math.fsum(p * w)
    dev = w - mean
    central = [math.fsum(p * dev**j) for j in range(2, order + 1)]
    out = [mean]
    if order >= 2:
        out.append(central[0])
    if order >= 3:
        out.append(central[1])
    if order >= 4:
        out.append(central[2] - 3.0 * central[0] ** 2)
    return out


def skewness(wd: WorkDistribution) -> float:
    _, k2, k3 = cumulants_from_distribution(wd, 3)
    if k2 == 0.0:
        return math.inf
    return k3 / k2**1.5


def negative_work_probability(wd: WorkDistribution) -> float:
    """p_v: total probability of W < 0."""
    neg = wd.ks < 0
    return math.fsum(wd.values[neg])


def crooks_deviation(wd: WorkDistribution, threshold: float = 1e-10) -> float:
    """Largest |P(-W) e^{beta W} / P(W) - 1| over bins with P(W) above ``threshold``.

    Pairs whose predicted P(-W) falls below 1e-250 are skipped: there the
    reverse bin has lost its relative precision to underflow.
    """
    if math.isinf(wd.beta_omega):
        return 0.0
    worst = 0.0
    for k in wd.ks[wd.ks > 0]:
        fwd = wd.probability(k)
        if fwd <= threshold:
            continue
        log_expected = math.log(fwd) - 2 * k * wd.beta_omega
        if log_expected < _LOG_RESOLVED:
            continue
        rev = wd.probability(-k)
        dev = 1.0 if rev == 0.0 else abs(math.expm1(math.log(rev) - log_expected))
        worst = max(worst, dev)
    return worst


def write_distribution_csv(path, wd: WorkDistribution, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["k", "W_over_omega", "probability"])
        for k, p in zip(wd.ks, wd.values):
            w.writerow([int(k), int(2 * k), f"{p:.12g}"])


def distribution_json(wd: WorkDistribution, r: float | None = None) -> dict:
    return {
        "beta_omega": None if math.isinf(wd.beta_omega) else wd.beta_omega,
        "n_beta": wd.n_beta,
        "r": r,
        "s": wd.squeeze_amp,
        "tail_mass": wd.tail_mass,
        "omega": wd.omega,
        "k": [int(k) for k in wd.ks],
        "probability": [float(p) for p in wd.values],
    }


def dumps(wd: WorkDistribution, r: float | None = None) -> str:
    return json.dumps(distribution_json(wd, r), indent=1)
