"""Population and coherence shares of the entropy produced by a cycle.

The relative entropy between the final state and the initial thermal state
splits exactly into

* C, the relative entropy of coherence: Shannon entropy of the dephased
  final populations minus the von Neumann entropy of the thermal state, and
* D, the classical relative entropy of those populations to the thermal ones,

with C + D = beta omega (<n>_final - N).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr, gammaln, xlogy

from .closed_forms import squeezed_vacuum_populations_s
from .errors import CapacityError, ConsistencyError, DomainError, PrecisionError
from .gaussian_dynamics import ThermalSpec
from .overlaps import overlap_matrix, support_top
from .work_statistics import MAX_CUTOFF, _thermal_cutoff

ROUTE_AGREEMENT = 1e-6


@dataclass(frozen=True)
class DephasedPopulations:
    """Diagonal of the final density matrix in the Fock basis, n = 0..len(probs)-1."""

    probs: np.ndarray = field(repr=False)
    tail_mass: float
    beta_omega: float
    squeeze_amp: float
    n_beta: float = 0.0
    route_gap: float = 0.0

    def __post_init__(self):
        self.probs.setflags(write=False)

    def mean(self) -> float:
        return math.fsum(np.arange(self.probs.size) * self.probs)


def closed_form_populations(th: ThermalSpec, squeeze_amp: float, n_max: int) -> np.ndarray:
    """Populations of a squeezed thermal state from the finite double-factorial sum.

    With mu = coth(beta omega / 2), h = (1 + mu e^{2s})(1 + mu e^{-2s}),
    l^2 = mu sinh(2s) / h and q = (mu^2 - 1) / h, each p_n is a positive sum
    over k of q^e l^{-2e} / (e! ((n - e)/2)!^2) with e = 2k or 2k + 1
    matching the parity of n, times 2 n! l^{2n} / sqrt(h).
    """
    s = float(squeeze_amp)
    mu = 2.0 * th.n_beta + 1.0
    h = (1.0 + mu * math.exp(2 * s)) * (1.0 + mu * math.exp(-2 * s))
    ell2 = mu * math.sinh(2 * s) / h
    qq = (mu * mu - 1.0) / h
    out = np.empty(int(n_max) + 1)
    for n in range(out.size):
        e = np.arange(n % 2, n + 1, 2)
        half = (n - e) // 2
        logs = xlogy(e, qq) + xlogy(n - e, ell2) - gammaln(e + 1) - 2.0 * gammaln(half + 1)
        out[n] = math.exp(math.log(2.0) + gammaln(n + 1) - 0.5 * math.log(h)
                          + np.logaddexp.reduce(logs))
    return out


def dephased_populations(th: ThermalSpec, squeeze_amp: float, eps_tail: float = 1e-12,
                         check: bool = True, cap: int = MAX_CUTOFF) -> DephasedPopulations:
    """Final Fock populations p_n = sum_m q_m S_{m,n} for the squeezed thermal state.

    With ``check`` the closed-form sum is evaluated on the same range and the
    largest absolute difference is stored as ``route_gap``.

    Raises:
        ConsistencyError: the two evaluations differ by more than 1e-6.
    """
    s = float(squeeze_amp)
    if not 0.0 < eps_tail <= 1e-6:
        raise DomainError(f"eps_tail must lie in (0, 1e-6], got {eps_tail}")
    if s < 0:
        raise DomainError(f"squeeze amplitude must be non-negative, got {s}")
    m_max = _thermal_cutoff(th, eps_tail)
    top = max(m_max, support_top(s, m_max)) if s > 0 else m_max
    if top > cap:
        raise CapacityError(f"squeezed thermal support reaches Fock level {top}, above the cap {cap}")
    block = overlap_matrix(s, m_max, top, top=top)
    q = th.populations(m_max)
    p = q @ block
    thermal_tail = 0.0 if th.is_vacuum else th.ratio ** (m_max + 1)

    suffix = np.cumsum(p[::-1])[::-1]
    keep = np.nonzero(suffix > eps_tail / 10.0)[0]
    n_cut = int(keep[-1]) if keep.size else 0
    dropped = float(suffix[n_cut + 1]) if n_cut + 1 < p.size else 0.0
    p = p[: n_cut + 1].copy()
    if th.is_vacuum:
        p[1::2] = 0.0

    gap = 0.0
    if check:
        alt = closed_form_populations(th, s, n_cut)
        gap = float(np.abs(alt - p).max())
        if gap > ROUTE_AGREEMENT:
            raise ConsistencyError(
                f"population routes disagree by {gap:.3e} (N={th.n_beta}, |s|={s})")
    return DephasedPopulations(probs=p, tail_mass=thermal_tail + dropped,
                               beta_omega=th.beta_omega, squeeze_amp=s,
                               n_beta=th.n_beta, route_gap=gap)


def thermal_von_neumann(th: ThermalSpec) -> float:
    """Entropy (N+1) ln(N+1) - N ln N of a thermal state, in nats."""
    n = th.n_beta
    if n == 0.0:
        return 0.0
    return (n + 1.0) * math.log1p(n) - n * math.log(n)


def _shannon(p) -> float:
    return math.fsum(entr(np.asarray(p)))


def _check_entropy_tail(tail, scale):
    bound = tail * (1.0 + abs(math.log(tail)) + scale) if tail > 0 else 0.0
    if bound > 1e-8:
        raise PrecisionError(f"tail mass {tail:.3e} leaves an entropy uncertainty of {bound:.3e}")


def coherence_entropy(th: ThermalSpec, squeeze_amp: float, eps_tail: float = 1e-12,
                      pops: DephasedPopulations | None = None) -> float:
    """Relative entropy of coherence C = H(p) - S_v(thermal), in nats.

    For the vacuum it is the Shannon entropy of the squeezed-vacuum
    populations, built from their closed form without any thermal input.
    """
    s = float(squeeze_amp)
    if th.is_vacuum:
        p = squeezed_vacuum_populations_s(s, tail=eps_tail)
        _check_entropy_tail(max(0.0, 1.0 - math.fsum(p)), 2.0 * p.size)
        return _shannon(p)
    if pops is None:
        pops = dephased_populations(th, s, eps_tail)
    _check_entropy_tail(pops.tail_mass, th.beta_omega * pops.probs.size)
    return max(0.0, _shannon(pops.probs) - thermal_von_neumann(th))


def population_relative_entropy(th: ThermalSpec, squeeze_amp: float, eps_tail: float = 1e-12,
                                pops: DephasedPopulations | None = None) -> float:
    """Classical relative entropy D = sum p_n ln(p_n / q_n); ``inf`` for the vacuum when |s| > 0."""
    s = float(squeeze_amp)
    if th.is_vacuum:
        return 0.0 if s == 0.0 else math.inf
    if pops is None:
        pops = dephased_populations(th, s, eps_tail)
    p = pops.probs
    n = np.arange(p.size)
    log_q = n * math.log(th.ratio) - math.log1p(th.n_beta)
    value = math.fsum(xlogy(p, p) - p * log_q)
    return max(0.0, value)


def coherence_ratio(th: ThermalSpec, squeeze_amp: float, eps_tail: float = 1e-12) -> float:
    """C / <S_irr> with <S_irr> = beta omega (2N + 1) sinh^2|s|.

    The vacuum limit returns 0, since C stays finite while <S_irr> diverges.
    """
    s = float(squeeze_amp)
    if th.is_vacuum:
        return 0.0
    if s == 0.0:
        raise DomainError("coherence ratio is undefined at |s| = 0")
    s_irr = th.beta_omega * (2.0 * th.n_beta + 1.0) * math.sinh(s) ** 2
    return coherence_entropy(th, s, eps_tail) / s_irr


@dataclass(frozen=True)
class EntropySplit:
    coherence: float
    population: float
    s_irr: float
    ratio: float


def entropy_split(th: ThermalSpec, squeeze_amp: float, eps_tail: float = 1e-12) -> EntropySplit:
    """C, D, <S_irr> and their ratio from one population evaluation."""
    s = float(squeeze_amp)
    if th.is_vacuum:
        c = coherence_entropy(th, s, eps_tail)
        return EntropySplit(c, math.inf if s > 0 else 0.0, math.inf if s > 0 else 0.0, 0.0)
    pops = dephased_populations(th, s, eps_tail)
    c = coherence_entropy(th, s, eps_tail, pops)
    d = population_relative_entropy(th, s, eps_tail, pops)
    s_irr = th.beta_omega * (2.0 * th.n_beta + 1.0) * math.sinh(s) ** 2
    return EntropySplit(c, d, s_irr, c / s_irr if s_irr > 0 else math.nan)


def write_sweep_csv(path, rows, header_lines=()) -> None:
    cols = ["n_beta", "beta_omega", "r", "s", "C", "D", "S_irr", "ratio"]
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([f"{row[c]:.12g}" for c in cols])
