"""Fock-basis populations of squeezed number states, S_{n,m} = |<m|S(s)|n>|^2.

Two independent evaluations live here:

* :func:`squeezed_number_overlap` sums the closed-form alternating series for a
  single element. The series is summed in log space at the scale of its
  largest term; when the observed cancellation would cost more than a few
  digits the sum is redone in extended precision with mpmath.
* :func:`overlap_matrix` builds whole blocks at once. Column S(s)|n> is the
  eigenvector, with exact eigenvalue n, of S a^dag a S^dag, whose Fock matrix
  is tridiagonal within each parity sector. The resulting three-term
  recurrence is solved with Miller's two-sided scheme: forward from m = 0,
  backward from far above the classical turning point, matched near m = n.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import CapacityError, DomainError

# relative digits we are willing to lose to cancellation before escalating
_CANCELLATION_LIMIT = 1e4
_FLUSH = 1e-280
# below this |s| every off-diagonal weight (~ s^2 n m) is under 1e-110
_IDENTITY_BELOW = 1e-60


def _check_args(n, m, s):
    if n < 0 or m < 0:
        raise DomainError(f"Fock indices must be non-negative, got n={n}, m={m}")
    if s < 0:
        raise DomainError(f"squeeze amplitude must be non-negative, got {s}")


def _series_terms(n, m, s):
    ks = np.arange(max(0, (m - n) // 2), m // 2 + 1)
    sh2 = math.sinh(s) ** 2
    with np.errstate(divide="ignore"):
        log_pow = ks * math.log(sh2) if sh2 > 0 else np.where(ks == 0, 0.0, -np.inf)
    logs = (log_pow - ks * math.log(4.0) - gammaln(ks + 1) - gammaln(m - 2 * ks + 1)
            - gammaln(ks + (n - m) // 2 + 1))
    signs = np.where(ks % 2 == 0, 1.0, -1.0)
    return ks, logs, signs


def _log_prefactor(n, m, s):
    # log of n! m! / 2^(n-m) * tanh^(n-m) / cosh^(2m+1)
    out = gammaln(n + 1) + gammaln(m + 1) - (n - m) * math.log(2.0) - (2 * m + 1) * math.log(math.cosh(s))
    if n != m:
        out += (n - m) * math.log(math.tanh(s))
    return out


def _overlap_mp(n, m, s, digits):
    with mpmath.workdps(digits):
        sm = mpmath.mpf(s)
        sh2 = mpmath.sinh(sm) ** 2
        q = mpmath.mpf(0)
        for k in range(max(0, (m - n) // 2), m // 2 + 1):
            q += (-1) ** k * sh2**k / (mpmath.mpf(4) ** k * mpmath.factorial(k)
                                      * mpmath.factorial(m - 2 * k)
                                      * mpmath.factorial(k + (n - m) // 2))
        pref = (mpmath.factorial(n) * mpmath.factorial(m) / mpmath.mpf(2) ** (n - m)
                * mpmath.tanh(sm) ** (n - m) / mpmath.cosh(sm) ** (2 * m + 1))
        return float(pref * q * q)


def squeezed_number_overlap(n: int, m: int, squeeze_amp: float) -> float:
    """Probability |<m|S(s)|n>|^2 of finding m quanta in the squeezed number state |n>.

    Depends on the squeezing parameter only through |s|. Zero when n - m is odd.
    """
    n, m, s = int(n), int(m), float(squeeze_amp)
    _check_args(n, m, s)
    if (n - m) % 2:
        return 0.0
    if s == 0.0:
        return 1.0 if n == m else 0.0
    ks, logs, signs = _series_terms(n, m, s)
    if ks.size == 0:
        return 0.0
    lead = logs.max()
    acc = math.fsum(signs * np.exp(logs - lead))
    cancellation = math.inf if acc == 0.0 else float(np.sum(np.exp(logs - lead))) / abs(acc)
    if cancellation > _CANCELLATION_LIMIT:
        digits = 30 + int(math.log10(cancellation)) if math.isfinite(cancellation) else 60
        lead_total = _log_prefactor(n, m, s) + 2.0 * lead
        # an exactly vanishing float sum may still hide a value; bound the work with digits
        digits = max(digits, 30 + int(abs(lead_total) / math.log(10)))
        return _overlap_mp(n, m, s, digits)
    if abs(acc) < _FLUSH:
        return 0.0
    return math.exp(_log_prefactor(n, m, s) + 2.0 * (lead + math.log(abs(acc))))


def decay_length(squeeze_amp: float, digits: float = 30.0) -> int:
    """Number of Fock levels over which a squeezed tail falls by 10^-digits."""
    t = math.tanh(squeeze_amp)
    if t <= 0:
        return 2
    return int(math.ceil(digits * math.log(10.0) / -math.log(t))) + 20


def support_top(squeeze_amp: float, n_max: int) -> int:
    """Fock level above which every column n <= n_max has negligible weight."""
    return int(math.ceil((n_max + 1) * math.exp(2.0 * squeeze_amp))) + decay_length(squeeze_amp)


def _miller_sector(mu, nu, ns, ms):
    """Squared, normalized eigenvector components for one parity sector.

    ``ns`` are the eigenvalues (column labels), ``ms`` the Fock levels of the
    sector in increasing order. Returns an array of shape (len(ms), len(ns)).
    """
    b = mu * nu
    nu2 = nu * nu
    size, cols = ms.size, ns.size
    big, shrink = 1e150, 1e-150
    log_shrink = math.log(big)

    # forward sweep: c_{m+2} from c_m, c_{m-2}
    fwd = np.empty((size, cols))
    fwd_log = np.empty((size, cols))
    cur = np.ones(cols)
    prev = np.zeros(cols)
    scale = np.zeros(cols)
    fwd[0], fwd_log[0] = cur, scale
    for j in range(size - 1):
        m = float(ms[j])
        # diagonal (mu^2 + nu^2) m + nu^2 - n, kept exact for small nu
        nxt = (((ns - m) - nu2 * (2.0 * m + 1.0)) * cur - b * math.sqrt(m * (m - 1.0)) * prev) / (
            b * math.sqrt((m + 1.0) * (m + 2.0)))
        prev, cur = cur, nxt
        hit = np.abs(cur) > big
        if hit.any():
            cur = np.where(hit, cur * shrink, cur)
            prev = np.where(hit, prev * shrink, prev)
            scale = scale + hit * log_shrink
        fwd[j + 1], fwd_log[j + 1] = cur, scale

    # backward sweep from the top: c_{m-2} from c_m, c_{m+2}
    bwd = np.empty((size, cols))
    bwd_log = np.empty((size, cols))
    cur = np.ones(cols)
    nxt = np.zeros(cols)
    scale = np.zeros(cols)
    bwd[-1], bwd_log[-1] = cur, scale
    for j in range(size - 1, 0, -1):
        m = float(ms[j])
        prv = (((ns - m) - nu2 * (2.0 * m + 1.0)) * cur - b * math.sqrt((m + 1.0) * (m + 2.0)) * nxt) / (
            b * math.sqrt(m * (m - 1.0)))
        nxt, cur = cur, prv
        hit = np.abs(cur) > big
        if hit.any():
            cur = np.where(hit, cur * shrink, cur)
            nxt = np.where(hit, nxt * shrink, nxt)
            scale = scale + hit * log_shrink
        bwd[j - 1], bwd_log[j - 1] = cur, scale

    with np.errstate(divide="ignore"):
        lf = np.log(np.abs(fwd)) + fwd_log
        lb = np.log(np.abs(bwd)) + bwd_log
    del fwd, bwd, fwd_log, bwd_log

    # match on a small window around m = n (inside the oscillatory region)
    col = np.arange(cols)
    centre = np.clip(np.searchsorted(ms, ns), 0, size - 1)
    win = np.clip(centre[None, :] + np.arange(-2, 3)[:, None], 0, size - 1)
    shift = 0.5 * (np.logaddexp.reduce(2 * lb[win, col], axis=0)
                   - np.logaddexp.reduce(2 * lf[win, col], axis=0))
    rows = np.arange(size)[:, None]
    logc = np.where(rows <= centre[None, :], lf + shift[None, :], lb)
    norm = np.logaddexp.reduce(2.0 * logc, axis=0)
    return np.exp(2.0 * logc - norm[None, :])


def overlap_matrix(squeeze_amp: float, n_max: int, m_max: int, top: int | None = None,
                   cap: int | None = None, with_tails: bool = False):
    """Block S[n, m] = |<m|S(s)|n>|^2 for 0 <= n <= n_max, 0 <= m <= m_max.

    Each row is normalized over Fock levels 0..top, where ``top`` defaults to
    a level safely beyond the support of every requested row.

    Args:
        squeeze_amp: |s| >= 0.
        n_max, m_max: block extent.
        top: override for the internal normalization level.
        cap: raise CapacityError if ``top`` would exceed it.
        with_tails: also return the per-row weight on levels m_max < m <= top.

    Returns:
        ndarray of shape (n_max + 1, m_max + 1), or ``(block, tails)``.
    """
    s = float(squeeze_amp)
    n_max, m_max = int(n_max), int(m_max)
    _check_args(n_max, m_max, s)
    if s < _IDENTITY_BELOW:
        block = np.zeros((n_max + 1, m_max + 1))
        d = min(n_max, m_max) + 1
        block[np.arange(d), np.arange(d)] = 1.0
        tails = np.zeros(n_max + 1)
        tails[m_max + 1:] = 1.0
        return (block, tails) if with_tails else block
    if top is None:
        # pad above m_max so the returned edge is past the backward start transient
        top = max(m_max + 60, support_top(s, n_max))
    top = max(int(top), m_max, n_max)
    if cap is not None and top > cap:
        raise CapacityError(f"overlap matrix needs Fock level {top}, above the cap {cap}")
    mu, nu = math.cosh(s), math.sinh(s)
    block = np.zeros((n_max + 1, m_max + 1))
    tails = np.zeros(n_max + 1)
    for parity in (0, 1):
        ns = np.arange(parity, n_max + 1, 2)
        if ns.size == 0:
            continue
        ms = np.arange(parity, top + 1, 2)
        sq = _miller_sector(mu, nu, ns.astype(float), ms)
        keep = ms <= m_max
        block[np.ix_(ns, ms[keep])] = sq[keep].T
        tails[ns] = sq[~keep].sum(axis=0)
    return (block, tails) if with_tails else block
