"""Closed-form achievability bounds and the fountain-code rank chain.

Information-density baselines:

* the threshold-relaxation bound l <= (log2(M-1) - log2(eps) + a0)/C;
* the critical error level eps* = argmin (log2 M + a0 - log2 x)/(1-x),
  below which randomly stopping at time zero cannot improve the bound;
* the k-bit zero-error erasure bound l <= (1/C)(k + sum (2^i-1)/(2^k-2^i)).

Fountain-code route for the BEC: transmit the k message bits first, then
uniformly random nonzero GF(2) combinations; the receiver stops once the
unerased columns reach rank k and inverts with zero error.  After the
systematic phase the rank performs a Markov walk on {0..k} with a single
absorbing state, so the stopping time is discrete phase-type:

    P[rank_n = k] = 1 - alpha^T T^(n-k) 1   (n >= k),

with T upper-bidiagonal and alpha the rank distribution at time k.  The
expected stopping time has the closed form

    E[tau] = k + alpha^T (I - T)^(-1) 1
           = k + (1/C) sum_{i<k} (2^k-1)/(2^k-2^i) F(i; k, 1-p),

where F is the binomial CDF: the all-ones upper triangle of (I - T)^(-1)
turns the PMF vector alpha into exactly those CDF values.  Both routes
are implemented and must agree to 1e-10.  The binomial-CDF vector itself
is also exposed since the closed-form sums are usually written with it.

Power-of-two arithmetic is exact integer for k <= 64; the larger-k sums
switch to the stable ratio form (1 - 2^-k)/(1 - 2^(i-k)) and the matrix
route is unavailable there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelStats, binomial_cdf
from .errors import InfeasibleError
from .sdo import SdoSolution, discrete_search, log2_message_count

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

MAX_MARKOV_BITS = 64


def polyanskiy_bound(k: int, eps: float, stats: ChannelStats) -> float:
    """Average-blocklength bound (log2(M-1) - log2(eps) + a0)/C at gamma = log2((M-1)/eps)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return (log2_message_count(k) - math.log2(eps) + stats.a0) / stats.capacity


def critical_epsilon(k: int, a0: float) -> float:
    """Unique minimizer of (log2 M + a0 - log2 x)/(1 - x) on (0, 1).

    For targets at or below this level, splitting error mass into an
    immediate random stop cannot shorten the bound, so the plain
    threshold rule is already the best use of the error budget.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    top = k + a0

    def f(x: float) -> float:
        return (top - math.log2(x)) / (1.0 - x)

    a, b = 1e-12, 1.0 - 1e-12
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(220):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        if b - a < 1e-10:
            break
    return 0.5 * (a + b)


def _pow2_ratio(k: int, i: int) -> float:
    """(2^k - 1)/(2^k - 2^i), exact integers for k <= 64, ratio form beyond."""
    if k <= MAX_MARKOV_BITS:
        return ((1 << k) - 1) / ((1 << k) - (1 << i))
    return (1.0 - 2.0 ** (-k)) / (1.0 - 2.0 ** (i - k))


def devassy_bound(k: int, p: float) -> float:
    """Zero-error erasure bound (1/C)(k + sum_{i=1}^{k-1} (2^i-1)/(2^k-2^i))."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    if k <= MAX_MARKOV_BITS:
        s = sum(((1 << i) - 1) / ((1 << k) - (1 << i)) for i in range(1, k))
    else:
        s = sum(
            (2.0 ** (i - k) - 2.0 ** (-k)) / (1.0 - 2.0 ** (i - k)) for i in range(1, k)
        )
    return (k + s) / (1.0 - p)


def rank_cdf_vector(k: int, p: float) -> np.ndarray:
    """F(i; k, 1-p) for i = 0..k-1: the rank CDF right after the systematic phase."""
    return np.array([binomial_cdf(i, k, 1.0 - p) for i in range(k)])


def st_rlfc_zero_error_bound(k: int, p: float) -> float:
    """Expected stopping time of the rank decoder: k + (1/C) sum w_i F(i; k, 1-p)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    cdf = rank_cdf_vector(k, p)
    s = sum(_pow2_ratio(k, i) * cdf[i] for i in range(k))
    return k + s / (1.0 - p)


def backoff_bounds(k: int, p: float) -> tuple[float, float]:
    """Upper bounds on 1 - R/C from the p-free and the p-aware zero-error bounds."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if k <= MAX_MARKOV_BITS:
        s_dev = sum(((1 << i) - 1) / ((1 << k) - (1 << i)) for i in range(1, k))
    else:
        s_dev = sum(
            (2.0 ** (i - k) - 2.0 ** (-k)) / (1.0 - 2.0 ** (i - k)) for i in range(1, k)
        )
    old = s_dev / (k + s_dev)
    cdf = rank_cdf_vector(k, p)
    s = sum(_pow2_ratio(k, i) * cdf[i] for i in range(k))
    new = (s - k * p) / (s + k * (1.0 - p))
    return old, max(0.0, new)


@dataclass(frozen=True)
class RankMarkov:
    """Transient part of the rank walk: initial distributions and bidiagonal T.

    State index r = 0..k-1 is the rank after the systematic phase.  Two
    initial vectors are carried: the PMF P[rank_k = r] (the distribution
    that powers of T act on) and the CDF values F(r; k, 1-p) (the weights
    appearing in the closed-form expected stopping time).
    """

    k: int
    p: float
    alpha_pmf: tuple[float, ...]
    alpha_cdf: tuple[float, ...]
    stay: tuple[float, ...]
    advance: tuple[float, ...]  # advance[r], r = 0..k-1; the last entry exits T

    @property
    def transition_matrix(self) -> np.ndarray:
        t = np.zeros((self.k, self.k))
        for r in range(self.k):
            t[r, r] = self.stay[r]
            if r + 1 < self.k:
                t[r, r + 1] = self.advance[r]
        return t

    @property
    def absorption(self) -> np.ndarray:
        """(I - T) 1: per-state one-step absorption mass."""
        t = np.zeros(self.k)
        t[-1] = self.advance[-1]
        return t


def _chain_vectors(k: int, p: float):
    """(alpha_pmf, stay, advance) for any k; ratio form when 2^k overflows exact use."""
    if k <= MAX_MARKOV_BITS:
        denom = (1 << k) - 1
        stay = tuple(p + (1.0 - p) * ((1 << r) - 1) / denom for r in range(k))
        advance = tuple((1.0 - p) * ((1 << k) - (1 << r)) / denom for r in range(k))
    else:
        scale = 1.0 - 2.0 ** (-k)
        stay = tuple(
            p + (1.0 - p) * (2.0 ** (r - k) - 2.0 ** (-k)) / scale for r in range(k)
        )
        advance = tuple(
            (1.0 - p) * (1.0 - 2.0 ** (r - k)) / scale for r in range(k)
        )
    cdf = rank_cdf_vector(k, p)
    pmf = np.diff(cdf, prepend=0.0)
    return tuple(float(x) for x in pmf), stay, advance


def rank_markov(k: int, p: float) -> RankMarkov:
    """Build the rank chain: stay r w.p. p + (1-p)(2^r-1)/(2^k-1), else advance."""
    if not 1 <= k <= MAX_MARKOV_BITS:
        raise ValueError(f"matrix route supports 1 <= k <= {MAX_MARKOV_BITS}, got {k}")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    pmf, stay, advance = _chain_vectors(k, p)
    cdf = rank_cdf_vector(k, p)
    return RankMarkov(k, p, pmf, tuple(float(c) for c in cdf), stay, advance)


def rank_survival(mc: RankMarkov, steps: int) -> float:
    """alpha_pmf^T T^steps 1 by iterated vector products (no matrix powers)."""
    v = np.array(mc.alpha_pmf)
    stay = np.array(mc.stay)
    adv = np.array(mc.advance[:-1])
    for _ in range(steps):
        nxt = v * stay
        nxt[1:] += v[:-1] * adv
        v = nxt
    return float(v.sum())


def rank_full_prob(mc: RankMarkov, n: int) -> float:
    """P[rank at time n equals k]: zero before the systematic phase completes."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n < mc.k:
        return 0.0
    return 1.0 - rank_survival(mc, n - mc.k)


def rank_full_prob_range(mc: RankMarkov, n_max: int) -> np.ndarray:
    """P[rank_n = k] for n = 0..n_max in one sweep."""
    return full_rank_curve(mc.k, mc.p, n_max)


def full_rank_curve(k: int, p: float, n_max: int) -> np.ndarray:
    """P[rank_n = k] for n = 0..n_max; unlike the matrix route, valid for any k."""
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    pmf, stay, advance = _chain_vectors(k, p)
    out = np.zeros(n_max + 1)
    if n_max < k:
        return out
    v = np.array(pmf)
    stay_v = np.array(stay)
    adv_v = np.array(advance[:-1])
    out[k] = 1.0 - v.sum()
    for n in range(k + 1, n_max + 1):
        nxt = v * stay_v
        nxt[1:] += v[:-1] * adv_v
        v = nxt
        out[n] = 1.0 - v.sum()
    return out


def st_rlfc_zero_error_bound_markov(k: int, p: float) -> float:
    """E[tau] = k + alpha^T (I-T)^(-1) 1 via the explicit triangular inverse."""
    mc = rank_markov(k, p)
    denom = (1 << k) - 1
    diag = np.array([denom / ((1 << k) - (1 << j)) for j in range(k)]) / (1.0 - p)
    inv = np.triu(np.ones((k, k))) * diag  # row i, col j: diag_j for j >= i
    return k + float(np.array(mc.alpha_pmf) @ inv @ np.ones(k))


def st_rlfc_finite_bound(mc: RankMarkov, times) -> tuple[float, float]:
    """Blocklength and error bounds of the rank decoder at fixed decoding times."""
    times = [int(t) for t in times]
    if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("decoding times must be ascending positive integers")
    probs = rank_full_prob_range(mc, times[-1])
    l_bound = times[-1] + sum(
        (a - b) * probs[a] for a, b in zip(times, times[1:])
    )
    eps_bound = 1.0 - probs[times[-1]]
    return l_bound, eps_bound


def st_rlfc_sdo(k: int, p: float, m: int, eps: float,
                max_horizon: int = 10**6) -> SdoSolution:
    """Optimal decoding times for the rank decoder: minimize the blocklength
    bound subject to 1 - P[rank = k at the last time] <= eps.

    The tail P[rank_n = k] is nondecreasing, so this is the discrete
    search with no threshold loop.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    target = 1.0 - eps
    horizon = min(max(4 * k, int(4.0 * (k + 10.0) / (1.0 - p))), max_horizon)
    while True:
        probs = full_rank_curve(k, p, horizon)
        if probs[-1] >= target:
            break
        if horizon >= max_horizon:
            raise InfeasibleError(
                f"rank process does not reach 1 - eps within {max_horizon} uses"
            )
        horizon = min(2 * horizon, max_horizon)
    times, value = discrete_search(probs, target, m)
    return SdoSolution(tuple(float(t) for t in times), None, value, None, None)


def apply_stop_at_zero(l_zero_error: float, eps: float) -> float:
    """Trade error for length: stop immediately w.p. eps, scaling the bound by 1-eps."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    return l_zero_error * (1.0 - eps)
