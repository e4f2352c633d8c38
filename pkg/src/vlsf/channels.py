"""Binary-input channel models and threshold-crossing tail evaluators.

For each channel the object of interest is

    F_gamma(n) ~ P[ iota(X^n; Y^n) >= gamma ]

under the uniform input, where iota is the per-symbol information density
in bits.  The per-channel strategies differ:

* BI-AWGN: iota = 1 - log2(1 + exp(-2 X Y)) is continuous, so the tail is
  approximated by a moderate-deviation branch for n <= n_star and an
  order-5 Edgeworth branch for n > n_star, where n_star < gamma/C is the
  largest point at which the two branches agree with common value below
  one half.  The truncated Edgeworth series oscillates around zero below
  that point, which is exactly why the switch exists.

* BSC: iota is a two-valued random walk, so the tail is an exact binomial
  CDF.  As a function of n it zig-zags: it rises only when the admissible
  flip count increments, at n = ceil((gamma + i*log2((1-p)/p)) / log2(2-2p)),
  and strictly falls in between.  These local maximizers are exposed
  because optimal decoding times for the BSC live on them.

* BEC: iota in {0, 1} bits, so the tail is an exact binomial CDF in the
  erasure count (strictly increasing in n).  For erasure rates where the
  lattice corrections are tame (p >= 0.2 by default) a differentiable
  surrogate is available: the order-5 continuity-corrected Edgeworth tail
  evaluated at the fixed corrected threshold gamma_plus = ceil(gamma) - 1/2,
  defined for real n, which the gap-constrained optimizer needs.

All probabilities are base-2 / bits; binomial CDFs accumulate in the log
domain so deep tails below 1e-300 survive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln, log_ndtr, logsumexp

from .cumulants import (
    CumulantVector,
    MomentVector,
    cumulants_from_moments,
    edgeworth_pj_coefficients,
    edgeworth_series_terms,
    hermite_values,
    polyder,
    polyval,
)
from .errors import InfeasibleError, QuadratureError
from .expansions import (
    bernoulli_number,
    cramer_series3,
    normal_pdf,
    normal_tail,
)

LN2 = math.log(2.0)

# floor/ceil guard against representation error in exact-count thresholds
_INDEX_FUZZ = 1e-9

DEFAULT_CUMULANT_ORDER = 7
DEFAULT_EXPANSION_ORDER = 5
BEC_SMOOTH_THRESHOLD = 0.2
MAX_INVERSE_TIME = 10**6


@dataclass(frozen=True)
class BiAwgn:
    """Binary-input AWGN channel; snr is the linear power P (inputs +-sqrt(P))."""

    snr: float

    def __post_init__(self):
        if self.snr <= 0.0:
            raise ValueError(f"snr must be positive, got {self.snr}")

    @classmethod
    def from_db(cls, snr_db: float) -> "BiAwgn":
        return cls(10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class Bsc:
    """Binary symmetric channel with crossover probability p in (0, 1/2)."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 0.5:
            raise ValueError(f"crossover must be in (0, 1/2), got {self.p}")


@dataclass(frozen=True)
class Bec:
    """Binary erasure channel with erasure probability p in [0, 1)."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"erasure probability must be in [0, 1), got {self.p}")


Channel = BiAwgn | Bsc | Bec


@dataclass(frozen=True)
class ChannelStats:
    """Capacity, dispersion, peak information density and iota cumulants (bits)."""

    capacity: float
    dispersion: float
    a0: float
    iota_cumulants: CumulantVector

    def __post_init__(self):
        if self.capacity <= 0.0:
            raise ValueError("capacity must be positive")
        if self.dispersion < 0.0:
            raise ValueError("dispersion must be nonnegative")
        if self.a0 < self.capacity - 1e-12:
            raise ValueError("a0 cannot be below capacity")


def _biawgn_moments(power: float, order: int) -> list[float]:
    """Noncentral moments of iota by quadrature over the noise of X*Y = P + sqrt(P) Z."""
    root_p = math.sqrt(power)

    def iota(z: float) -> float:
        return 1.0 - np.logaddexp(0.0, -2.0 * (power + root_p * z)) / LN2

    moments = []
    for j in range(1, order + 1):
        val, err = integrate.quad(
            lambda z: iota(z) ** j * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi),
            -np.inf,
            np.inf,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=300,
        )
        if err > 1e-10:
            raise QuadratureError(
                f"moment {j} quadrature residual {err:.2e} exceeds 1e-10"
            )
        moments.append(val)
    return moments


def _two_point_moments(values: tuple[float, float], probs: tuple[float, float], order: int):
    return [sum(pr * v**j for v, pr in zip(values, probs)) for j in range(1, order + 1)]


@lru_cache(maxsize=64)
def channel_stats(ch: Channel, order: int = DEFAULT_CUMULANT_ORDER) -> ChannelStats:
    """Capacity C, dispersion V, sup iota and cumulants of iota(X1;Y1) in bits."""
    if order < 2:
        raise ValueError("cumulant order must be at least 2")
    if isinstance(ch, BiAwgn):
        moments = _biawgn_moments(ch.snr, order)
        a0 = 1.0
    elif isinstance(ch, Bsc):
        p = ch.p
        hi = math.log2(2.0 - 2.0 * p)      # iota when the bit survives
        lo = math.log2(2.0 * p)            # iota when the bit flips
        moments = _two_point_moments((hi, lo), (1.0 - p, p), order)
        a0 = hi
    elif isinstance(ch, Bec):
        p = ch.p
        moments = _two_point_moments((1.0, 0.0), (1.0 - p, p), order)
        a0 = 1.0
    else:
        raise TypeError(f"unsupported channel {ch!r}")
    kappas = cumulants_from_moments(MomentVector(tuple(moments)))
    return ChannelStats(
        capacity=kappas.kappa(1),
        dispersion=kappas.kappa(2),
        a0=a0,
        iota_cumulants=kappas,
    )


def binomial_cdf(c: int, n: int, p: float) -> float:
    """P[Binomial(n, p) <= c] by log-domain summation."""
    if c < 0:
        return 0.0
    if c >= n:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    i = np.arange(0, c + 1)
    log_terms = (
        gammaln(n + 1)
        - gammaln(i + 1)
        - gammaln(n - i + 1)
        + i * math.log(p)
        + (n - i) * math.log1p(-p)
    )
    return float(min(1.0, math.exp(logsumexp(log_terms))))


def tail_exact_bsc(n: int, gamma: float, p: float) -> float:
    """Exact P[iota(X^n;Y^n) >= gamma] for the BSC: binomial CDF in the flip count."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if n <= 0:
        return 0.0
    step = math.log2((1.0 - p) / p)
    c_max = math.floor((n * math.log2(2.0 - 2.0 * p) - gamma) / step + _INDEX_FUZZ)
    return binomial_cdf(c_max, n, p)


def tail_exact_bec(n: int, gamma: float, p: float) -> float:
    """Exact P[iota(X^n;Y^n) >= gamma] for the BEC: binomial CDF in the erasure count."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if n <= 0:
        return 0.0
    c_max = math.floor(n - gamma + _INDEX_FUZZ)
    return binomial_cdf(c_max, n, p)


def bsc_local_maximizers(gamma: float, p: float, n_max: int) -> list[int]:
    """Ascending local maximizers of the BSC tail, ceil((gamma + i*step)/rise) <= n_max."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if not 0.0 < p < 0.5:
        raise ValueError(f"crossover must be in (0, 1/2), got {p}")
    rise = math.log2(2.0 - 2.0 * p)
    step = math.log2((1.0 - p) / p)
    out = []
    i = 0
    while True:
        alpha = math.ceil((gamma + i * step) / rise - _INDEX_FUZZ)
        if alpha > n_max:
            break
        out.append(max(alpha, 1))
        i += 1
    return out


class TailModel:
    """Channel- and gamma-specific evaluator of F_gamma(n).

    Continuous models expose a derivative and log-domain forms; discrete
    models are exact on integer decoding times.
    """

    mode: str
    channel: Channel
    gamma: float
    n_star: float | None = None

    def F(self, n: float) -> float:
        raise NotImplementedError

    def f(self, n: float) -> float:
        raise NotImplementedError

    def log_F(self, n: float) -> float:
        raise NotImplementedError

    def log_f(self, n: float) -> float:
        raise NotImplementedError


class DiscreteTailModel(TailModel):
    mode = "discrete"

    def __init__(self, channel: Channel, gamma: float, tail_fn):
        self.channel = channel
        self.gamma = gamma
        self._tail_fn = tail_fn
        self._memo: dict[int, float] = {}

    def _as_index(self, n: float) -> int:
        ni = int(round(n))
        if abs(n - ni) > 1e-9:
            raise ValueError(f"discrete tail model is defined on integers, got {n}")
        return ni

    def F(self, n: float) -> float:
        ni = self._as_index(n)
        if ni <= 0:
            return 0.0
        if ni not in self._memo:
            self._memo[ni] = self._tail_fn(ni)
        return self._memo[ni]

    def tails_upto(self, n_max: int) -> np.ndarray:
        """F on 0..n_max as an array (index = decoding time)."""
        return np.array([self.F(n) for n in range(n_max + 1)])

    def f(self, n: float) -> float:
        raise TypeError("discrete tail model has no derivative")

    def log_F(self, n: float) -> float:
        v = self.F(n)
        return math.log(v) if v > 0.0 else -math.inf

    def log_f(self, n: float) -> float:
        raise TypeError("discrete tail model has no derivative")


class AwgnTailModel(TailModel):
    """Two-branch smooth tail for the BI-AWGN channel.

    Below the switch point the moderate-deviation form
    Q(x) exp{(x^3/sqrt(n)) L(x/sqrt(n))} is used; above it the order-5
    Edgeworth complement Q(x) - phi(x) sum_j n^(-j/2) p_j(x), with
    x(n) = (gamma - n C)/sqrt(n V).  Both branches carry exact log forms
    and analytic derivatives, so the optimizer's ratio recursion stays
    stable when F and f underflow together at small n.
    """

    mode = "continuous"

    def __init__(self, channel: BiAwgn, gamma: float, stats: ChannelStats,
                 order: int = DEFAULT_EXPANSION_ORDER):
        self.channel = channel
        self.gamma = gamma
        self.stats = stats
        self.order = order
        self.capacity = stats.capacity
        self.dispersion = stats.dispersion
        kbar = stats.iota_cumulants.centered().normalized()
        self._pj = [edgeworth_pj_coefficients(j, kbar) for j in range(1, order + 1)]
        self._pj_der = [polyder(c) for c in self._pj]
        self._cramer = cramer_series3(stats.iota_cumulants)
        self.n_star = self._find_switch()

    # -- standardized threshold coordinate
    def _x(self, n: float) -> float:
        return (self.gamma - n * self.capacity) / math.sqrt(n * self.dispersion)

    def _x_deriv(self, n: float) -> float:
        return -(self.gamma + n * self.capacity) / (2.0 * n * math.sqrt(n * self.dispersion))

    # -- Edgeworth branch
    def _edgeworth_sum(self, n: float, x: float) -> float:
        return sum(n ** (-0.5 * (j + 1)) * polyval(c, x) for j, c in enumerate(self._pj))

    def _edgeworth_tail(self, n: float) -> float:
        x = self._x(n)
        if x <= -38.0:  # the Gaussian weight of every correction has underflowed
            return 1.0
        if x >= 38.0:
            return 0.0
        return normal_tail(x) - normal_pdf(x) * self._edgeworth_sum(n, x)

    def _edgeworth_tail_deriv(self, n: float) -> float:
        x = self._x(n)
        if abs(x) >= 38.0:
            return 0.0
        xd = self._x_deriv(n)
        s = self._edgeworth_sum(n, x)
        s_n = sum(
            -0.5 * (j + 1) * n ** (-0.5 * (j + 1) - 1.0) * polyval(c, x)
            for j, c in enumerate(self._pj)
        )
        s_x = sum(n ** (-0.5 * (j + 1)) * polyval(c, x) for j, c in enumerate(self._pj_der))
        return -normal_pdf(x) * (xd * (1.0 - x * s) + s_n + xd * s_x)

    # -- moderate-deviation branch
    def _petrov_log(self, n: float) -> float:
        x = self._x(n)
        u = x / math.sqrt(n)
        return float(log_ndtr(-x)) + n * u**3 * self._cramer(u)

    def _petrov_dlog(self, n: float) -> float:
        x = self._x(n)
        xd = self._x_deriv(n)
        u = x / math.sqrt(n)
        ud = -self.gamma / (n * n * math.sqrt(self.dispersion))
        lam, dlam = self._cramer(u), self._cramer.a1 + 2.0 * self._cramer.a2 * u
        g_n = u**3 * lam + n * (3.0 * u**2 * lam + u**3 * dlam) * ud
        hazard = math.exp(-0.5 * x * x - float(log_ndtr(-x))) / math.sqrt(2.0 * math.pi)
        return -xd * hazard + g_n

    def _find_switch(self) -> float:
        limit = self.gamma / self.capacity

        def diff(n: float) -> float:
            return self._edgeworth_tail(n) - math.exp(self._petrov_log(n))

        hi = None
        n = max(math.floor(limit), 1)
        d_hi = diff(n)
        while n > 1:
            d_lo = diff(n - 1)
            if d_lo == 0.0 or (d_lo < 0.0) != (d_hi < 0.0):
                if (self._edgeworth_tail(n) < 0.5 and self._edgeworth_tail(n - 1) < 0.5):
                    hi = n
                    break
            d_hi = d_lo
            n -= 1
        if hi is None:
            warnings.warn(
                "no Edgeworth/moderate-deviation crossing below gamma/C; "
                "switching at gamma/C",
                RuntimeWarning,
            )
            return limit
        lo = hi - 1.0
        a, b = float(lo), float(hi)
        sign_a = diff(a) < 0.0
        for _ in range(60):
            mid = 0.5 * (a + b)
            if (diff(mid) < 0.0) == sign_a:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    def F(self, n: float) -> float:
        if n <= 0.0:
            return 0.0
        if n <= self.n_star:
            return math.exp(self._petrov_log(n))
        return self._edgeworth_tail(n)

    def log_F(self, n: float) -> float:
        if n <= 0.0:
            return -math.inf
        if n <= self.n_star:
            return self._petrov_log(n)
        v = self._edgeworth_tail(n)
        return math.log(v) if v > 0.0 else -math.inf

    def f(self, n: float) -> float:
        if n <= 0.0:
            return 0.0
        if n <= self.n_star:
            return math.exp(self._petrov_log(n)) * self._petrov_dlog(n)
        return self._edgeworth_tail_deriv(n)

    def log_f(self, n: float) -> float:
        if n <= 0.0:
            return -math.inf
        if n <= self.n_star:
            dlog = self._petrov_dlog(n)
            if dlog <= 0.0:
                return -math.inf
            return self._petrov_log(n) + math.log(dlog)
        v = self._edgeworth_tail_deriv(n)
        return math.log(v) if v > 0.0 else -math.inf


class BecSmoothTailModel(TailModel):
    """Differentiable BEC tail on real n via the corrected Edgeworth series.

    The tail of the unerased count is evaluated at the fixed corrected
    threshold gamma_plus = ceil(gamma) - 1/2, i.e. at the standardized
    point z_plus(n) = (gamma_plus - n C)/(sigma sqrt(n)) with
    Sheppard-adjusted, re-standardized cumulant weights.  The derivative
    is a central difference on a smooth function (the n-dependence also
    flows through the adjusted cumulants, which makes the analytic form
    unrewarding).
    """

    mode = "continuous"

    def __init__(self, channel: Bec, gamma: float, stats: ChannelStats,
                 order: int = DEFAULT_EXPANSION_ORDER):
        self.channel = channel
        self.gamma = gamma
        self.stats = stats
        self.order = order
        self.capacity = stats.capacity
        self.gamma_plus = math.ceil(gamma - _INDEX_FUZZ) - 0.5
        self._sigma = math.sqrt(stats.dispersion)
        kbar = stats.iota_cumulants.centered().normalized()
        # normalized Sheppard corrections eps_j such that lam_j = kbar_j - eps_j/n
        ratio = 1.0 / self._sigma
        self._kbar = kbar.kappas
        self._eps = tuple(
            0.0 if j == 1 else ratio**j * bernoulli_number(j) / j
            for j in range(1, kbar.order + 1)
        )
        self._terms = edgeworth_series_terms(order)
        self._max_degree = max(t[1] for t in self._terms)

    def _pieces(self, n: float) -> tuple[float, float]:
        """(z_star, correction sum) of the adjusted, re-standardized series at n.

        Evaluated through the precomputed partition/Hermite structure;
        rebuilding polynomial coefficients per call would dominate the
        optimizer's runtime since the adjusted cumulants move with n.
        """
        # the adjusted variance crosses zero for n below eps_2; such times
        # carry no probability mass and only appear as bracketing probes
        lam2 = max(1.0 - self._eps[1] / n, 1e-9)
        scale = math.sqrt(lam2)
        z_plus = (self.gamma_plus - n * self.capacity) / (self._sigma * math.sqrt(n))
        z_star = z_plus / scale
        # unit-variance cumulants of the adjusted vector, orders 3..J
        mu = [0.0, 0.0, 1.0]
        for j in range(3, len(self._kbar) + 1):
            mu.append((self._kbar[j - 1] - self._eps[j - 1] / n) / scale**j)
        he = hermite_values(self._max_degree, z_star)
        s = 0.0
        for j, degree, base, powers in self._terms:
            weight = base
            for order, mult in powers:
                weight *= mu[order] ** mult
            s -= n ** (-0.5 * j) * weight * he[degree]
        return z_star, s

    def F(self, n: float) -> float:
        if n <= 0.0:
            return 0.0
        z_star, s = self._pieces(n)
        return normal_tail(z_star) - normal_pdf(z_star) * s

    def log_F(self, n: float) -> float:
        if n <= 0.0:
            return -math.inf
        z_star, s = self._pieces(n)
        log_q = float(log_ndtr(-z_star))
        hazard = math.exp(-0.5 * z_star * z_star - log_q) / math.sqrt(2.0 * math.pi)
        ratio = hazard * s
        if ratio >= 1.0:
            return -math.inf
        return log_q + math.log1p(-ratio)

    def _step(self, n: float) -> float:
        return min(1e-5 * max(1.0, n), 0.45 * n)

    def f(self, n: float) -> float:
        if n <= 0.0:
            return 0.0
        h = self._step(n)
        lo, hi = self.F(n - h), self.F(n + h)
        if lo > 1e-280:
            return (hi - lo) / (2.0 * h)
        dlog = (self.log_F(n + h) - self.log_F(n - h)) / (2.0 * h)
        if not math.isfinite(dlog) or dlog <= 0.0:
            return 0.0
        return math.exp(self.log_F(n)) * dlog

    def log_f(self, n: float) -> float:
        if n <= 0.0:
            return -math.inf
        h = self._step(n)
        dlog = (self.log_F(n + h) - self.log_F(n - h)) / (2.0 * h)
        if not math.isfinite(dlog) or dlog <= 0.0:
            return -math.inf
        return self.log_F(n) + math.log(dlog)


def make_tail_model(
    ch: Channel,
    gamma: float,
    *,
    bec_threshold: float = BEC_SMOOTH_THRESHOLD,
    order: int = DEFAULT_EXPANSION_ORDER,
) -> TailModel:
    """Build the per-channel F_gamma evaluator with the default selection rules."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if isinstance(ch, BiAwgn):
        return AwgnTailModel(ch, gamma, channel_stats(ch), order)
    if isinstance(ch, Bsc):
        return DiscreteTailModel(ch, gamma, lambda n: tail_exact_bsc(n, gamma, ch.p))
    if isinstance(ch, Bec):
        if ch.p < bec_threshold:
            return DiscreteTailModel(ch, gamma, lambda n: tail_exact_bec(n, gamma, ch.p))
        return BecSmoothTailModel(ch, gamma, channel_stats(ch), order)
    raise TypeError(f"unsupported channel {ch!r}")


def tail_model_inverse(tm: TailModel, target: float):
    """Smallest time with F >= target (discrete) or the root F(n) = target (continuous)."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    if tm.mode == "discrete":
        n = 1
        while n <= MAX_INVERSE_TIME:
            if tm.F(n) >= target:
                return n
            n += 1
        raise InfeasibleError(f"no integer time up to {MAX_INVERSE_TIME} reaches {target}")
    hi = max(4.0, float(tm.gamma))
    while tm.F(hi) < target:
        hi *= 2.0
        if hi > MAX_INVERSE_TIME:
            raise InfeasibleError(f"tail never reaches {target} below {MAX_INVERSE_TIME}")
    lo = hi / 2.0
    while tm.F(lo) > target:
        lo /= 2.0
        if lo < 1e-12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tm.F(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    result = 0.5 * (lo + hi)
    if abs(tm.F(result) - target) > 1e-9:
        raise InfeasibleError(
            f"inverse residual {abs(tm.F(result) - target):.2e} exceeds 1e-9 at n={result}"
        )
    return result
