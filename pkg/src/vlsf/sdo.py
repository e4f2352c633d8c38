"""Decoding-time optimizers for the average-blocklength upper bound.

The quantity minimized over decoding times n_1 < ... < n_m is

    N(n_1..n_m) = n_m + sum_{i<m} (n_i - n_{i+1}) F(n_i),

subject to F(n_m) >= 1 - eps + (M-1) 2^(-gamma) and unit minimum gaps.
Three solvers:

* gap-constrained recursion (continuous, differentiable F): the KKT
  conditions collapse to a forward recursion from a trial n_1,

      n_{i+1} = n_i + max{1, (F(n_i) - F(n_{i-1}) - lam_{i-1}) / f(n_i)},
      lam_i   = f(n_i) * max{0, 1 - (F(n_i) - F(n_{i-1}) - lam_{i-1})/f(n_i)},

  closed by an outer bisection on n_1 until the recursion lands on
  n_m = F^{-1}(target).  The recursion is evaluated in ratio form
  (quotients of log-domain F and f), since both vanish together at small
  times and the plain form would divide 0 by 0.

* unconstrained recursion: the same without the unit-gap clamp; kept as
  a baseline, its late gaps dip below one when m is large.

* discrete search (any integer-indexed tail, including zig-zag ones):
  a memoized recursion over (position, previous time, current time)
  states, pruned by two exact necessary conditions -- each time must
  weakly dominate every tail value since its predecessor, and each
  successor must lie in the interval that one-coordinate exchange
  arguments leave open.  Ties resolve to the lexicographically smallest
  tuple.

The outer threshold search ("two-step minimization") sweeps the error
split delta in (0,1), where gamma = log2((M-1)/(delta*eps)), on a
geometric grid refined by golden section.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channels import (
    Bsc,
    Channel,
    TailModel,
    bsc_local_maximizers,
    channel_stats,
    make_tail_model,
    tail_model_inverse,
)
from .errors import ConditionError, InfeasibleError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def log2_message_count(k: int) -> float:
    """log2(M - 1) for M = 2^k, exact in the log domain for any k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return k + math.log1p(-(2.0 ** (-k))) / math.log(2.0)


def gamma_from_delta(k: int, eps: float, delta: float) -> float:
    """Threshold gamma = log2((M-1)/(delta*eps)) for the error split delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return log2_message_count(k) - math.log2(delta * eps)


@dataclass(frozen=True)
class SdoProblem:
    """One instance of the decoding-time program at a fixed threshold."""

    m: int
    k: int
    eps: float
    delta: float | None
    tail: TailModel

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")

    @property
    def gamma(self) -> float:
        return self.tail.gamma

    @property
    def target(self) -> float:
        """Required tail mass at the last decoding time, 1 - eps + (M-1)2^(-gamma)."""
        union_term = 2.0 ** (log2_message_count(self.k) - self.gamma)
        return 1.0 - self.eps + union_term


@dataclass(frozen=True)
class SdoSolution:
    """Optimized decoding times with the certificate data to recheck them."""

    times: tuple[float, ...]
    multipliers: tuple[float, ...] | None
    objective: float
    gamma: float | None
    delta: float | None

    @property
    def m(self) -> int:
        return len(self.times)


def objective_value(times, tail: TailModel) -> float:
    """N = n_m + sum_{i<m} (n_i - n_{i+1}) F(n_i)."""
    times = list(times)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("decoding times must be strictly ascending")
    total = times[-1]
    for a, b in zip(times, times[1:]):
        total += (a - b) * tail.F(a)
    return total


_TIME_CEILING = 1e12


def _exp_cap(x: float) -> float:
    return math.inf if x > 700.0 else math.exp(x)


def _recursion(tail: TailModel, n1: float, m: int, constrained: bool):
    """Forward recursion from trial n1; returns (times, ratio multipliers).

    Trial values far from the landing solution can push F to saturation
    (derivative zero); steps then saturate at a large ceiling so the
    outer search still sees a clean overshoot instead of NaNs.
    """
    times = [n1]
    lam_r = [0.0]  # lam_{i}^{(r)} with lam_0 = 0
    log_f_prev = -math.inf
    log_fp_prev = -math.inf  # log F(n_{i-1})
    for _ in range(m - 1):
        n_i = times[-1]
        log_fi = tail.log_F(n_i)
        log_di = tail.log_f(n_i)
        if log_di == -math.inf:
            g = math.inf
        else:
            # ratios F(n_i)/f(n_i), F(n_{i-1})/f(n_i), f(n_{i-1})/f(n_i);
            # a ratio overflowing the exponent range means the derivative
            # is dead there, which reads as an unbounded step
            g = _exp_cap(log_fi - log_di) - _exp_cap(log_fp_prev - log_di)
            g -= lam_r[-1] * _exp_cap(log_f_prev - log_di)
            if math.isnan(g):
                g = math.inf
        if constrained:
            step = max(1.0, g)
            lam_r.append(max(0.0, 1.0 - g) if math.isfinite(g) else 0.0)
        else:
            step = g
            lam_r.append(0.0)
        times.append(min(n_i + step, max(n_i, _TIME_CEILING)))
        log_fp_prev = log_fi
        log_f_prev = log_di
    return times, lam_r[1:]


def _check_hypotheses(tail: TailModel, n_bar: float, m: int, strict: bool) -> None:
    """Validity conditions of the recursion: n_bar > m-1 and sum_i f(x-i) < 1."""
    failures = []
    if not n_bar > m - 1:
        failures.append(f"n_bar = {n_bar:.6g} must exceed m - 1 = {m - 1}")
    if m >= 2:
        # locate the mode of f, then probe the derivative-sum condition
        # around it and beyond the feasibility point
        grid = np.linspace(max(1e-3, 0.02 * n_bar), n_bar + m, 160)
        dens = [tail.f(float(x)) for x in grid]
        x_infl = float(grid[int(np.argmax(dens))])
        probes = np.concatenate(
            [np.linspace(x_infl, x_infl + m - 1, 65), np.linspace(n_bar, n_bar + m - 1, 65)]
        )
        worst = 0.0
        for x in probes:
            worst = max(worst, sum(tail.f(float(x) - i) for i in range(1, m)))
        if worst >= 1.0:
            failures.append(
                f"sum of f over trailing unit gaps reaches {worst:.4f} >= 1"
            )
    if failures:
        msg = "; ".join(failures)
        if strict:
            raise ConditionError(msg)
        warnings.warn(msg, RuntimeWarning)


def gap_constrained_sdo(prob: SdoProblem, *, strict: bool = False) -> SdoSolution:
    """Real-valued decoding times with unit minimum gaps (KKT recursion + bisection)."""
    tail = prob.tail
    if tail.mode != "continuous":
        raise TypeError("gap-constrained solver needs a continuous tail model")
    n_bar = tail_model_inverse(tail, prob.target)
    if prob.m == 1:
        return SdoSolution((n_bar,), (), n_bar, prob.gamma, prob.delta)
    _check_hypotheses(tail, n_bar, prob.m, strict)
    times, lam_r = _solve_first_time(tail, n_bar, prob.m, constrained=True)
    times[-1] = n_bar
    multipliers = tuple(
        lr * tail.f(n_i) for lr, n_i in zip(lam_r, times[:-1])
    )
    return SdoSolution(tuple(times), multipliers, objective_value(times, tail),
                       prob.gamma, prob.delta)


def unconstrained_sdo(prob: SdoProblem, *, strict: bool = False) -> SdoSolution:
    """Baseline recursion without the unit-gap clamp; late gaps may shrink below one."""
    tail = prob.tail
    if tail.mode != "continuous":
        raise TypeError("unconstrained solver needs a continuous tail model")
    n_bar = tail_model_inverse(tail, prob.target)
    if prob.m == 1:
        return SdoSolution((n_bar,), (), n_bar, prob.gamma, prob.delta)
    _check_hypotheses(tail, n_bar, prob.m, strict)
    times, _ = _solve_first_time(tail, n_bar, prob.m, constrained=False)
    times[-1] = n_bar
    return SdoSolution(tuple(times), None, objective_value(times, tail),
                       prob.gamma, prob.delta)


def _solve_first_time(tail: TailModel, n_bar: float, m: int, constrained: bool):
    """Bisection on n_1 until the recursion lands on n_bar."""

    def land(n1: float) -> float:
        return _recursion(tail, n1, m, constrained)[0][-1]

    # largest admissible trial first time: below it by unit gaps when
    # constrained, just below n_bar otherwise
    hi = n_bar - (m - 1) if constrained else n_bar * (1.0 - 1e-9)
    if hi <= 0.0:
        raise InfeasibleError(f"cannot place {m} unit-separated times below {n_bar:.4g}")
    lo = hi
    while land(lo) > n_bar and lo > 1e-9:
        lo *= 0.5
    land_lo, land_hi = land(lo), land(hi)
    if not (land_lo <= n_bar + 1e-12 and n_bar <= land_hi + 1e-12 and land_lo <= land_hi):
        n1 = _golden_landing(land, lo, hi, n_bar)
    else:
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if land(mid) < n_bar:
                a = mid
            else:
                b = mid
            if b - a < 1e-14 * max(1.0, b):
                break
        n1 = 0.5 * (a + b)
    times, lam_r = _recursion(tail, n1, m, constrained)
    if not abs(times[-1] - n_bar) <= 1e-6 * max(1.0, n_bar):
        n1 = _golden_landing(land, lo, hi, n_bar)
        times, lam_r = _recursion(tail, n1, m, constrained)
        if not abs(times[-1] - n_bar) <= 1e-6 * max(1.0, n_bar):
            raise InfeasibleError(
                f"recursion cannot land on n_bar = {n_bar:.6g} "
                f"(best landing {times[-1]:.6g})"
            )
    return times, lam_r


def _golden_landing(land, lo: float, hi: float, n_bar: float) -> float:
    """Golden-section fallback minimizing the landing error |land(n1) - n_bar|."""

    def err(n1: float) -> float:
        return abs(land(n1) - n_bar)

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = err(c), err(d)
    for _ in range(300):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = err(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = err(d)
        if b - a < 1e-14 * max(1.0, b):
            break
    return 0.5 * (a + b)


def kkt_report(sol: SdoSolution, tail: TailModel, target: float) -> dict:
    """Stationarity, complementary slackness and primal residuals of a solution."""
    times = sol.times
    m = len(times)
    lam = (0.0,) + (sol.multipliers or (0.0,) * (m - 1))
    F = [tail.F(t) for t in times]
    f = [tail.f(t) for t in times]
    stationarity = []
    slackness = []
    gaps = []
    for i in range(1, m):  # condition linking (n_{i-1}, n_i, n_{i+1}) at index i
        tail_below = F[i - 2] if i >= 2 else 0.0
        resid = F[i - 1] - tail_below - (times[i] - times[i - 1]) * f[i - 1] + lam[i] - lam[i - 1]
        stationarity.append(resid)
        gaps.append(times[i] - times[i - 1])
        slackness.append(lam[i] * (times[i] - times[i - 1] - 1.0))
    f_last = f[-1]
    nu = (1.0 - (F[-2] if m >= 2 else 0.0) - lam[m - 1]) / f_last if f_last > 0 else math.inf
    return {
        "stationarity": stationarity,
        "slackness": slackness,
        "gaps": gaps,
        "multipliers": lam[1:],
        "nu": nu,
        "feasibility": tail.F(times[-1]) - target,
    }


def certify_kkt(sol: SdoSolution, tail: TailModel, target: float,
                stat_tol: float = 1e-6, gap_tol: float = 1e-9) -> tuple[bool, dict]:
    """Check the first-order certificate of a gap-constrained solution."""
    rep = kkt_report(sol, tail, target)
    ok = all(g >= 1.0 - gap_tol for g in rep["gaps"])
    ok &= rep["feasibility"] >= -1e-9
    ok &= rep["nu"] >= -1e-9
    for resid, lam_i, gap in zip(rep["stationarity"], rep["multipliers"], rep["gaps"]):
        if lam_i > 1e-9:
            ok &= (gap - 1.0) <= 1e-6 and abs(resid) <= stat_tol
        else:
            ok &= abs(resid) <= stat_tol
    return bool(ok), rep


class _RangeMax:
    """Sparse table for max of F over half-open integer windows."""

    def __init__(self, values: np.ndarray):
        n = len(values)
        levels = max(1, n.bit_length())
        table = [np.asarray(values, dtype=float)]
        width = 1
        for _ in range(1, levels):
            prev = table[-1]
            if len(prev) <= width:
                break
            table.append(np.maximum(prev[:-width], prev[width:]))
            width *= 2
        self._table = table

    def query(self, a: int, b: int) -> float:
        """max over indices [a, b); -inf when empty."""
        if b <= a:
            return -math.inf
        span = b - a
        level = span.bit_length() - 1
        width = 1 << level
        t = self._table[level]
        return float(max(t[a], t[b - width]))


def discrete_search(tails: np.ndarray, target: float, m: int,
                    candidates=None) -> tuple[tuple[int, ...], float]:
    """Optimal integer decoding times for a tabulated tail (index = time).

    tails[n] approximates P[tail event at time n]; tails[0] must be 0 and
    the target must be below 1, which every error budget eps > 0 gives.
    That keeps the last time pinned to the smallest feasible one: pushing
    it out costs (1 - F) per unit, strictly positive for any tail value
    an interior time can take.  Returns the minimizing tuple (ties
    lexicographically smallest) and its objective; raises InfeasibleError
    when no time meets the target or no tuple survives the necessary
    conditions.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    tails = np.asarray(tails, dtype=float)
    feasible = np.nonzero(tails[1:] >= target)[0]
    if len(feasible) == 0:
        raise InfeasibleError("no time in the tabulated horizon meets the target")
    n_last = int(feasible[0]) + 1
    if m == 1:
        return (n_last,), float(n_last)
    if n_last < m:
        raise InfeasibleError(f"{m} unit-separated integer times cannot fit below {n_last}")

    F = tails[: n_last + 1]
    if candidates is None:
        cand = [n for n in range(1, n_last) if F[n] >= F[n - 1]]
    else:
        cand = sorted({int(c) for c in candidates if 1 <= int(c) < n_last})
    cand_arr = np.array(cand, dtype=int)
    rmq = _RangeMax(F)
    all_times = np.arange(n_last + 1)

    def successor_window(prev: int, cur: int):
        """Cumulative admissibility bounds for the successor of n_i = cur.

        A successor v is admissible when, for every alternative position
        a in (prev, v) for n_i (the only exchanges that keep the tuple
        ascending), moving n_i to a cannot lower the objective:

            v (F[cur] - F[a]) >= cur F[cur] - a F[a] - (cur - a) F[prev].

        Returns (lo, hi) arrays indexed by v: the bounds induced by all
        alternatives below v.
        """
        p_cur = F[cur]
        p_prev = F[prev]
        a = all_times[prev + 1 : n_last]
        denom = p_cur - F[a]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (cur * p_cur - a * F[a] - (cur - a) * p_prev) / denom
        lo_seq = np.where(denom > 0.0, ratio, -math.inf)
        hi_seq = np.where(denom < 0.0, ratio, math.inf)
        # bounds applying to successor v gather alternatives a <= v - 1
        lo = np.full(n_last + 1, -math.inf)
        hi = np.full(n_last + 1, math.inf)
        if len(a):
            lo[a + 1] = np.maximum.accumulate(lo_seq)
            hi[a + 1] = np.minimum.accumulate(hi_seq)
        return lo, hi

    def admissible_successors(prev: int, cur: int, i: int):
        lo, hi = successor_window(prev, cur)
        if i == m - 1:
            # the successor is the fixed last time; admissibility is a pure check
            if lo[n_last] - 1e-9 <= n_last <= hi[n_last] + 1e-9:
                yield n_last
            return
        hi_room = n_last - (m - i - 1)
        for nxt in cand_arr[np.searchsorted(cand_arr, cur + 1):]:
            nxt = int(nxt)
            if nxt > hi_room:
                break
            if nxt > hi[nxt] + 1e-9:
                break  # the upper bound only tightens as nxt grows
            if nxt < lo[nxt] - 1e-9:
                continue
            if F[nxt] < rmq.query(cur, nxt) - 1e-12:
                continue
            yield nxt

    # The best completion from "position i holds n_i = cur, preceded by
    # prev" is a function of (i, prev, cur) alone, so the search is a
    # memoized recursion over those states.  Values are the maximal
    # remaining coverage gain; the objective is n_last minus total gain.
    memo: dict[tuple[int, int, int], float] = {}

    def best_gain_from(i: int, prev: int, cur: int) -> float:
        if i == m:
            return 0.0
        key = (i, prev, cur)
        if key not in memo:
            value = -math.inf
            for nxt in admissible_successors(prev, cur, i):
                value = max(value, (nxt - cur) * F[cur] + best_gain_from(i + 1, cur, nxt))
            memo[key] = value
        return memo[key]

    starts = [n1 for n1 in cand
              if n1 <= n_last - m + 1 and F[n1] >= rmq.query(0, n1) - 1e-12]
    best_gain = -math.inf
    for n1 in starts:
        best_gain = max(best_gain, best_gain_from(1, 0, n1))
    if not math.isfinite(best_gain):
        raise InfeasibleError("no decoding-time tuple satisfies the necessary conditions")

    # walk the memo greedily: at every level take the smallest successor
    # achieving the level's exact optimum, giving the lexicographically
    # smallest optimal tuple
    times: list[int] = []
    prev = 0
    for n1 in starts:
        if best_gain_from(1, 0, n1) >= best_gain - 1e-12:
            times.append(n1)
            break
    for i in range(1, m):
        cur = times[-1]
        options = [
            (nxt, (nxt - cur) * F[cur] + best_gain_from(i + 1, cur, nxt))
            for nxt in admissible_successors(prev, cur, i)
        ]
        level_best = max(v for _, v in options)
        nxt = next(n for n, v in options if v >= level_best - 1e-12)
        times.append(nxt)
        prev = cur

    return tuple(times), float(n_last - best_gain)


def discrete_sdo(prob: SdoProblem, candidate_set=None) -> SdoSolution:
    """Integer decoding times for integer-indexed tails (exact BSC/BEC models)."""
    tail = prob.tail
    if tail.mode != "discrete":
        raise TypeError("discrete solver needs a discrete tail model")
    n_last = tail_model_inverse(tail, prob.target)
    tails = tail.tails_upto(n_last)
    if candidate_set is None and isinstance(tail.channel, Bsc):
        candidate_set = bsc_local_maximizers(prob.gamma, tail.channel.p, n_last)
    times, value = discrete_search(tails, prob.target, prob.m, candidate_set)
    return SdoSolution(tuple(float(t) for t in times), None, value,
                       prob.gamma, prob.delta)


def solve_at_delta(ch: Channel, m: int, k: int, eps: float, delta: float,
                   **model_kwargs) -> SdoSolution:
    """Solve the decoding-time program at a fixed error split delta."""
    gamma = gamma_from_delta(k, eps, delta)
    tail = make_tail_model(ch, gamma, **model_kwargs)
    prob = SdoProblem(m, k, eps, delta, tail)
    if tail.mode == "continuous":
        return gap_constrained_sdo(prob)
    return discrete_sdo(prob)


def solve_at_gamma(ch: Channel, m: int, k: int, eps: float, gamma: float,
                   **model_kwargs) -> SdoSolution:
    """Solve at an explicit threshold gamma (the delta it implies is recorded)."""
    delta = 2.0 ** (log2_message_count(k) - gamma) / eps
    if not 0.0 < delta < 1.0:
        raise ValueError(f"gamma = {gamma} implies delta = {delta:.3g} outside (0, 1)")
    return solve_at_delta(ch, m, k, eps, delta, **model_kwargs)


def two_step_minimize(ch: Channel, m: int, k: int, eps: float,
                      grid_points: int = 64, rel_tol: float = 1e-4,
                      **model_kwargs) -> tuple[SdoSolution, float]:
    """Minimize the bound over the threshold via the delta parameterization.

    A geometric delta grid is refined by golden section around the best
    grid point; the inner solver is picked by the tail model's mode.
    Warns when eps sits above the critical level at which early stopping
    could help.
    """
    from .bounds import critical_epsilon  # local import to avoid a module cycle

    eps_star = critical_epsilon(k, channel_stats(ch).a0)
    if eps > eps_star:
        warnings.warn(
            f"eps = {eps:.3g} exceeds the critical level {eps_star:.3g}; "
            "the stop-at-zero refinement would improve on this bound",
            RuntimeWarning,
        )

    cache: dict[float, SdoSolution | None] = {}

    def solve(delta: float) -> SdoSolution | None:
        if delta not in cache:
            try:
                cache[delta] = solve_at_delta(ch, m, k, eps, delta, **model_kwargs)
            except InfeasibleError:
                cache[delta] = None
        return cache[delta]

    deltas = np.geomspace(1e-6, 1.0 - 1e-6, grid_points)
    best_idx = None
    best_obj = math.inf
    for idx, d in enumerate(deltas):
        sol = solve(float(d))
        if sol is not None and sol.objective < best_obj:
            best_idx, best_obj = idx, sol.objective
    if best_idx is None:
        raise InfeasibleError("every delta on the grid is infeasible")

    lo = float(deltas[max(best_idx - 1, 0)])
    hi = float(deltas[min(best_idx + 1, len(deltas) - 1)])
    a, b = math.log(lo), math.log(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)

    def value(log_delta: float) -> float:
        sol = solve(math.exp(log_delta))
        return math.inf if sol is None else sol.objective

    fc, fd = value(c), value(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = value(d)
        span = min(fc, fd)
        if b - a < 1e-6 or (math.isfinite(span) and abs(fc - fd) <= rel_tol * max(1.0, span)):
            break

    best_delta, best_sol = None, None
    for delta, sol in cache.items():
        if sol is not None and (best_sol is None or sol.objective < best_sol.objective):
            best_delta, best_sol = delta, sol
    if best_sol is None:
        raise InfeasibleError("threshold search found no feasible delta")
    return best_sol, best_delta
