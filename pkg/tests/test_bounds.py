import math
from fractions import Fraction


import numpy as np
import pytest

from vlsf.bounds import (
    apply_stop_at_zero,
    backoff_bounds,
    critical_epsilon,
    devassy_bound,
    full_rank_curve,
    polyanskiy_bound,
    rank_full_prob,
    rank_full_prob_range,
    rank_markov,
    st_rlfc_finite_bound,
    st_rlfc_sdo,
    st_rlfc_zero_error_bound,
    st_rlfc_zero_error_bound_markov,
)
from vlsf.channels import Bec, channel_stats
from vlsf.errors import InfeasibleError
from vlsf.montecarlo import SimConfig, simulate_rlfc_rank


def test_polyanskiy_bec_anchor():
    stats = channel_stats(Bec(0.5))
    bound = polyanskiy_bound(100, 1e-3, stats)
    expected = (math.log2(2**100 - 1) + math.log2(1e3) + 1.0) / 0.5
    assert bound == pytest.approx(expected, rel=1e-12)
    assert bound == pytest.approx(221.93, abs=0.01)


def test_polyanskiy_limits():
    stats = channel_stats(Bec(0.25))
    near_one = polyanskiy_bound(6, 1 - 1e-12, stats)
    assert near_one == pytest.approx((math.log2(63) + 1.0) / 0.75, rel=1e-9)
    assert polyanskiy_bound(1, 0.01, stats) == pytest.approx(
        (math.log2(100) + 1.0) / 0.75
    )


def test_critical_epsilon_stationarity():
    for k in (1, 3, 10):
        for a0 in (1.0, 0.832):
            x = critical_epsilon(k, a0)
            lhs = (1 - x) / (x * math.log(2))
            rhs = k + a0 - math.log2(x)
            assert lhs == pytest.approx(rhs, abs=1e-6)


def test_critical_epsilon_decreasing_in_k():
    values = [critical_epsilon(k, 1.0) for k in (1, 10, 100, 1000)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] >= 1.4e-3


def test_devassy_values():
    assert devassy_bound(1, 0.5) == pytest.approx(2.0)
    assert devassy_bound(3, 0.5) == pytest.approx((3 + Fraction(11, 12)) / 0.5)
    # term-by-term rational oracle at k = 10
    s = sum(Fraction(2**i - 1, 2**10 - 2**i) for i in range(1, 10))
    assert devassy_bound(10, 0.5) == pytest.approx(float(10 + s) / 0.5, rel=1e-12)


def test_devassy_large_k_ratio_form():
    # the ratio form must agree with exact integers where both apply
    exact = devassy_bound(64, 0.3)
    s = sum((2.0 ** (i - 65) - 2.0**-65) / (1 - 2.0 ** (i - 65)) for i in range(1, 65))
    via_ratio = (65 + s) / 0.7
    assert devassy_bound(65, 0.3) == pytest.approx(via_ratio, rel=1e-10)
    assert devassy_bound(65, 0.3) > exact


def test_zero_error_bound_edge_cases():
    for k in (1, 2, 7):
        assert st_rlfc_zero_error_bound(k, 0.0) == pytest.approx(k)
    for p in (0.1, 0.5, 0.9):
        assert st_rlfc_zero_error_bound(1, p) == pytest.approx(1.0 / (1.0 - p))
        assert st_rlfc_zero_error_bound(1, p) == pytest.approx(devassy_bound(1, p))


def test_zero_error_bound_vs_simulation():
    res = simulate_rlfc_rank(8, 0.5, 10, SimConfig(trials=100_000, seed=31))
    bound = st_rlfc_zero_error_bound(8, 0.5)
    assert abs(res.mean_tau - bound) <= 3.0 * res.stderr_tau


def test_corollary_dominance_and_limits():
    for k in range(1, 21):
        for p in np.arange(0.1, 0.95, 0.1):
            assert st_rlfc_zero_error_bound(k, float(p)) <= devassy_bound(k, float(p)) + 1e-9
    # p -> 1: the refined bound converges to the p-free one
    assert st_rlfc_zero_error_bound(3, 0.999) == pytest.approx(
        devassy_bound(3, 0.999), rel=1e-6
    )


def test_backoff_bounds():
    old3, new3 = backoff_bounds(3, 0.999)
    assert old3 == pytest.approx(11 / 47)
    assert new3 == pytest.approx(old3, abs=1e-3)
    _, tiny = backoff_bounds(3, 0.001)
    assert tiny < 1e-3
    values = [backoff_bounds(3, p)[1] for p in np.arange(0.05, 0.99, 0.05)]
    assert all(b > a for a, b in zip(values, values[1:]))
    for k in (2, 5, 30):
        old, new = backoff_bounds(k, 0.4)
        assert 0.0 <= new <= old <= 1.0


def test_rank_markov_entries():
    mc = rank_markov(1, 0.3)
    assert mc.stay == (0.3,)
    assert mc.alpha_cdf[0] == pytest.approx(0.3)
    mc2 = rank_markov(2, 0.4)
    t = mc2.transition_matrix
    assert t[0, 0] == pytest.approx(0.4)
    assert t[0, 1] == pytest.approx(0.6)
    assert t[1, 1] == pytest.approx(0.4 + 0.6 / 3)
    # rows of the augmented chain sum to one
    full = np.hstack([t, mc2.absorption[:, None]])
    assert np.allclose(full.sum(axis=1), 1.0, atol=1e-12)
    assert max(abs(np.linalg.eigvals(t))) < 1.0


def test_rank_markov_rejects_large_k():
    with pytest.raises(ValueError):
        rank_markov(65, 0.5)


def test_rank_full_prob_basics():
    mc = rank_markov(5, 0.3)
    for n in range(5):
        assert rank_full_prob(mc, n) == 0.0
    mc1 = rank_markov(1, 0.35)
    for n in range(1, 12):
        assert rank_full_prob(mc1, n) == pytest.approx(1 - 0.35**n, rel=1e-12)
    probs = rank_full_prob_range(mc, 60)
    assert all(b >= a - 1e-15 for a, b in zip(probs, probs[1:]))
    assert probs[-1] > 0.99


def enumerate_rank2_process(p, n_max):
    """First-principles DP for k = 2: track the actual span of arrived columns.

    States: set() (rank 0), {01}, {10}, {11} (rank 1 with that basis
    vector), 'full'.  Systematic times send e_1 = 01, e_2 = 10; fountain
    times draw uniformly from {01, 10, 11}; every column is erased w.p. p.
    """
    pr = Fraction(p).limit_denominator(10**9)
    states = {frozenset(): Fraction(1)}
    full = Fraction(0)
    out = []
    vectors = (1, 2, 3)
    for n in range(1, n_max + 1):
        nxt = {}
        add_full = Fraction(0)

        def push(state, mass):
            nonlocal add_full
            if len(state) == 2 or 3 in state and len(state) >= 2:
                raise AssertionError
            nxt[state] = nxt.get(state, Fraction(0)) + mass

        for state, mass in states.items():
            arrivals = [(pr, None)]
            if n == 1:
                arrivals.append((1 - pr, 1))
            elif n == 2:
                arrivals.append((1 - pr, 2))
            else:
                for v in vectors:
                    arrivals.append(((1 - pr) / 3, v))
            for prob, v in arrivals:
                mass_v = mass * prob
                if v is None:
                    push(state, mass_v)
                    continue
                span = set(state)
                if v in _span_closure(span):
                    push(frozenset(span), mass_v)
                else:
                    span.add(v)
                    if len(_span_closure(span)) == 3:
                        add_full += mass_v
                    else:
                        push(frozenset(span), mass_v)
        full += add_full
        states = nxt
        out.append(float(full))
    return out


def _span_closure(vectors):
    span = {0}
    for v in vectors:
        span |= {x ^ v for x in span}
    return span - {0}


def test_rank_full_prob_matches_exhaustive_k2():
    p = 0.45
    mc = rank_markov(2, p)
    oracle = enumerate_rank2_process(p, 6)
    for n in range(1, 7):
        assert rank_full_prob(mc, n) == pytest.approx(oracle[n - 1], rel=1e-9, abs=1e-12)


def test_two_evaluation_routes_agree():
    worst = 0.0
    for k in range(1, 21):
        for p in np.arange(0.1, 0.95, 0.1):
            a = st_rlfc_zero_error_bound(k, float(p))
            b = st_rlfc_zero_error_bound_markov(k, float(p))
            worst = max(worst, abs(a - b))
    assert worst <= 1e-10


def test_survival_sum_identity():
    for k, p in [(4, 0.3), (6, 0.5), (10, 0.7)]:
        mc = rank_markov(k, p)
        horizon = 50
        probs = rank_full_prob_range(mc, horizon)
        while 1.0 - probs[-1] > 1e-12:
            horizon *= 2
            probs = rank_full_prob_range(mc, horizon)
        total = k + float(np.sum(1.0 - probs[k:]))
        assert total == pytest.approx(st_rlfc_zero_error_bound(k, p), abs=1e-8)


def test_finite_bound_values():
    mc = rank_markov(4, 0.5)
    l1, e1 = st_rlfc_finite_bound(mc, [9])
    assert l1 == 9
    assert e1 == pytest.approx(1.0 - rank_full_prob(mc, 9))
    l2, e2 = st_rlfc_finite_bound(mc, [1, 2, 3])
    assert e2 == 1.0  # rank cannot reach 4 by time 3
    probs = rank_full_prob_range(mc, 12)
    l3, e3 = st_rlfc_finite_bound(mc, [6, 8, 12])
    expected = 12 + (6 - 8) * probs[6] + (8 - 12) * probs[8]
    assert l3 == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        st_rlfc_finite_bound(mc, [5, 5])


def test_strlfc_sdo_single_and_pairs():
    sol = st_rlfc_sdo(5, 0.5, 1, 1e-2)
    probs = full_rank_curve(5, 0.5, 200)
    n_first = int(np.nonzero(probs >= 1 - 1e-2)[0][0])
    assert sol.times == (float(n_first),)
    sol2 = st_rlfc_sdo(5, 0.5, 2, 1e-2)
    best = None
    for n1 in range(1, n_first):
        value = n_first + (n1 - n_first) * probs[n1]
        if best is None or value < best[0] - 1e-12:
            best = (value, n1)
    assert sol2.times == (float(best[1]), float(n_first))
    assert sol2.objective == pytest.approx(best[0], rel=1e-12)


def test_strlfc_sdo_monotone_in_m():
    values = [st_rlfc_sdo(12, 0.5, m, 1e-3).objective for m in (1, 2, 3, 4, 6)]
    for a, b in zip(values, values[1:]):
        assert b <= a + 1e-9


def test_strlfc_sdo_infeasible_horizon():
    with pytest.raises(InfeasibleError):
        st_rlfc_sdo(4, 0.9, 2, 1e-3, max_horizon=8)


def test_stop_at_zero():
    assert apply_stop_at_zero(100.0, 0.0) == 100.0
    assert apply_stop_at_zero(100.0, 1e-3) == pytest.approx(99.9)
    with pytest.raises(ValueError):
        apply_stop_at_zero(10.0, 1.0)
    # composes with the zero-error bound
    z = st_rlfc_zero_error_bound(3, 0.5)
    assert apply_stop_at_zero(z, 1e-3) == pytest.approx(z * 0.999)
