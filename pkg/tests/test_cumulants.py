import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlsf.cumulants import (
    CumulantVector,
    MomentVector,
    cumulants_from_moments,
    edgeworth_pj,
    edgeworth_pj_coefficients,
    enumerate_partitions,
    hermite,
    moments_from_cumulants,
    polyval,
)

PARTITION_COUNTS = {1: 1, 2: 2, 3: 3, 4: 5, 5: 7, 6: 11, 7: 15, 8: 22}


def brute_force_partitions(j):
    out = set()
    for combo in itertools.product(*(range(j + 1) for _ in range(j))):
        if sum(l * k for l, k in zip(range(1, j + 1), combo)) == j:
            out.add(combo)
    return out


def test_partitions_smallest_orders():
    assert enumerate_partitions(1).solutions == ((1,),)
    assert set(enumerate_partitions(2)) == {(2, 0), (0, 1)}


def test_partitions_match_brute_force_and_counts():
    for j in range(1, 9):
        got = enumerate_partitions(j)
        assert set(got) == brute_force_partitions(j)
        assert len(got) == PARTITION_COUNTS[j]


def test_partitions_deterministic_lexicographic():
    sols = enumerate_partitions(6).solutions
    assert list(sols) == sorted(sols)


@pytest.mark.parametrize("j", [0, -3, 17])
def test_partitions_rejects_out_of_range(j):
    with pytest.raises(ValueError):
        enumerate_partitions(j)


@given(st.integers(min_value=1, max_value=12))
def test_partition_tuples_satisfy_diophantine(j):
    for sol in enumerate_partitions(j):
        assert sum(l * k for l, k in zip(range(1, j + 1), sol)) == j


def test_bernoulli_cumulants():
    p = 0.3
    m = MomentVector(tuple([p] * 5))
    kap = cumulants_from_moments(m)
    assert kap.kappa(1) == pytest.approx(p)
    assert kap.kappa(2) == pytest.approx(p * (1 - p))
    assert kap.kappa(3) == pytest.approx(p * (1 - p) * (1 - 2 * p))


def test_gaussian_cumulants_vanish():
    # standard normal noncentral moments: 0, 1, 0, 3, 0, 15, 0
    m = MomentVector((0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0))
    kap = cumulants_from_moments(m)
    assert kap.kappa(2) == pytest.approx(1.0)
    for j in range(3, 8):
        assert kap.kappa(j) == pytest.approx(0.0, abs=1e-9)


def log_mgf_taylor_cumulants(values, probs, order):
    """Independent oracle: Taylor coefficients of ln E[e^{tW}] by Chebyshev fit."""
    t = np.linspace(-0.5, 0.5, 401)
    logmgf = np.log(np.exp(np.outer(t, values)) @ probs)
    cheb = np.polynomial.chebyshev.Chebyshev.fit(t, logmgf, deg=14)
    power = cheb.convert(kind=np.polynomial.Polynomial)
    return [power.coef[j] * math.factorial(j) for j in range(1, order + 1)]


def test_cumulants_match_log_mgf_derivatives():
    values = np.array([-1.3, -0.2, 0.4, 1.1, 2.5])
    probs = np.array([0.15, 0.3, 0.25, 0.2, 0.1])
    moments = MomentVector(tuple(float(probs @ values**j) for j in range(1, 8)))
    kap = cumulants_from_moments(moments)
    oracle = log_mgf_taylor_cumulants(values, probs, 7)
    for j in range(1, 8):
        assert kap.kappa(j) == pytest.approx(oracle[j - 1], rel=2e-4, abs=2e-6)


def test_moment_cumulant_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        raw = rng.normal(scale=0.8, size=7)
        raw[1] = rng.uniform(0.5, 2.0)  # keep the variance entry positive
        kap = CumulantVector(tuple(raw))
        moments = moments_from_cumulants(kap)
        back = cumulants_from_moments(MomentVector(moments.moments))
        for j in range(1, 8):
            assert back.kappa(j) == pytest.approx(
                kap.kappa(j), rel=1e-10, abs=1e-10
            )


def test_hermite_low_orders():
    assert hermite(0, 1.7) == 1.0
    assert hermite(1, -2.5) == -2.5
    assert hermite(3, 2.0) == pytest.approx(2.0**3 - 3 * 2.0)


@given(st.integers(min_value=1, max_value=10),
       st.floats(min_value=-8, max_value=8, allow_nan=False))
@settings(max_examples=80)
def test_hermite_recurrence(j, x):
    lhs = hermite(j + 1, x)
    rhs = x * hermite(j, x) - j * hermite(j - 1, x)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_hermite_degree_cap():
    with pytest.raises(ValueError):
        hermite(33, 0.0)


def unit_cumulants(k3=0.0, k4=0.0, k5=0.0, k6=0.0, k7=0.0):
    return CumulantVector((0.0, 1.0, k3, k4, k5, k6, k7))


def test_pj_order_one_is_scaled_he2():
    kbar = unit_cumulants(k3=0.7)
    for x in (-1.5, 0.0, 2.2):
        assert edgeworth_pj(1, kbar, x) == pytest.approx(-0.7 / 6.0 * hermite(2, x))


def test_pj_vanishes_for_gaussian():
    kbar = unit_cumulants()
    for j in range(1, 6):
        for x in (-2.0, 0.3, 4.0):
            assert edgeworth_pj(j, kbar, x) == 0.0


def test_pj_order_two_expansion():
    kbar = unit_cumulants(k3=-0.9, k4=1.4)
    for x in (-2.1, 0.4, 1.9):
        expected = -(hermite(3, x) * 1.4 / 24.0 + hermite(5, x) * (-0.9) ** 2 / 72.0)
        assert edgeworth_pj(2, kbar, x) == pytest.approx(expected, rel=1e-12)


def test_pj_requires_enough_cumulants():
    with pytest.raises(ValueError):
        edgeworth_pj(3, CumulantVector((0.0, 1.0, 0.1)), 0.5)


def test_pj_coefficients_match_direct_evaluation():
    kbar = unit_cumulants(k3=0.4, k4=-0.6, k5=0.2, k6=0.05, k7=-0.01)
    for j in range(1, 6):
        coeffs = edgeworth_pj_coefficients(j, kbar)
        for x in np.linspace(-3, 3, 7):
            assert polyval(coeffs, x) == pytest.approx(edgeworth_pj(j, kbar, x))


def test_pj_order_three_expansion():
    # partitions of 3: (3,0,0), (1,1,0), (0,0,1) with r = 3, 2, 1
    kbar = CumulantVector((0.0, 1.0, 0.5, -0.8, 1.2))
    k3, k4, k5 = 0.5, -0.8, 1.2
    for x in (-1.7, 0.6, 2.3):
        expected = -(
            hermite(4, x) * k5 / 120.0
            + hermite(6, x) * k3 * k4 / 144.0
            + hermite(8, x) * k3**3 / 1296.0
        )
        assert edgeworth_pj(3, kbar, x) == pytest.approx(expected, rel=1e-12)


def test_hermite_values_match_coefficients():
    from vlsf.cumulants import hermite_values

    for x in (-2.5, 0.0, 1.9):
        values = hermite_values(14, x)
        for d in range(15):
            assert values[d] == pytest.approx(hermite(d, x), rel=1e-12, abs=1e-12)


def test_series_terms_match_polynomial_route():
    from vlsf.cumulants import edgeworth_series_terms, hermite_values

    kbar = unit_cumulants(k3=0.4, k4=-0.6, k5=0.2, k6=0.05, k7=-0.01)
    mu = [0.0] + list(kbar.kappas)  # 1-indexed lookup
    terms = edgeworth_series_terms(5)
    n, x = 37.0, 0.8
    he = hermite_values(max(t[1] for t in terms), x)
    via_terms = 0.0
    for j, degree, base, powers in terms:
        weight = base
        for order, mult in powers:
            weight *= mu[order] ** mult
        via_terms -= n ** (-0.5 * j) * weight * he[degree]
    direct = sum(n ** (-0.5 * j) * edgeworth_pj(j, kbar, x) for j in range(1, 6))
    assert via_terms == pytest.approx(direct, rel=1e-12)


def test_moment_vector_rejects_negative_variance():
    with pytest.raises(ValueError):
        MomentVector((1.0, 0.5))
