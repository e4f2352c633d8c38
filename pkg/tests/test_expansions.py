import math

import numpy as np
import pytest

from vlsf.cumulants import CumulantVector, MomentVector, cumulants_from_moments
from vlsf.expansions import (
    ExpansionSpec,
    Lattice,
    bernoulli_number,
    corrected_edgeworth_cdf,
    cramer_series3,
    edgeworth_cdf,
    normal_cdf,
    petrov_tail,
    sheppard_adjust,
)


def binom_cdf_exact(c, n, p):
    """Direct-summation binomial CDF (exact integer coefficients), the lattice oracle."""
    if c < 0:
        return 0.0
    return float(sum(
        math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(min(c, n) + 1)
    ))


def bernoulli_cumulants(p, order=7):
    return cumulants_from_moments(MomentVector(tuple([p] * order)))


def gaussian_cumulants(order=7):
    return CumulantVector((0.0, 1.0) + (0.0,) * (order - 2))


def test_bernoulli_number_table():
    assert bernoulli_number(2) == pytest.approx(1 / 6)
    assert bernoulli_number(5) == 0.0
    assert bernoulli_number(4) == pytest.approx(-1 / 30)
    with pytest.raises(ValueError):
        bernoulli_number(13)


def test_bernoulli_defining_recurrence():
    total = sum(math.comb(12, j) * bernoulli_number(j) for j in range(12))
    assert total == pytest.approx(0.0, abs=1e-12)


def test_edgeworth_order_zero_is_normal_cdf():
    spec = ExpansionSpec(0, bernoulli_cumulants(0.3).centered())
    for x in (-1.0, 0.2, 2.5):
        assert edgeworth_cdf(spec, 50, x) == pytest.approx(normal_cdf(x))


def test_edgeworth_gaussian_inputs_exact():
    spec = ExpansionSpec(5, gaussian_cumulants())
    for x in (-2.0, 0.0, 1.3):
        assert edgeworth_cdf(spec, 10, x) == pytest.approx(normal_cdf(x), abs=1e-15)


def test_edgeworth_binomial_accuracy_at_corrected_point():
    # Bernoulli(1/2) - 1/2 summands, n = 200: evaluate at the
    # continuity-corrected standardized point nearest x = 1 (the exact
    # CDF is a step function, so only corrected points are comparable)
    n, p = 200, 0.5
    sigma = 0.5
    s_int = 107  # z_plus = (107.5 - 100) / (0.5 sqrt(200)) = 1.0607
    z_plus = (s_int + 0.5 - n * p) / (sigma * math.sqrt(n))
    spec = ExpansionSpec(2, bernoulli_cumulants(p).centered())
    approx = edgeworth_cdf(spec, n, z_plus)
    exact = binom_cdf_exact(s_int, n, p)
    assert approx == pytest.approx(exact, abs=1e-3)


def test_petrov_at_origin_is_half():
    kap = bernoulli_cumulants(0.4)
    assert petrov_tail(kap, 37.0, 0.0) == pytest.approx(0.5)


def test_petrov_gaussian_reduces_to_q():
    kap = gaussian_cumulants()
    for x in (0.0, 0.7, 2.4):
        assert petrov_tail(kap, 25.0, x) == pytest.approx(1.0 - normal_cdf(x))


def test_petrov_lower_tail_symmetric_case():
    kap = bernoulli_cumulants(0.5)  # symmetric: odd cumulants vanish
    for x in (0.3, 1.1):
        up = petrov_tail(kap, 64.0, x)
        lo = petrov_tail(kap, 64.0, x, lower=True)
        assert up == pytest.approx(lo, rel=1e-12)


def test_petrov_lower_tail_tracks_skewed_binomial():
    # asymmetric summands: the mirrored form must track the exact lower
    # tail of a centered Bernoulli(0.2) sum, compared at the half-shifted
    # lattice points where a continuous approximation is meaningful
    p, n = 0.2, 400
    kap = bernoulli_cumulants(p)
    sigma = math.sqrt(p * (1 - p))
    for cutoff in (76, 72, 68, 64, 56):
        x = (n * p - (cutoff + 0.5)) / (sigma * math.sqrt(n))
        approx = petrov_tail(kap, n, x, lower=True)
        exact = binom_cdf_exact(cutoff, n, p)
        assert approx == pytest.approx(exact, rel=0.03)


def test_petrov_rejects_negative_x_and_degenerate_variance():
    kap = bernoulli_cumulants(0.2)
    with pytest.raises(ValueError):
        petrov_tail(kap, 10.0, -0.5)
    with pytest.raises(ValueError):
        petrov_tail(CumulantVector((0.0, 0.0, 0.0, 0.0, 0.0)), 10.0, 0.5)


def test_cramer_series_leading_coefficient():
    kap = bernoulli_cumulants(0.3)
    lam = cramer_series3(kap)
    assert lam.a0 == pytest.approx(kap.kappa(3) / (6.0 * kap.kappa(2) ** 1.5))


def test_sheppard_values():
    kap = bernoulli_cumulants(0.5).centered().normalized()
    # span -> 0 recovers the raw cumulants
    tiny = sheppard_adjust(kap, 1e-9, 1.0, 5)
    for j in range(2, 8):
        assert tiny.kappa(j) == pytest.approx(kap.kappa(j), abs=1e-12)
    adj = sheppard_adjust(kap, 1.0, 1.0, 1)
    assert adj.kappa(2) == pytest.approx(kap.kappa(2) - 1.0 / 12.0)
    assert adj.kappa(3) == pytest.approx(kap.kappa(3))  # B_3 = 0
    assert adj.kappa(1) == 0.0


def test_corrected_series_tracks_binomial():
    p = 0.5
    kap = bernoulli_cumulants(p).centered()
    sigma = math.sqrt(p * (1 - p))
    spec = ExpansionSpec(5, kap, Lattice(0.0, 1.0))
    worst = 0.0
    for n in (50, 100, 400):
        for s_int in range(n + 1):
            z = (s_int - n * p) / (sigma * math.sqrt(n))
            approx = corrected_edgeworth_cdf(spec, n, z)
            worst = max(worst, abs(approx - binom_cdf_exact(s_int, n, p)))
    assert worst < 1e-4


def test_corrected_series_order_zero_is_shifted_normal():
    p = 0.3
    kap = bernoulli_cumulants(p).centered()
    sigma = math.sqrt(p * (1 - p))
    spec = ExpansionSpec(0, kap, Lattice(0.0, 1.0))
    n, s_int = 49, 17
    z = (s_int - n * p) / (sigma * math.sqrt(n))
    z_plus = z + 0.5 / (sigma * math.sqrt(n))
    assert corrected_edgeworth_cdf(spec, n, z) == pytest.approx(normal_cdf(z_plus))


def test_corrected_series_requires_lattice():
    spec = ExpansionSpec(3, bernoulli_cumulants(0.4).centered())
    with pytest.raises(ValueError):
        corrected_edgeworth_cdf(spec, 30, 0.0)
    with pytest.raises(ValueError):
        edgeworth_cdf(
            ExpansionSpec(3, bernoulli_cumulants(0.4).centered(), Lattice(0.0, 1.0)),
            30, 0.0,
        )


def test_corrected_bec_tail_matches_exact():
    # erased-or-not information density: Bernoulli(1 - p) in bits
    p, gamma_plus = 0.5, 10.5
    kap = bernoulli_cumulants(1 - p).centered()
    sigma = math.sqrt(p * (1 - p))
    spec = ExpansionSpec(5, kap, Lattice(0.0, 1.0))
    worst = 0.0
    for n in range(21, 101):
        z_plus = (gamma_plus - n * (1 - p)) / (sigma * math.sqrt(n))
        z = z_plus - 0.5 / (sigma * math.sqrt(n))
        tail = 1.0 - corrected_edgeworth_cdf(spec, n, z)
        exact = binom_cdf_exact(math.floor(n - gamma_plus), n, p)
        worst = max(worst, abs(tail - exact))
    assert worst < 1e-3


def test_expansion_spec_validates_order():
    with pytest.raises(ValueError):
        ExpansionSpec(5, CumulantVector((0.0, 1.0, 0.1)))


def test_petrov_always_within_unit_interval():
    kap = bernoulli_cumulants(0.12)  # strongly skewed: the raw value can top 1
    for n in (1.0, 2.0, 5.0, 20.0, 200.0):
        for x in (0.0, 0.4, 1.3, 3.0, 8.0):
            value = petrov_tail(kap, n, x)
            assert 0.0 <= value <= 1.0


def test_corrected_series_error_decays_with_order():
    # error at n should exceed the error at 4n by at least 2^(s/2)/2
    p = 0.5
    kap = bernoulli_cumulants(p).centered()
    sigma = math.sqrt(p * (1 - p))
    spec = ExpansionSpec(5, kap, Lattice(0.0, 1.0))

    def worst_error(n):
        worst = 0.0
        for s_int in range(n + 1):
            z = (s_int - n * p) / (sigma * math.sqrt(n))
            worst = max(worst, abs(corrected_edgeworth_cdf(spec, n, z)
                                   - binom_cdf_exact(s_int, n, p)))
        return worst

    e1, e2 = worst_error(25), worst_error(100)
    assert e1 / e2 >= 2.0**2.5 * 0.5
