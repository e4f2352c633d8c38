"""Moment/cumulant conversion and Hermite/Edgeworth polynomials.

The cumulant of order j of a scalar random variable W is a homogeneous
polynomial of degree j in the noncentral moments E[W^l].  Both directions
of the conversion run over the nonnegative integer solutions of the
Diophantine equation

    k_1 + 2 k_2 + ... + j k_j = j,

i.e. over the integer partitions of j written as part-multiplicity
vectors.  The same solution sets drive the polynomial correction terms of
the Edgeworth series, which are signed combinations of probabilists'
Hermite polynomials He_j weighted by products of normalized cumulants.

Everything here is exact combinatorics evaluated in 64-bit floats;
factorials are precomputed (exact as doubles up to 22!, and adequate for
the weight ratios beyond).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

MAX_PARTITION_ORDER = 16
MAX_HERMITE_DEGREE = 32

_FACT = [float(math.factorial(i)) for i in range(MAX_HERMITE_DEGREE + 1)]

# number of integer partitions of j, used as a completeness cross-check
_PARTITION_COUNTS = (1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176, 231)


@dataclass(frozen=True)
class MomentVector:
    """Noncentral moments E[W^j] for j = 1..order."""

    moments: tuple[float, ...]

    def __post_init__(self):
        if len(self.moments) < 2:
            raise ValueError("need at least two moments")
        m1, m2 = self.moments[0], self.moments[1]
        if m2 < m1 * m1 - 1e-12 * max(1.0, m1 * m1):
            raise ValueError(f"inconsistent moments: m2={m2} < m1^2={m1 * m1}")

    @property
    def order(self) -> int:
        return len(self.moments)

    def moment(self, j: int) -> float:
        return self.moments[j - 1]


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants kappa_j for j = 1..order of a scalar random variable."""

    kappas: tuple[float, ...]

    def __post_init__(self):
        if len(self.kappas) < 1:
            raise ValueError("need at least one cumulant")

    @property
    def order(self) -> int:
        return len(self.kappas)

    def kappa(self, j: int) -> float:
        return self.kappas[j - 1]

    @property
    def sigma(self) -> float:
        k2 = self.kappas[1]
        if k2 <= 0.0:
            raise ValueError(f"kappa_2 = {k2} must be positive")
        return math.sqrt(k2)

    def normalized(self) -> "CumulantVector":
        """Cumulants of W/sigma: kbar_j = kappa_j / sigma^j (kbar_2 = 1)."""
        s = self.sigma
        return CumulantVector(tuple(k / s**j for j, k in enumerate(self.kappas, start=1)))

    def centered(self) -> "CumulantVector":
        """Same vector with kappa_1 forced to zero (cumulants j >= 2 are shift-invariant)."""
        return CumulantVector((0.0,) + self.kappas[1:])


@dataclass(frozen=True)
class PartitionSolutionSet:
    """All nonnegative (k_1..k_j) with sum of l*k_l = j, lexicographically ascending."""

    j: int
    solutions: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)


@lru_cache(maxsize=None)
def enumerate_partitions(j: int) -> PartitionSolutionSet:
    """Enumerate the part-multiplicity vectors of the integer partitions of j.

    Recursive descent on the largest remaining part; the result is sorted
    into ascending lexicographic order of (k_1, ..., k_j) so downstream
    fixtures are deterministic.
    """
    if not 1 <= j <= MAX_PARTITION_ORDER:
        raise ValueError(f"partition order must be in [1, {MAX_PARTITION_ORDER}], got {j}")
    out: list[tuple[int, ...]] = []
    acc = [0] * j

    def descend(remaining: int, largest: int) -> None:
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(min(largest, remaining), 0, -1):
            acc[part - 1] += 1
            descend(remaining - part, part)
            acc[part - 1] -= 1

    descend(j, j)
    out.sort()
    return PartitionSolutionSet(j, tuple(out))


def cumulants_from_moments(m: MomentVector) -> CumulantVector:
    """kappa_j = j! sum over partitions of (-1)^(r-1) (r-1)! prod (m_l/l!)^{k_l} / k_l!."""
    kappas = []
    for j in range(1, m.order + 1):
        total = 0.0
        for sol in enumerate_partitions(j):
            r = sum(sol)
            term = _FACT[j] * (-1.0) ** (r - 1) * _FACT[r - 1]
            for l, kl in enumerate(sol, start=1):
                if kl:
                    term *= (m.moment(l) / _FACT[l]) ** kl / _FACT[kl]
            total += term
        kappas.append(total)
    return CumulantVector(tuple(kappas))


def moments_from_cumulants(c: CumulantVector) -> MomentVector:
    """Inverse relation: m_j = j! sum over partitions of prod (kappa_l/l!)^{k_l} / k_l!."""
    moments = []
    for j in range(1, c.order + 1):
        total = 0.0
        for sol in enumerate_partitions(j):
            term = _FACT[j]
            for l, kl in enumerate(sol, start=1):
                if kl:
                    term *= (c.kappa(l) / _FACT[l]) ** kl / _FACT[kl]
            total += term
        moments.append(total)
    return MomentVector(tuple(moments))


@lru_cache(maxsize=None)
def hermite_coefficients(j: int) -> tuple[float, ...]:
    """Monomial coefficients (c_0..c_j) of the probabilists' Hermite polynomial He_j."""
    if not 0 <= j <= MAX_HERMITE_DEGREE:
        raise ValueError(f"Hermite degree must be in [0, {MAX_HERMITE_DEGREE}], got {j}")
    coeffs = [0.0] * (j + 1)
    for k in range(j // 2 + 1):
        coeffs[j - 2 * k] = _FACT[j] * (-1.0) ** k / (_FACT[k] * _FACT[j - 2 * k] * 2.0**k)
    return tuple(coeffs)


def hermite(j: int, x: float) -> float:
    """He_j(x) = j! sum_k (-1)^k x^(j-2k) / (k! (j-2k)! 2^k)."""
    coeffs = hermite_coefficients(j)
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=4096)
def edgeworth_pj_coefficients(j: int, normalized_cumulants: CumulantVector) -> tuple[float, ...]:
    """Monomial coefficients of the order-j Edgeworth correction polynomial.

    p_j(x) = - sum over partitions {k_i} of He_{j+2r-1}(x) prod_i
    (kbar_{i+2}/(i+2)!)^{k_i} / k_i!, where kbar are cumulants of the
    unit-variance summand.  Requires kbar_3..kbar_{j+2}.
    """
    if normalized_cumulants.order < j + 2:
        raise ValueError(
            f"order-{j} polynomial needs cumulants through order {j + 2}, "
            f"got {normalized_cumulants.order}"
        )
    coeffs = [0.0] * (3 * j)  # degree of He_{j+2r-1} is at most 3j-1
    for sol in enumerate_partitions(j):
        r = sum(sol)
        weight = 1.0
        for i, ki in enumerate(sol, start=1):
            if ki:
                weight *= (normalized_cumulants.kappa(i + 2) / _FACT[i + 2]) ** ki / _FACT[ki]
        for power, hc in enumerate(hermite_coefficients(j + 2 * r - 1)):
            coeffs[power] -= weight * hc
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    return tuple(coeffs)


def edgeworth_pj(j: int, normalized_cumulants: CumulantVector, x: float) -> float:
    """Evaluate the order-j Edgeworth polynomial p_j at x."""
    acc = 0.0
    for c in reversed(edgeworth_pj_coefficients(j, normalized_cumulants)):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=None)
def edgeworth_series_terms(order: int):
    """Static structure of the correction sum sum_j n^(-j/2) p_j(x).

    Each term is (j, hermite_degree, base_weight, powers) with powers a
    tuple of (cumulant order, multiplicity); its contribution is

        -n^(-j/2) * base_weight * prod kbar_o^mult * He_degree(x).

    Precomputing this once lets evaluators with n-dependent cumulants
    (Sheppard-adjusted lattice series) skip rebuilding polynomial
    coefficients at every call.
    """
    terms = []
    for j in range(1, order + 1):
        for sol in enumerate_partitions(j):
            r = sum(sol)
            weight = 1.0
            powers = []
            for i, ki in enumerate(sol, start=1):
                if ki:
                    weight /= _FACT[i + 2] ** ki * _FACT[ki]
                    powers.append((i + 2, ki))
            terms.append((j, j + 2 * r - 1, weight, tuple(powers)))
    return tuple(terms)


def hermite_values(max_degree: int, x: float) -> list[float]:
    """He_0(x)..He_max(x) by the three-term recurrence."""
    values = [1.0, x]
    for d in range(1, max_degree):
        values.append(x * values[d] - d * values[d - 1])
    return values[: max_degree + 1]


def polyval(coeffs: tuple[float, ...], x: float) -> float:
    """Horner evaluation of monomial coefficients (c_0.. c_d)."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def polyder(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    """Coefficients of the derivative polynomial."""
    if len(coeffs) <= 1:
        return (0.0,)
    return tuple(i * c for i, c in enumerate(coeffs))[1:]
