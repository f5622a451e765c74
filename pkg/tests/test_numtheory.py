from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from massform.numtheory import (
    QuadCharacter,
    bernoulli,
    class_number_disc,
    class_number_imag,
    dirichlet_L_nonpositive,
    factorize,
    format_factorization,
    fundamental_discriminant,
    generalized_bernoulli,
    is_fundamental_discriminant,
    is_prime,
    is_squarefree,
    kronecker,
    omega_odd,
    primes_up_to,
    square_class_at,
    square_linked,
    squarefree_part,
    units_count,
    v2,
    v2_sqrt,
    valuation,
    w_k_quadratic,
    zeta_nonpositive,
)


def legendre(a: int, p: int) -> int:
    """Euler's criterion, the independent oracle for odd primes."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def test_primes():
    assert primes_up_to(30) == (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)
    assert is_prime(2**61 - 1) and not is_prime(561)


@given(st.integers(2, 10**12))
def test_factorize_roundtrip(m):
    fac = factorize(m)
    assert math.prod(p**e for p, e in fac) == m
    assert all(is_prime(p) for p, _ in fac)
    assert [p for p, _ in fac] == sorted(p for p, _ in fac)


def test_format_factorization():
    assert format_factorization(16) == "2^4"
    assert format_factorization(46989168) == "2^4·3·661·1481"
    assert format_factorization(2153) == "2153"


def test_squarefree_helpers():
    assert squarefree_part(72) == 2
    assert squarefree_part(-12) == -3
    assert is_squarefree(105) and not is_squarefree(98)
    assert omega_odd(2 * 3 * 5 * 7) == 3
    assert valuation(96, 2) == 5


@pytest.mark.parametrize("p", [p for p in primes_up_to(60) if p > 2])
def test_kronecker_matches_euler_criterion(p):
    for a in range(-2 * p, 2 * p):
        assert kronecker(a, p) == legendre(a, p)


def test_kronecker_at_two():
    assert [kronecker(a, 2) for a in (1, 3, 5, 7, 2)] == [1, -1, -1, 1, 0]
    assert kronecker(-1, -1) == -1 and kronecker(5, -1) == 1


@given(st.integers(-100, 100), st.integers(-100, 100), st.integers(-100, 100).filter(bool))
def test_kronecker_multiplicative(a, b, n):
    assert kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n)


@pytest.mark.parametrize("p", [p for p in primes_up_to(50) if p > 2])
def test_character_sum_of_shifted_squares(p):
    for a in range(p):
        s = sum(kronecker(x * x + a, p) for x in range(1, p + 1))
        assert s == (p - 1 if a == 0 else -1)


def test_bernoulli_values():
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)
    assert all(bernoulli(k) == 0 for k in range(3, 40, 2))
    signs = [bernoulli(2 * k) > 0 for k in range(1, 15)]
    assert signs == [k % 2 == 1 for k in range(1, 15)]


def test_zeta_at_negative_odd_integers():
    assert zeta_nonpositive(2) == Fraction(-1, 12)
    assert zeta_nonpositive(4) == Fraction(1, 120)
    with pytest.raises(ValueError):
        zeta_nonpositive(3)


def test_generalized_bernoulli_known():
    # B_{1, chi_{-4}} = -1/2, B_{1, chi_{-3}} = -1/3
    assert generalized_bernoulli(1, QuadCharacter(-4)) == Fraction(-1, 2)
    assert generalized_bernoulli(1, QuadCharacter(-3)) == Fraction(-1, 3)
    # L(-1, chi_5) = -2/5 and L(-1, chi_28) = -8 by direct summation
    assert dirichlet_L_nonpositive(2, QuadCharacter(5)) == Fraction(-2, 5)
    assert generalized_bernoulli(2, QuadCharacter(28)) == 16
    assert dirichlet_L_nonpositive(2, QuadCharacter(28)) == -8


def brute_generalized_bernoulli(k, D):
    """Oracle: B_{k,chi} from the generating function sum chi(a) t e^{at}/(e^{Ft}-1),
    evaluated through Bernoulli polynomials written out from their definition."""
    F = abs(D)

    def bpoly(x):
        return sum(math.comb(k, j) * bernoulli(j) * x ** (k - j) for j in range(k + 1))

    return F ** (k - 1) * sum(kronecker(D, a) * bpoly(Fraction(a, F)) for a in range(1, F + 1))


@pytest.mark.parametrize("D", [-3, -4, -7, -8, 5, 8, 12, 13, -15, 28, -56])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_generalized_bernoulli_against_definition(D, k):
    assert generalized_bernoulli(k, QuadCharacter(D)) == brute_generalized_bernoulli(k, D)


def test_principal_character_rejected():
    with pytest.raises(ValueError):
        dirichlet_L_nonpositive(2, QuadCharacter(1))
    with pytest.raises(ValueError):
        QuadCharacter(12 * 3)


def test_fundamental_discriminants():
    assert [fundamental_discriminant(m) for m in (-1, -3, 7, 12, -7 * 15)] == [-4, -3, 28, 12, -420]
    assert is_fundamental_discriminant(-4) and not is_fundamental_discriminant(-16)


@pytest.mark.parametrize("b", [b for b in range(1, 201) if is_squarefree(b)])
def test_class_number_two_paths(b):
    D = fundamental_discriminant(-b)
    analytic = Fraction(units_count(D), 2) * -generalized_bernoulli(1, QuadCharacter(D))
    assert class_number_imag(b) == analytic


def test_class_number_known():
    assert [class_number_disc(D) for D in (-3, -4, -23, -47, -71, -163)] == [1, 1, 3, 5, 7, 1]
    assert class_number_disc(-12) == 1  # non-fundamental, primitive forms only


@given(st.integers(1, 3000).filter(is_squarefree))
def test_genus_theory_floor(b):
    D = fundamental_discriminant(-b)
    t = len(factorize(abs(D)))
    assert v2(class_number_disc(D)) >= t - 1


def test_w_k_values():
    # w_1 = 2 for fields other than Q(i), Q(sqrt -3); w_2(Q) = 24
    assert w_k_quadratic(1, 5) == 2
    assert w_k_quadratic(1, -4) == 4 and w_k_quadratic(1, -3) == 6
    assert w_k_quadratic(2, 1) == 24
    assert w_k_quadratic(2, 12) == 24 and w_k_quadratic(2, 8) == 24 * 2
    assert w_k_quadratic(2, 5) == 24 * 5


@given(st.lists(st.integers(1, 400), min_size=3, max_size=3), st.sampled_from([28, 44, 52, 60, 68, 116]))
def test_square_linked_is_equivalence(ns, M):
    a, b, c = ns
    assert square_linked(a, a, M)
    assert square_linked(a, b, M) == square_linked(b, a, M)
    if square_linked(a, b, M) and square_linked(b, c, M):
        assert square_linked(a, c, M)


def test_square_class_at():
    assert square_class_at(12, 2) == (0, 3)
    assert square_class_at(18, 3) == (0, -1)
    assert square_linked(15, 23, 28) and not square_linked(15, 19, 28)


def test_valuations():
    assert v2(Fraction(4, 3)) == 2
    assert v2_sqrt(4) == 1
    assert v2(0) == math.inf
    assert v2(Fraction(2, 3) * 4) - v2_sqrt(4) == 2
