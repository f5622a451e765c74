"""Exact integer and rational number theory.

Factorization, Kronecker symbols, Bernoulli numbers (ordinary and twisted by
a quadratic character), values of zeta and quadratic L-functions at
non-positive integers, class numbers of imaginary quadratic fields, the
invariant w_k of a quadratic field, and square classes in Q_l.

Rationals are ``fractions.Fraction`` throughout.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

INF = math.inf
"""Marker for the valuation of zero."""


# ---------------------------------------------------------------------------
# primes and factorization

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (valid far beyond 2^64 with these bases)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=8)
def primes_up_to(n: int) -> tuple[int, ...]:
    """All primes p <= n (sieve of Eratosthenes)."""
    if n < 2:
        return ()
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        c = rng.randrange(1, n)
        f = lambda x: (x * x + c) % n  # noqa: E731
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


_TRIAL_LIMIT = 10**6


def factorize(m: int) -> list[tuple[int, int]]:
    """Prime factorization of m >= 1 as increasing (prime, exponent) pairs.

    Trial division up to 10^6, then Pollard rho on whatever is left.
    """
    if m < 1:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    p, step = 7, 4
    while p * p <= m and p <= _TRIAL_LIMIT:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += step
        step = 6 - step
    stack = [m] if m > 1 else []
    while stack:
        q = stack.pop()
        if is_prime(q):
            out[q] = out.get(q, 0) + 1
        else:
            d = _pollard_rho(q)
            stack.extend((d, q // d))
    return sorted(out.items())


def prime_divisors(m: int) -> list[int]:
    return [p for p, _ in factorize(abs(m))]


def format_factorization(m: int) -> str:
    """Render m like ``2^4·3·661·1481``; 1 renders as ``1``."""
    if m == 1:
        return "1"
    return "·".join(f"{p}^{e}" if e > 1 else str(p) for p, e in factorize(m))


def is_squarefree(m: int) -> bool:
    return m != 0 and all(e == 1 for _, e in factorize(abs(m)))


def squarefree_part(m: int) -> int:
    """The squarefree s with m/s a positive square (sign is kept)."""
    if m == 0:
        raise ValueError("squarefree part of 0 is undefined")
    s = 1
    for p, e in factorize(abs(m)):
        if e % 2:
            s *= p
    return s if m > 0 else -s


def omega_odd(n: int) -> int:
    """Number of distinct odd primes dividing n (written mu(n) in the tables)."""
    return sum(1 for p in prime_divisors(n) if p != 2)


def valuation(m: int, p: int) -> int:
    if m == 0:
        raise ValueError("valuation of 0")
    m = abs(m)
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Kronecker symbol


def kronecker(a: int, n: int) -> int:
    """The Kronecker symbol (a/n)."""
    if a == 0 and n == 0:
        raise ValueError("kronecker(0, 0) is undefined")
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        v = (n & -n).bit_length() - 1
        n >>= v
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # n is odd and positive now: Jacobi symbol
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# ---------------------------------------------------------------------------
# Bernoulli numbers and L-values


@lru_cache(maxsize=None)
def _bernoulli_table(k: int) -> tuple[Fraction, ...]:
    table = [Fraction(1)]
    for m in range(1, k + 1):
        s = sum(math.comb(m + 1, j) * table[j] for j in range(m))
        table.append(-s / (m + 1))
    return tuple(table)


def bernoulli(k: int) -> Fraction:
    """B_k with B_1 = -1/2."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k >= 3 and k % 2:
        return Fraction(0)
    return _bernoulli_table(k)[k]


def bernoulli_poly(k: int, x: Fraction) -> Fraction:
    return sum(
        (math.comb(k, j) * bernoulli(j) * x ** (k - j) for j in range(k + 1)),
        Fraction(0),
    )


def zeta_nonpositive(k: int) -> Fraction:
    """zeta(1 - k) for even k >= 2."""
    if k < 2 or k % 2:
        raise ValueError("zeta(1-k) is only provided for even k >= 2")
    return -bernoulli(k) / k


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1:
        return True
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def fundamental_discriminant(m: int) -> int:
    """Discriminant of Q(sqrt m) for any non-square m."""
    s = squarefree_part(m)
    return s if s % 4 == 1 else 4 * s


@dataclass(frozen=True)
class QuadCharacter:
    """The Kronecker character of a fundamental discriminant."""

    fundamental_discriminant: int

    def __post_init__(self) -> None:
        if not is_fundamental_discriminant(self.fundamental_discriminant):
            raise ValueError(f"{self.fundamental_discriminant} is not fundamental")

    @property
    def conductor(self) -> int:
        return abs(self.fundamental_discriminant)

    @property
    def is_principal(self) -> bool:
        return self.fundamental_discriminant == 1

    def __call__(self, n: int) -> int:
        return kronecker(self.fundamental_discriminant, n)


def generalized_bernoulli(k: int, chi: QuadCharacter) -> Fraction:
    """B_{k,chi} = F^(k-1) * sum_{a=1..F} chi(a) B_k(a/F)."""
    if k < 1:
        raise ValueError("k must be positive")
    F = chi.conductor
    # expand B_k(a/F) and collect power sums of chi(a)*a^i to stay in integers
    power_sums = [0] * (k + 1)
    for a in range(1, F + 1):
        c = chi(a)
        if c:
            t = c
            for i in range(k + 1):
                power_sums[i] += t
                t *= a
    total = Fraction(0)
    for j in range(k + 1):
        total += math.comb(k, j) * bernoulli(j) * Fraction(power_sums[k - j], F ** (k - j))
    return total * F ** (k - 1)


def dirichlet_L_nonpositive(k: int, chi: QuadCharacter) -> Fraction:
    """L(1 - k, chi) = -B_{k,chi}/k for a non-principal quadratic chi."""
    if chi.is_principal:
        raise ValueError("use zeta_nonpositive for the principal character")
    if k < 1:
        raise ValueError("k must be positive")
    return -generalized_bernoulli(k, chi) / k


# ---------------------------------------------------------------------------
# class numbers


def units_count(field_disc: int) -> int:
    """Number of roots of unity w_K of an imaginary quadratic field."""
    return {-3: 6, -4: 4}.get(field_disc, 2)


@lru_cache(maxsize=4096)
def class_number_disc(D: int) -> int:
    """Class number of primitive positive definite forms of discriminant D < 0."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError("need a negative discriminant")
    A = math.isqrt(-D // 3)
    a = np.arange(1, A + 1, dtype=np.int64)[:, None]
    b = np.arange(-A, A + 1, dtype=np.int64)[None, :]
    num = b * b - D
    ok = (np.abs(b) <= a) & (b != -a) & ((b - D) % 2 == 0) & (num % (4 * a) == 0)
    c = np.where(ok, num // (4 * a), 0)
    ok &= c >= a
    ok &= ~((c == a) & (b < 0))
    g = np.gcd(np.gcd(a, np.abs(b)), c)
    ok &= g == 1
    return int(ok.sum())


def class_number_imag(b: int) -> int:
    """h(-b): class number of Q(sqrt(-b)) for squarefree b >= 1."""
    if b < 1 or not is_squarefree(b):
        raise ValueError(f"{b} is not a positive squarefree integer")
    return class_number_disc(fundamental_discriminant(-b))


# ---------------------------------------------------------------------------
# w_k of a quadratic field


def _group_exponent(elements: Iterable[int], m: int) -> int:
    exp = 1
    for x in elements:
        y, order = x % m, 1
        while y != 1 % m:
            y = y * x % m
            order += 1
        exp = math.lcm(exp, order)
    return exp


def _galois_exponent(m: int, field_disc: int) -> int:
    """Exponent of Gal(F(zeta_m)/F) viewed inside (Z/m)^x."""
    units = [x for x in range(1, m + 1) if math.gcd(x, m) == 1]
    if field_disc != 1 and m % abs(field_disc) == 0:
        units = [x for x in units if kronecker(field_disc, x) == 1]
    return _group_exponent(units, m)


def w_k_quadratic(k: int, field_disc: int) -> int:
    """Largest N such that Gal(F(zeta_N)/F) is killed by k, F = Q(sqrt field_disc).

    Only primes l with (l - 1) | 2k can contribute: the image of
    Gal(F(zeta_l)/F) in (Z/l)^x has index at most 2.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if not is_fundamental_discriminant(field_disc):
        raise ValueError(f"{field_disc} is not a fundamental discriminant")
    w = 1
    for ell in primes_up_to(2 * k + 1):
        if (2 * k) % (ell - 1):
            continue
        a = 0
        while k % _galois_exponent(ell ** (a + 1), field_disc) == 0:
            a += 1
        w *= ell**a
    return w


# ---------------------------------------------------------------------------
# square classes and valuations


def square_class_at(n: int, ell: int) -> tuple[int, int]:
    """Square class of n in Q_ell^x as (v mod 2, unit tag).

    The tag is the Legendre symbol of the unit part for odd ell and the unit
    part mod 8 for ell = 2.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    v = valuation(n, ell)
    u = n // ell**v
    tag = u % 8 if ell == 2 else kronecker(u, ell)
    return (v % 2, tag)


def square_linked(n1: int, n2: int, M: int) -> bool:
    """True iff n1/n2 is a square in Q_ell for every prime ell | M."""
    if abs(M) < 2:
        raise ValueError("|M| must be at least 2")
    return all(square_class_at(n1, l) == square_class_at(n2, l) for l in prime_divisors(M))


def v2(q: Fraction | int) -> Fraction | float:
    """2-adic valuation of a rational; +inf for 0."""
    q = Fraction(q)
    if q == 0:
        return INF
    return Fraction(valuation(q.numerator, 2) - valuation(q.denominator, 2))


def v2_sqrt(q: Fraction | int) -> Fraction | float:
    """v2(sqrt q) = v2(q)/2, half-integral in general."""
    v = v2(q)
    return v if v == INF else v / 2
