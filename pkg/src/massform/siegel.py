"""Genus representation numbers and the Siegel mass formula.

For a form f of odd dimension d (diagonal when d >= 5) and squarefree n
prime to 2D the genus average G_f(n) = sum xi_g r_g(n) factors as

    d = 3:       G_f(n) = lambda_f(n) h(-n D°)
    d = 2k + 1:  G_f(n) = rho_f(n) L(1 - k, chi_K),

with lambda_f, rho_f built from finitely many local densities.  For
d = 1 mod 4 the L-value is rewritten through the order of K_{d-3}(O_F) of
F = Q(sqrt(nD)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .genus import GenusDescriptor, load_genus  # noqa: F401  (re-exported)
from .localdensity import delta_p
from .numtheory import (
    QuadCharacter,
    class_number_imag,
    dirichlet_L_nonpositive,
    fundamental_discriminant,
    is_squarefree,
    kronecker,
    prime_divisors,
    square_class_at,
    squarefree_part,
    units_count,
    w_k_quadratic,
    zeta_nonpositive,
)
from .qform import QuadForm


class HypothesisError(ValueError):
    """Input outside the range where the mass formula identities apply."""


def mass(genus: GenusDescriptor, n: int) -> Fraction:
    """G_f(n) = sum of xi_g r_g(n) over the classes of the genus."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return sum((x * genus.theta_coeff(i, n) for i, x in enumerate(genus.xi)), Fraction(0))


def _check(f: QuadForm, n: int) -> tuple[int, int, int]:
    if not f.is_diagonal:
        raise HypothesisError("the representative must be diagonal")
    if n < 1 or not is_squarefree(n):
        raise HypothesisError(f"n = {n} must be positive and squarefree")
    D = f.D
    if math.gcd(n, 2 * D) != 1:
        raise HypothesisError(f"n = {n} must be prime to 2D = {2 * D}")
    Dsq = squarefree_part(D)
    s = math.isqrt(D // Dsq)
    assert s * s * Dsq == D
    return D, Dsq, s


def _epsilon(field_disc: int, m: int) -> int:
    """The e in {1, 2} with field_disc = e^2 m for squarefree m."""
    e2 = field_disc // m
    return 1 if e2 == 1 else 2


def lambda_f(f: QuadForm, n: int) -> Fraction:
    """lambda_f(n) = G_f(n) / h(-n D°) for a ternary form f.

    (48 / w_K) / (e_K s' Delta°) * prod_{p | 2 Delta} delta_p (1 - chi(p)/p) / (1 - p^-2)
    where Delta = det(Gram)/2 = s'^2 Delta°, K = Q(sqrt(-n Delta°)) and
    D_K = -e_K^2 n Delta°.  For diagonal f, Delta = 4D and this is
    (24 / w_K) / (e_K s D°) times the same product over p | 2D.
    """
    if f.dim != 3:
        raise HypothesisError("lambda_f needs a ternary form")
    delta = f.det // 2
    if n < 1 or not is_squarefree(n):
        raise HypothesisError(f"n = {n} must be positive and squarefree")
    if math.gcd(n, 2 * delta) != 1:
        raise HypothesisError(f"n = {n} must be prime to {2 * delta}")
    dsq = squarefree_part(delta)
    s = math.isqrt(delta // dsq)
    m = -n * dsq
    dk = fundamental_discriminant(m)
    eps = _epsilon(dk, m)
    out = Fraction(48, units_count(dk)) / (eps * dsq * s)
    for p in prime_divisors(2 * delta):
        chi = kronecker(dk, p)
        out *= delta_p(f, n, p) * (1 - Fraction(chi, p)) / (1 - Fraction(1, p * p))
    return out


def rho_f(f: QuadForm, n: int) -> Fraction:
    """rho_f(n) = G_f(n) / L(1 - k, chi_K) for diagonal f of dimension 2k + 1 >= 5.

    2^(k-1) (-1)^floor(k/2) / (s D°^k e_K^(2k-1) zeta(1 - 2k))
      * prod_{p | 2D} delta_p (1 - chi(p)/p^k) / (1 - p^-2k)
    with K = Q(sqrt((-1)^k n D°)), D_K = e_K^2 (-1)^k n D° and D = s^2 D°.
    """
    d = f.dim
    if d < 5 or d % 2 == 0:
        raise HypothesisError("rho_f needs odd dimension at least 5")
    D, Dsq, s = _check(f, n)
    k = (d - 1) // 2
    m = (-1) ** k * n * Dsq
    dk = fundamental_discriminant(m)
    eps = _epsilon(dk, m)
    out = Fraction(2 ** (k - 1) * (-1) ** (k // 2)) / (
        s * Dsq**k * eps ** (2 * k - 1) * zeta_nonpositive(2 * k)
    )
    for p in prime_divisors(2 * D):
        chi = kronecker(dk, p)
        out *= delta_p(f, n, p) * (1 - Fraction(chi, p**k)) / (1 - Fraction(1, p ** (2 * k)))
    return out


def field_character(f: QuadForm, n: int) -> QuadCharacter:
    """chi_K for K = Q(sqrt((-1)^k n D°)), d = 2k + 1."""
    k = (f.dim - 1) // 2
    return QuadCharacter(fundamental_discriminant((-1) ** k * n * squarefree_part(f.D)))


@dataclass(frozen=True)
class SiegelCheck:
    n: int
    mass: Fraction
    lam: Fraction
    h: int

    @property
    def ok(self) -> bool:
        return self.mass == self.lam * self.h


def verify_siegel_d3(genus: GenusDescriptor, n: int) -> SiegelCheck:
    """Compare G_f(n) with lambda_f(n) h(-n D°) exactly."""
    f = genus.f
    lam = lambda_f(f, n)
    h = class_number_imag(n * squarefree_part(f.det // 2))
    return SiegelCheck(n, mass(genus, n), lam, h)


@dataclass(frozen=True)
class KGroupPrediction:
    """Predicted |K_{d-3}(O_F)| for F = Q(sqrt(nD)) from G_f(n)."""

    d: int
    n: int
    field_disc: int
    order: int
    w: int
    W: Fraction
    rho: Fraction
    mass: Fraction
    via_L: Fraction

    @property
    def paths_agree(self) -> bool:
        return self.order == self.via_L


class MassVanishes(ArithmeticError):
    """rho_f(n) = 0, so the mass carries no information about K-groups."""


def kgroup_order(genus: GenusDescriptor, n: int, G: Fraction | None = None) -> KGroupPrediction:
    """|K_{d-3}(O_F)| = G_f(n) W(F) zeta(1 - k) / rho_f(n), d = 2k + 1 = 1 mod 4.

    W(F) is w_k(F) for d = 5 mod 8 and w_k(F)/4 for d = 1 mod 8.  The order
    is cross-checked against |W zeta(1 - k) L(1 - k, chi_F)|.
    """
    f = genus.f
    d = f.dim
    if d < 5 or d % 4 != 1:
        raise HypothesisError("K-group orders need d = 1 mod 4 and d >= 5")
    k = (d - 1) // 2
    rho = rho_f(f, n)
    if rho == 0:
        raise MassVanishes(f"rho_f({n}) = 0")
    chi = field_character(f, n)
    if chi.fundamental_discriminant == 1:
        raise HypothesisError(f"n D = {n * f.D} is a square, so F = Q is not quadratic")
    w = w_k_quadratic(k, chi.fundamental_discriminant)
    W = Fraction(w) if d % 8 == 5 else Fraction(w, 4)
    z = zeta_nonpositive(k)
    if G is None:
        G = mass(genus, n)
    order = G * W * z / rho
    via_L = abs(W * z * dirichlet_L_nonpositive(k, chi))
    if order.denominator != 1 or order <= 0:
        raise ArithmeticError(f"non-integral K-group order {order} at n = {n}")
    return KGroupPrediction(d, n, chi.fundamental_discriminant, int(order), w, W, rho, G, via_L)


@dataclass(frozen=True)
class SfrakSet:
    """One representative per square class, smallest first found."""

    modulus: int
    representatives: tuple[int, ...]
    expected: int

    @property
    def complete(self) -> bool:
        return len(self.representatives) == self.expected


def _class_signature(n: int, primes: list[int]) -> tuple:
    return tuple(square_class_at(n, ell) for ell in primes)


def sfrak_representatives(M: int, bound: int = 10**4, D: int | None = None) -> SfrakSet:
    """Smallest squarefree n prime to 2D in each M-square-linked class."""
    if D is None:
        D = M
    primes = prime_divisors(M)
    expected = 1
    for ell in primes:
        if ell == 2:
            expected *= 4
        else:
            expected *= 2 if D % ell == 0 else 4
    seen: dict[tuple, int] = {}
    for n in range(1, bound + 1, 2):
        if math.gcd(n, D) != 1 or not is_squarefree(n):
            continue
        sig = _class_signature(n, primes)
        if sig not in seen:
            seen[sig] = n
            if len(seen) == expected:
                break
    return SfrakSet(M, tuple(sorted(seen.values())), expected)


def class_of(n: int, M: int) -> tuple:
    """Square class signature of n at the primes dividing M."""
    return _class_signature(n, prime_divisors(M))
