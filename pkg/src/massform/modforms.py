"""theta_f - theta_g for two-class ternary genera: Hecke operators T_{p^2}
in weight 3/2, eigenvalue extraction, the weight 2 Shimura lift, and the
Waldspurger ratio check |a_n| = |a_{n0}| sqrt(L(n) / L(n0)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .curves import CurveModel, algebraic_L, ap_minimal, minimal_model
from .genus import GenusDescriptor
from .numtheory import (
    fundamental_discriminant,
    is_squarefree,
    kronecker,
    prime_divisors,
    primes_up_to,
    square_linked,
)


@dataclass(frozen=True)
class CuspDifference:
    """a_n = r_f(n) - r_g(n) for 0 <= n <= N, a weight 3/2 cusp form."""

    genus: GenusDescriptor
    precision: int
    coeffs: tuple[int, ...]

    @property
    def level(self) -> int:
        return self.genus.level

    @property
    def character_modulus(self) -> int:
        """The character is kronecker(4D, .), with 4D = det(A_f)/2 for ternary f."""
        return self.genus.half_det

    def chi(self, m: int) -> int:
        return kronecker(self.character_modulus, m)

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]


def theta_difference(genus: GenusDescriptor, N: int) -> CuspDifference:
    if genus.class_number != 2:
        raise ValueError(f"genus {genus.name} has {genus.class_number} classes, not 2")
    tf = genus.theta(0, N)
    tg = genus.theta(1, N)
    coeffs = tuple(tf[n] - tg[n] for n in range(N + 1))
    assert coeffs[0] == 0
    return CuspDifference(genus, N, coeffs)


def hecke_Tp2(theta: CuspDifference, p: int, k: Fraction = Fraction(3, 2)) -> list[int]:
    """Coefficients b_n, n <= N/p^2, of theta | T_{p^2} in weight k = lambda + 1/2.

    b_n = a_{p^2 n} + chi(p) ((-1)^lambda n / p) p^(lambda-1) a_n
          + chi(p^2) p^(2 lambda - 1) a_{n/p^2}.
    """
    lam = int(k - Fraction(1, 2))
    if math.gcd(p, theta.level) != 1:
        raise ValueError(f"p = {p} divides the level {theta.level}")
    M = theta.precision // (p * p)
    if M < 1:
        raise ValueError("not enough coefficients for this p")
    a = theta.coeffs
    chi_p = theta.chi(p)
    chi_p2 = theta.chi(p * p)
    out = []
    for n in range(M + 1):
        b = a[p * p * n]
        mid = chi_p * kronecker((-1) ** lam * n, p) * a[n]
        b += mid * p ** (lam - 1) if lam >= 1 else Fraction(mid, p ** (1 - lam))
        if n % (p * p) == 0:
            b += chi_p2 * p ** (2 * lam - 1) * a[n // (p * p)]
        out.append(b)
    return out


class NotEigenform(ArithmeticError):
    pass


def hecke_eigenvalue(theta: CuspDifference, p: int, checks: int = 3) -> int:
    """lambda_p = b_n / a_n, required to agree for every n in range.

    At least 1 + ``checks`` nonzero a_n must be available.
    """
    b = hecke_Tp2(theta, p)
    ratio: Fraction | None = None
    used = 0
    for n in range(1, len(b)):
        if theta.coeffs[n] == 0:
            if b[n] != 0:
                raise NotEigenform(f"T_{p}^2 image has b_{n} = {b[n]} while a_{n} = 0")
            continue
        r = Fraction(b[n], theta.coeffs[n])
        if ratio is None:
            ratio = r
        elif r != ratio:
            raise NotEigenform(f"eigenvalue ratio differs at n = {n} for p = {p}")
        used += 1
    if ratio is None or used < 1 + checks:
        raise ValueError(f"not enough nonzero coefficients to extract lambda_{p}")
    if ratio.denominator != 1:
        raise NotEigenform(f"non-integral eigenvalue {ratio} for p = {p}")
    return int(ratio)


@dataclass(frozen=True)
class LiftSeries:
    """Weight 2 coefficients b_n of the Shimura lift from the eigenvalues."""

    eigenvalues: dict[int, int]
    coeffs: tuple[int, ...]
    level: int
    char_modulus: int

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]


def shimura_lift(theta: CuspDifference, prime_bound: int, M: int | None = None) -> LiftSeries:
    """Euler product prod_p (1 - lambda_p p^-s + chi(p^2) p^(1-2s))^-1, truncated.

    Coefficients b_n (n <= M) are supported on primes p <= prime_bound with
    p coprime to the level; other b_n are 0.
    """
    if M is None:
        M = prime_bound
    N = theta.level
    eig = {p: hecke_eigenvalue(theta, p) for p in primes_up_to(prime_bound) if N % p}
    b = [0] * (M + 1)
    b[1] = 1
    # prime power coefficients
    pp: dict[int, list[int]] = {}
    for p, lam in eig.items():
        c2 = theta.chi(p * p)
        seq = [1, lam]
        q = p * p
        while q <= M:
            seq.append(lam * seq[-1] - c2 * p * seq[-2])
            q *= p
        pp[p] = seq
    for n in range(2, M + 1):
        val = 1
        for p in prime_divisors(n):
            e = 0
            m = n
            while m % p == 0:
                m //= p
                e += 1
            if p not in pp:
                val = 0
                break
            val *= pp[p][e]
        b[n] = val
    return LiftSeries(eig, tuple(b), N // 2, theta.character_modulus)


def curve_ap(curve: CurveModel, p: int) -> int:
    """a_p of the curve at a prime of good reduction (via a minimal model)."""
    model, _ = minimal_model(curve.ainvs)
    return ap_minimal(model, p)


@dataclass(frozen=True)
class ShEReport:
    twist: int | None
    primes: tuple[int, ...]
    mismatches: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.twist is not None


def verify_sh_e(lift: LiftSeries, curve: CurveModel, prime_bound: int, D_sq: int) -> ShEReport:
    """Which twist t in {1, -1, D°, -D°} of the curve has a_p = lambda_p for all p <= bound."""
    disc = minimal_model(curve.ainvs)[0]
    from .curves import c_invariants

    delta = c_invariants(disc)[2]
    primes = tuple(
        p for p in sorted(lift.eigenvalues) if p <= prime_bound and delta % p and lift.level % p
    )
    aps = {p: curve_ap(curve, p) for p in primes}
    twists = []
    for t in (1, -1, D_sq, -D_sq):
        if t not in twists:
            twists.append(t)
    mismatches: dict[int, tuple[int, ...]] = {}
    for t in twists:
        dt = fundamental_discriminant(t) if t != 1 else 1
        bad = tuple(p for p in primes if kronecker(dt, p) * aps[p] != lift.eigenvalues[p])
        if not bad:
            return ShEReport(t, primes)
        mismatches[t] = bad
    return ShEReport(None, primes, mismatches)


@dataclass(frozen=True)
class WaldspurgerCheck:
    n: int
    n0: int
    a_n: int
    a_n0: int
    L_n: float
    L_n0: float
    predicted: float
    ok: bool


class NonVanishingViolated(ValueError):
    """L(n0) = 0: the reference twist cannot normalise the formula."""


def waldspurger_ratio_check(
    genus: GenusDescriptor,
    n: int,
    n0: int,
    curve: CurveModel | None = None,
    tolerance: float = 1e-3,
    theta: CuspDifference | None = None,
    normalization: str = "base",
) -> WaldspurgerCheck:
    """|a_n| against |a_{n0}| sqrt(L(n)/L(n0)), L(m) the algebraic value of the
    twist by -D° m.  Table values are used when bundled, numerical ones otherwise;
    the "base" period keeps the two sources on the same scale."""
    f_level = genus.level
    D = genus.D
    for m in (n, n0):
        if m < 1 or not is_squarefree(m) or math.gcd(m, 2 * D) != 1:
            raise ValueError(f"{m} must be squarefree and prime to 2D")
    if not square_linked(n, n0, f_level):
        raise ValueError(f"{n} and {n0} are not {f_level}-square-linked")
    curve = curve or genus.curve
    if theta is None or theta.precision < max(n, n0):
        theta = theta_difference(genus, max(n, n0))

    def L(m: int) -> float:
        if genus.lvalues and m in genus.lvalues:
            return float(genus.lvalues[m])
        if curve is None:
            raise ValueError("no curve to compute L-values with")
        return algebraic_L(curve, -genus.D_sq * m, normalization=normalization)

    L0 = L(n0)
    if abs(L0) < 1e-9:
        raise NonVanishingViolated(f"L({n0}) vanishes")
    Ln = L(n)
    a_n, a_n0 = theta[n], theta[n0]
    pred = abs(a_n0) * math.sqrt(max(Ln, 0.0) / L0)
    ok = abs(abs(a_n) - pred) <= tolerance * max(1.0, pred)
    return WaldspurgerCheck(n, n0, a_n, a_n0, Ln, L0, pred, ok)


def linked_n(genus: GenusDescriptor, n0: int, bound: int) -> list[int]:
    """Squarefree n <= bound prime to 2D that are level-square-linked to n0."""
    D = genus.D
    N = genus.level
    return [
        n
        for n in range(1, bound + 1)
        if math.gcd(n, 2 * D) == 1 and is_squarefree(n) and square_linked(n, n0, N)
    ]
