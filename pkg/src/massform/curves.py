"""Elliptic curves y^2 = P(x): traces of Frobenius, minimal models, periods,
numerical central L-values of quadratic twists, and 2-adic valuation bounds
for representation numbers of ternary forms.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .numtheory import (
    INF,
    factorize,
    fundamental_discriminant,
    is_prime,
    kronecker,
    omega_odd,
    prime_divisors,
    primes_up_to,
    squarefree_part,
    v2,
    valuation,
)

if TYPE_CHECKING:
    from .genus import GenusDescriptor

AInvariants = tuple[int, int, int, int, int]


@dataclass(frozen=True)
class CurveModel:
    """The curve y^2 = x^3 + c2 x^2 + c1 x + c0."""

    P: tuple[int, int, int, int]
    label: str = ""
    manin: int = 1
    conductor: int | None = None

    def __post_init__(self) -> None:
        P = tuple(int(c) for c in self.P)
        if len(P) != 4 or P[0] != 1:
            raise ValueError("P must be a monic cubic [1, c2, c1, c0]")
        object.__setattr__(self, "P", P)
        if cubic_discriminant(P) == 0:
            raise ValueError("P has a repeated root")

    @classmethod
    def from_ainvs(cls, a: Sequence[int], **kw) -> CurveModel:
        """Model y^2 = x^3 + b2 x^2 + 8 b4 x + 16 b6, isomorphic over Z[1/2]."""
        b2, b4, b6, _ = b_invariants(tuple(a))
        return cls((1, b2, 8 * b4, 16 * b6), **kw)

    @property
    def ainvs(self) -> AInvariants:
        _, c2, c1, c0 = self.P
        return (0, c2, 0, c1, c0)

    @property
    def discriminant(self) -> int:
        """Discriminant of the Weierstrass model (16 disc(P))."""
        return 16 * cubic_discriminant(self.P)

    def twist(self, m: int) -> CurveModel:
        """The quadratic twist by Q(sqrt m): y^2 = x^3 + m c2 x^2 + m^2 c1 x + m^3 c0."""
        _, c2, c1, c0 = self.P
        return CurveModel((1, m * c2, m * m * c1, m**3 * c0), label=f"{self.label}^({m})")

    def evaluate(self, x: int) -> int:
        _, c2, c1, c0 = self.P
        return ((x + c2) * x + c1) * x + c0


def cubic_discriminant(P: Sequence[int]) -> int:
    _, a, b, c = P
    return a * a * b * b - 4 * b**3 - 4 * a**3 * c - 27 * c * c + 18 * a * b * c


def b_invariants(a: AInvariants) -> tuple[int, int, int, int]:
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def c_invariants(a: AInvariants) -> tuple[int, int, int]:
    """(c4, c6, Delta) of a Weierstrass model."""
    b2, b4, b6, b8 = b_invariants(a)
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return c4, c6, disc


def _kraus_ok(c4: int, c6: int) -> bool:
    """Whether (c4, c6) are the invariants of an integral Weierstrass model."""
    if c6 and valuation(c6, 3) == 2:
        return False
    if c6 % 4 == 3:
        return True
    return c4 % 16 == 0 and c6 % 32 in (0, 8)


def _model_from_c(c4: int, c6: int) -> AInvariants:
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4 = (b2 * b2 - c4) // 24
    b6 = (-(b2**3) + 36 * b2 * b4 - c6) // 216
    a1 = b2 % 2
    a3 = b6 % 2
    return (a1, (b2 - a1) // 4, a3, (b4 - a1 * a3) // 2, (b6 - a3) // 4)


def minimal_model(a: AInvariants) -> tuple[AInvariants, int]:
    """A global minimal model and the scaling u with Delta = u^12 Delta_min."""
    c4, c6, disc = c_invariants(a)
    u = 1
    for p in prime_divisors(disc):
        e = valuation(disc, p) // 12
        if c4:
            e = min(e, valuation(c4, p) // 4)
        if c6:
            e = min(e, valuation(c6, p) // 6)
        # for p > 3 every admissible scaling is realisable; at 2 and 3 back off
        while e > 0 and p <= 3 and not _kraus_ok(c4 // p ** (4 * e), c6 // p ** (6 * e)):
            e -= 1
        if e:
            u *= p**e
            c4 //= p ** (4 * e)
            c6 //= p ** (6 * e)
    model = _model_from_c(c4, c6)
    if c_invariants(model)[:2] != (c4, c6):
        raise ArithmeticError("failed to reconstruct a model from (c4, c6)")
    return model, u


# ---------------------------------------------------------------------------
# traces of Frobenius


def _ap_minimal_two(a: AInvariants) -> int:
    a1, a2, a3, a4, a6 = a
    count = 1
    for x in range(2):
        for y in range(2):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                count += 1
    return 3 - count


def ap(curve: CurveModel, p: int) -> int:
    """a_p = p + 1 - #E(F_p) on the model y^2 = P(x), for odd p of good reduction."""
    if p == 2 or not is_prime(p):
        raise ValueError("p must be an odd prime")
    if curve.discriminant % p == 0:
        raise ValueError(f"the model has bad reduction at {p}")
    from ._kernels import ap_odd

    _, c2, c1, c0 = curve.P
    a = int(ap_odd(c2, c1, c0, p))
    assert a * a <= 4 * p, "Hasse bound violated"
    return a


def ap_minimal(a: AInvariants, p: int) -> int:
    """a_p at any prime p, read off a model that is minimal at p."""
    if p == 2:
        return _ap_minimal_two(a)
    from ._kernels import ap_odd

    b2, b4, b6, _ = b_invariants(a)
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6; scale x by 4^{-1} mod p
    inv4 = pow(4, -1, p)
    # sum over x of (4x^3 + b2 x^2 + 2b4 x + b6 / p) = (4/p) * sum (x^3 + ...)
    c2 = b2 * inv4 % p
    c1 = 2 * b4 * inv4 % p
    c0 = b6 * inv4 % p
    val = int(ap_odd(c2, c1, c0, p))
    return val  # (4/p) = 1


def cubic_root_count(P: Sequence[int], q: int) -> int:
    """Number of distinct roots of the monic cubic P modulo an odd prime q."""
    _, c2, c1, c0 = P
    return sum(1 for x in range(q) if (((x + c2) * x + c1) * x + c0) % q == 0)


def t_E(curve: CurveModel, M: int) -> int:
    """Number of odd primes q | M for which the twist by M has even Tamagawa
    number at q, i.e. P has an odd number of roots mod q."""
    return sum(1 for q in prime_divisors(M) if q != 2 and cubic_root_count(curve.P, q) % 2)


# ---------------------------------------------------------------------------
# periods


def _agm(a: float, b: float) -> float:
    while abs(a - b) > 1e-15 * abs(a):
        a, b = (a + b) / 2, math.sqrt(a * b)
    return a


def real_period_plus(a: AInvariants) -> float:
    """Least positive real period of the invariant differential of a model."""
    b2, b4, b6, _ = b_invariants(a)
    # Y^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 with Y = 2y + a1 x + a3
    roots = np.roots([4.0, float(b2), 2.0 * b4, float(b6)])
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r)))
    if len(real) == 3:
        e3, e2, e1 = real
        return math.pi / _agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2))
    e1 = real[0]
    z = next(r for r in roots if abs(r.imag) >= 1e-9 * (1 + abs(r)))
    # complex conjugate pair: AGM(sqrt(e1-z), sqrt(e1-conj z)) starts real
    w = complex(e1 - z) ** 0.5
    return math.pi / _agm(abs(w.real), abs(w))


def real_period(a: AInvariants) -> float:
    """Omega = Omega^+ or 2 Omega^+ as E(R) has one or two components."""
    _, _, disc = c_invariants(a)
    om = real_period_plus(a)
    return 2 * om if disc > 0 else om


def _cagm(a: complex, b: complex) -> complex:
    for _ in range(200):
        g = cmath.sqrt(a * b)
        m = (a + b) / 2
        if abs(m - g) > abs(m + g):
            g = -g
        a, b = m, g
        if abs(a - b) <= 1e-15 * abs(a):
            break
    return a


def lattice_covolume(a: AInvariants) -> float:
    """Area of a fundamental parallelogram of the period lattice."""
    b2, b4, b6, _ = b_invariants(a)
    e1, e2, e3 = sorted(np.roots([4.0, float(b2), 2.0 * b4, float(b6)]), key=lambda z: -z.real)
    A, B, C = cmath.sqrt(e1 - e3), cmath.sqrt(e1 - e2), cmath.sqrt(e2 - e3)
    w1 = math.pi / _cagm(A, B)
    w2 = math.pi * 1j / _cagm(A, C)
    return abs((w1.conjugate() * w2).imag)


def imaginary_period(a: AInvariants) -> float:
    """Least positive t with i t in the period lattice."""
    _, _, disc = c_invariants(a)
    ratio = lattice_covolume(a) / real_period_plus(a)
    return ratio if disc > 0 else 2 * ratio


# ---------------------------------------------------------------------------
# L-series of twists


_AP_TABLES: dict[AInvariants, tuple[int, dict[int, int]]] = {}


def _ap_table(a: AInvariants, bound: int) -> dict[int, int]:
    """a_p for p <= bound; the largest table per curve is kept and reused."""
    cached = _AP_TABLES.get(a)
    if cached is not None and cached[0] >= bound:
        return cached[1]
    table = _compute_ap_table(a, bound)
    _AP_TABLES[a] = (bound, table)
    return table


def _compute_ap_table(a: AInvariants, bound: int) -> dict[int, int]:
    from ._kernels import ap_table

    primes = np.array([p for p in primes_up_to(bound) if p > 2], dtype=np.int64)
    b2, b4, b6, _ = b_invariants(a)
    out = {2: _ap_minimal_two(a)}
    # 4x^3 + b2 x^2 + 2 b4 x + b6 = 4 (x^3 + b2/4 x^2 + b4/2 x + b6/4); work with
    # 16 * that at x/4 to stay integral: X^3 + b2 X^2 + 8 b4 X + 16 b6, X = 4x
    vals = ap_table(b2, 8 * b4, 16 * b6, primes)
    for p, v in zip(primes.tolist(), vals.tolist()):
        out[p] = v
    return out


def twist_conductor(N: int, m: int) -> int:
    """Conductor of the twist by Q(sqrt m) of a curve of conductor N that is
    semistable at every prime dividing the discriminant of Q(sqrt m)."""
    d = fundamental_discriminant(m)
    out = N
    for p in prime_divisors(d):
        e = valuation(N, p)
        if e > 1:
            raise ValueError("twist conductor needs semistable reduction at ramified primes")
        a = 1 if p != 2 else (3 if d % 8 == 0 else 2)
        out = out // p**e * p ** (2 * a)
    return out


def twist_coefficients(curve: CurveModel, m: int, T: int) -> list[int]:
    """a_n (n <= T) of the twist of ``curve`` by Q(sqrt m)."""
    tw = curve.twist(m)
    model, _ = minimal_model(tw.ainvs)
    N = curve_conductor(curve)
    base_model, _ = minimal_model(curve.ainvs)
    table = _ap_table(base_model, T)
    Nt = twist_conductor(N, m)
    d = fundamental_discriminant(m)
    a = [0] * (T + 1)
    a[1] = 1
    ap_of: dict[int, int] = {}
    for p in primes_up_to(T):
        if Nt % p == 0:
            ap_of[p] = _bad_ap(model, p, Nt)
        elif N % p == 0:
            ap_of[p] = ap_minimal(model, p)
        else:
            ap_of[p] = kronecker(d, p) * table[p]
    spf = _smallest_prime_factor(T)
    for n in range(2, T + 1):
        p = spf[n]
        k, r = 0, n
        while r % p == 0:
            r //= p
            k += 1
        pk = n // r
        if r > 1:
            a[n] = a[pk] * a[r]
            continue
        # n = p^k
        if k == 1:
            a[n] = ap_of[p]
        elif Nt % p == 0:
            a[n] = a[n // p] * ap_of[p]
        else:
            a[n] = ap_of[p] * a[n // p] - p * a[n // (p * p)]
    return a


def _bad_ap(model: AInvariants, p: int, Nt: int) -> int:
    """a_p at a bad prime: 0 for additive, +-1 for multiplicative reduction."""
    if valuation(Nt, p) >= 2:
        return 0
    return ap_minimal(model, p)


@lru_cache(maxsize=64)
def _smallest_prime_factor(T: int) -> list[int]:
    spf = list(range(T + 1))
    for p in range(2, math.isqrt(T) + 1):
        if spf[p] == p:
            for q in range(p * p, T + 1, p):
                if spf[q] == q:
                    spf[q] = p
    return spf


def curve_conductor(curve: CurveModel) -> int:
    if curve.conductor is None:
        raise ValueError(f"curve {curve.label or curve.P} has no conductor recorded")
    return curve.conductor


@dataclass(frozen=True)
class LValue:
    """Numerical L(E^(m), 1) with the data used to obtain it."""

    m: int
    conductor: int
    sign: int
    value: float
    error: float
    period: float
    vanishing: bool

    @property
    def algebraic(self) -> float:
        """L(E^(m), 1) / Omega(E^(m))."""
        return 0.0 if self.vanishing else self.value / self.period


def _lseries_sum(a: Sequence[int], sqrtN: float, t: float) -> tuple[float, float]:
    n = np.arange(1, len(a), dtype=np.float64)
    an = np.asarray(a[1:], dtype=np.float64)
    first = np.sum(an / n * np.exp(-2 * math.pi * n * t / sqrtN))
    second = np.sum(an / n * np.exp(-2 * math.pi * n / (t * sqrtN)))
    return float(first), float(second)


NORMALIZATIONS = ("minimal", "base")


def numeric_L(
    curve: CurveModel, m: int, terms: int | None = None, normalization: str = "minimal"
) -> LValue:
    """L(E^(m), 1) through the approximate functional equation.

    ``normalization`` fixes the period attached to the twist: "minimal" uses
    Omega of a global minimal model of E^(m); "base" uses
    Omega^{sign m}(E) / sqrt|m|, with Omega^- the least imaginary period of E.

    The root number is chosen as the sign that makes the sum independent of
    the auxiliary parameter t (evaluated at t = 1 and t = 1.2); a value that
    is tiny relative to the leading term is reported as vanishing.
    """
    N = twist_conductor(curve_conductor(curve), m)
    sqrtN = math.sqrt(N)
    if terms is None:
        terms = int(6 * sqrtN) + 50
    a = twist_coefficients(curve, m, terms)
    s1 = _lseries_sum(a, sqrtN, 1.0)
    s2 = _lseries_sum(a, sqrtN, 1.2)
    best = None
    for eps in (1, -1):
        v1 = s1[0] + eps * s1[1]
        v2_ = s2[0] + eps * s2[1]
        gap = abs(v1 - v2_)
        if best is None or gap < best[0]:
            best = (gap, eps, v1)
    gap, eps, val = best
    other = abs((s1[0] - eps * s1[1]) - (s2[0] - eps * s2[1]))
    if other < 1e3 * gap and abs(val) > 1e-6:
        raise ArithmeticError(f"could not determine the root number for m={m}")
    if normalization == "minimal":
        tw_model, _ = minimal_model(curve.twist(m).ainvs)
        period = real_period(tw_model)
    elif normalization == "base":
        base, _ = minimal_model(curve.ainvs)
        om = real_period(base) if m > 0 else imaginary_period(base)
        period = om / math.sqrt(abs(m))
    else:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    vanishing = eps == -1 or abs(val) < 1e-8
    return LValue(m, N, eps, 0.0 if vanishing else val, gap, period, vanishing)


def algebraic_L(curve: CurveModel, m: int, normalization: str = "minimal") -> float:
    """L(E^(m), 1) / Omega(E^(m)) as a float."""
    return numeric_L(curve, m, normalization=normalization).algebraic


# ---------------------------------------------------------------------------
# 2-adic valuation bounds


@dataclass(frozen=True)
class BoundReport:
    n: int
    mu: int
    tE: int
    bound: Fraction
    actual: Fraction | float
    satisfied: bool
    kappa: int
    rule: str

    @property
    def ceiling(self) -> int:
        return math.ceil(self.bound)

    def csv_row(self) -> str:
        act = "inf" if self.actual == INF else str(self.actual)
        return f"{self.n},{self.mu},{self.tE},{self.bound.numerator},{self.bound.denominator},{act},{int(self.satisfied)}"


@dataclass(frozen=True)
class GenusConstants:
    """Constants of the valuation bound for a two-class ternary genus."""

    xi: Fraction
    A_rows: dict[int, Fraction | float]
    B_rows: dict[int, Fraction | float]
    A: Fraction
    B: Fraction
    kappa: int


def a_constant(xi: Fraction, a_n0: int, L_n0: Fraction, manin: int = 1) -> Fraction | float:
    """v2(xi a_{n0} / sqrt L(n0)) - (1 + v2(manin)) / 2; +inf when a_{n0} = 0."""
    if a_n0 == 0 or L_n0 == 0:
        return INF
    return v2(xi * a_n0) - v2(L_n0) / 2 - (1 + v2(manin)) / 2


def genus_constants(genus: GenusDescriptor) -> GenusConstants:
    """xi, A, B and kappa from the bundled L-value table of a genus.

    kappa = max(2 (A - B + 1 - mu(D°)), 1), B the least v2(lambda_f) over the
    square classes.
    """
    from .modforms import theta_difference
    from .siegel import lambda_f, sfrak_representatives

    if genus.lvalues is None:
        raise ValueError("genus has no L-value table")
    xi = genus.xi_g
    n0s = sorted(genus.lvalues)
    theta = theta_difference(genus, max(n0s))
    manin = genus.curve.manin if genus.curve else 1
    A_rows = {n0: a_constant(xi, theta.coeffs[n0], genus.lvalues[n0], manin) for n0 in n0s}
    f = genus.f
    reps = sfrak_representatives(genus.level, bound=2000, D=f.D)
    B_rows = {}
    for n0 in n0s:
        if math.gcd(n0, 2 * f.D) == 1 and squarefree_part(n0) == n0:
            B_rows[n0] = v2(lambda_f(f, n0))
        else:
            B_rows[n0] = INF
    B = min(v2(lambda_f(f, s)) for s in reps.representatives)
    finite = [v for v in A_rows.values() if v != INF]
    A = min(finite)
    kappa = max(int(2 * (A - B + 1 - omega_odd(genus.D_sq))), 1)
    return GenusConstants(xi, A_rows, B_rows, A, B, kappa)


def valuation_bound(genus: GenusDescriptor, n: int, constants: GenusConstants | None = None) -> BoundReport:
    """Lower bound for v2(r_f(n)) and the actual valuation.

    For mu(n) >= kappa the bound is A + t_E(n*)/2; otherwise the minimum of
    A_{n0} + t_E(n*)/2 (n0 the table entry linked to n) and
    B_{n} + v2(h(-n D°)).
    """
    from .numtheory import class_number_imag, square_linked
    from .siegel import lambda_f

    if constants is None:
        constants = genus_constants(genus)
    if genus.curve is None:
        raise ValueError("genus has no curve")
    f = genus.f
    mu = omega_odd(n)
    nstar = n if n % 4 == 1 else -n
    tE = t_E(genus.curve, abs(nstar))
    if mu >= constants.kappa:
        bound = constants.A + Fraction(tE, 2)
        rule = "uniform"
    else:
        linked = [n0 for n0 in constants.A_rows if square_linked(n, n0, genus.level)]
        cands = [constants.A_rows[n0] + Fraction(tE, 2) for n0 in linked if constants.A_rows[n0] != INF]
        lam = lambda_f(f, n)
        if lam != 0:
            cands.append(v2(lam) + v2(class_number_imag(genus.D_sq * n)))
        bound = min(cands) if cands else Fraction(0)
        rule = "linked"
    actual = v2(genus.theta_coeff(0, n))
    return BoundReport(n, mu, tE, Fraction(bound), actual, actual >= bound, constants.kappa, rule)
