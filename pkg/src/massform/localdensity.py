"""Local representation densities of diagonal forms.

delta_p(n, f) = p^{-beta(d-1)} #{x mod p^beta : f(x) = n mod p^beta} for beta
large enough, computed by exact counting, together with the closed forms
available at the unramified primes and, for ternary forms, at odd p | D.
The archimedean density is kept symbolic as c * pi^e * sqrt(s).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .numtheory import factorize, is_prime, is_squarefree, kronecker, valuation
from .qform import QuadForm, from_diagonal

# Largest number of residue vectors enumerated for a single non-diagonal block.
BLOCK_BUDGET = 3 * 10**6
# Safety cap on the empirical search for a stable exponent.
MAX_BETA = 16


class DensityBudgetExceeded(Exception):
    """Raised when counting mod p^beta would enumerate too many residues."""


def _prime_of(modulus: int) -> int:
    fac = factorize(modulus)
    if len(fac) != 1:
        raise ValueError(f"{modulus} is not a prime power")
    return fac[0][0]


def _block_histogram(block: QuadForm, m: int) -> np.ndarray:
    """Number of x in (Z/m)^k with block(x) = r mod m, for each residue r."""
    k = block.dim
    if k == 1:
        b = block.gram[0][0] // 2
        x = np.arange(m, dtype=np.int64)
        return np.bincount((b * x * x) % m, minlength=m).astype(object)
    if m**k > BLOCK_BUDGET:
        raise DensityBudgetExceeded(f"block of dimension {k} mod {m}")
    grids = np.meshgrid(*[np.arange(m, dtype=np.int64)] * k, indexing="ij")
    vals = np.zeros(grids[0].shape, dtype=np.int64)
    g = block.gram
    for i in range(k):
        vals += (g[i][i] // 2) * grids[i] * grids[i]
        for j in range(i + 1, k):
            vals += g[i][j] * grids[i] * grids[j]
    return np.bincount((vals % m).ravel(), minlength=m).astype(object)


@lru_cache(maxsize=64)
def _square_orbits(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Orbits of Z/m, m = p^k, under multiplication by unit squares.

    r = p^v u lies in the orbit labelled by v and the class of u modulo
    squares: the Legendre symbol for odd p, u mod 2^min(3, k - v) for p = 2.
    Returns (orbit id of each residue, one representative per orbit).
    """
    p = _prime_of(m)
    k = valuation(m, p)
    r = np.arange(m, dtype=np.int64)
    ids = np.zeros(m, dtype=np.int64)
    if p != 2:
        is_sq = np.zeros(p, dtype=bool)
        is_sq[(np.arange(1, p, dtype=np.int64) ** 2) % p] = True
    for v in range(k):
        pv = p**v
        mask = (r % pv == 0) & (r % (pv * p) != 0)
        u = r[mask] // pv
        if p == 2:
            tag = u % 2 ** min(3, k - v) // 2
            ids[mask] = 1 + 4 * v + tag
        else:
            ids[mask] = 1 + 2 * v + np.where(is_sq[u % p], 0, 1)
    _, reps, dense = np.unique(ids, return_index=True, return_inverse=True)
    return dense, reps


def _cyclic_convolve(h1: np.ndarray, h2: np.ndarray, m: int) -> np.ndarray:
    """(h1 * h2)[c] = sum_a h1[a] h2[c - a] over Z/m.

    Value histograms of forms are invariant under r -> u^2 r, and so is the
    convolution, so only one c per unit-square orbit is evaluated.
    """
    ids, reps = _square_orbits(m)
    support = np.flatnonzero(h1)
    bound = int(sum(h1)) * int(max(h2))
    if bound < 2**62:
        a1 = h1[support].astype(np.int64)
        a2 = h2.astype(np.int64)
    else:
        a1, a2 = h1[support], h2
    vals = np.zeros(len(reps), dtype=object)
    for j, c in enumerate(reps):
        vals[j] = int(np.dot(a1, a2[(int(c) - support) % m]))
    return vals[ids]


@lru_cache(maxsize=256)
def value_histogram(f: QuadForm, m: int) -> np.ndarray:
    """Histogram of f(x) mod m over (Z/m)^d, built block by block.

    The returned array is shared between callers and must not be mutated.
    """
    hist = np.zeros(m, dtype=object)
    hist[0] = 1
    cache: dict[tuple, np.ndarray] = {}
    for idx in f.blocks():
        block = f.sub(idx)
        key = block.gram
        if key not in cache:
            cache[key] = _block_histogram(block, m)
        hist = _cyclic_convolve(hist, cache[key], m)
    return hist


def count_solutions_mod(f: QuadForm, n: int, modulus: int) -> int:
    """#{x in (Z/modulus)^d : f(x) = n mod modulus}.

    Orthogonal blocks are counted separately and their value histograms
    convolved, evaluating one residue per unit-square orbit.
    """
    if modulus < 2:
        raise ValueError("modulus must be at least 2")
    _prime_of(modulus)
    return int(value_histogram(f, modulus)[n % modulus])


def _disc(f: QuadForm) -> int:
    """D for diagonal f; det(Gram)/2 for other ternary forms."""
    if f.is_diagonal:
        return f.D
    if f.dim != 3:
        raise ValueError("non-diagonal local densities are implemented for ternary forms")
    return f.det // 2


def _check_args(f: QuadForm, n: int) -> int:
    D = _disc(f)
    if n < 1 or not is_squarefree(n):
        raise ValueError("n must be a positive squarefree integer")
    if math.gcd(n, 2 * D) != 1:
        raise ValueError("n must be coprime to 2D")
    return D


def _normalized(f: QuadForm, n: int, p: int, beta: int) -> Fraction:
    q = p**beta
    return Fraction(count_solutions_mod(f, n, q), q ** (f.dim - 1))


def beta_p(f: QuadForm, n: int, p: int, width: int = 2) -> int:
    """An exponent beta at which the normalized count has stabilized.

    Fixed values where they are known (p not dividing 2nD; p | n; p = 2 for
    ternary forms), otherwise the least beta, starting from 3 for p = 2 and
    1 + 2 v_p(D) for odd p, whose normalized count agrees with the next
    ``width - 1`` exponents.  Non-diagonal ternary forms use det(Gram)/2 for D
    and search from 3 + v_2(D) at p = 2.
    """
    D = _check_args(f, n)
    if p != 2 and (2 * n * D) % p:
        return 1
    if n % p == 0:
        return 2
    if p == 2 and f.dim == 3 and f.is_diagonal:
        return 3
    if p == 2:
        beta = 3 if f.is_diagonal else 3 + valuation(D, 2)
    else:
        beta = 1 + 2 * valuation(D, p)
    while beta <= MAX_BETA:
        base = _normalized(f, n, p, beta)
        if all(_normalized(f, n, p, beta + k) == base for k in range(1, width)):
            return beta
        beta += 1
    raise RuntimeError(f"no stable exponent found for p={p} up to {MAX_BETA}")


def _fraction_valuation(q: Fraction, p: int) -> int:
    return valuation(q.numerator, p) - valuation(q.denominator, p)


def odd_diagonal_model(f: QuadForm, n: int, p: int) -> QuadForm:
    """An integral diagonal form equivalent to f over Z_p, p odd.

    Pivoting on an entry of least valuation keeps every elimination step in
    GL(Z_p).  Each diagonal entry p^v u is replaced by p^v u' with u' in the square
    class of u, taking 1 or distinct primes prime to 2pn so the model stays
    primitive.
    """
    if p == 2:
        raise ValueError("p must be odd")
    A = [[Fraction(x, 2) for x in row] for row in f.gram]
    idx = list(range(f.dim))
    diag: list[Fraction] = []
    while idx:
        best = None
        for a in idx:
            for b in idx:
                if A[a][b] and (best is None or _fraction_valuation(A[a][b], p) < best[0]
                                or (_fraction_valuation(A[a][b], p) == best[0] and a == b and best[1] != best[2])):
                    best = (_fraction_valuation(A[a][b], p), a, b)
        if best is None:
            raise ValueError("degenerate form")
        _, i, j = best
        if i != j:
            for k in range(f.dim):
                A[i][k] += A[j][k]
            for k in range(f.dim):
                A[k][i] += A[k][j]
        piv = A[i][i]
        rest = [k for k in idx if k != i]
        for k in rest:
            c = A[k][i] / piv
            for l in range(f.dim):
                A[k][l] -= c * A[i][l]
            for l in range(f.dim):
                A[l][k] -= c * A[l][i]
        diag.append(piv)
        idx = rest
    coeffs = []
    used: set[int] = set()
    for a in diag:
        v = _fraction_valuation(a, p)
        unit = a / Fraction(p) ** v
        target = kronecker(unit.numerator * unit.denominator, p)
        u = next(
            u for u in range(1, 64 * p * p)
            if u not in used and (u == 1 or is_prime(u)) and u % p and math.gcd(u, 2 * n) == 1
            and kronecker(u, p) == target
        )
        used.add(u)
        coeffs.append(p**v * u)
    return from_diagonal(tuple(coeffs))


def delta_p_exact(f: QuadForm, n: int, p: int) -> Fraction:
    """delta_p(n, f) by exact counting at the exponent from ``beta_p``.

    Non-diagonal forms are first replaced by a diagonal Z_p-model at odd p.
    """
    if not f.is_diagonal and p != 2:
        _check_args(f, n)
        f = odd_diagonal_model(f, n, p)
    return _normalized(f, n, p, beta_p(f, n, p))


def delta_p_closed(f: QuadForm, n: int, p: int) -> Fraction:
    """delta_p(n, f) from closed formulas; ValueError outside their range."""
    _check_args(f, n)
    if not f.is_diagonal:
        raise ValueError("closed forms need a diagonal form")
    if p == 2:
        raise ValueError("no closed form at p = 2")
    d, D = f.dim, f.D
    if n % p == 0:
        if d % 2 == 0:
            raise ValueError("the p | n formula needs odd dimension")
        return 1 - Fraction(1, p ** (d - 1))
    if D % p:
        if d % 2:
            sign = (-1) ** ((d - 1) // 2)
            return 1 + Fraction(kronecker(sign * n * D, p), p ** ((d - 1) // 2))
        sign = (-1) ** (d // 2)
        return 1 - Fraction(kronecker(sign * D, p), p ** (d // 2))
    if d != 3:
        raise ValueError("closed forms at p | D exist only for ternary forms")
    units = [b for b in f.diagonal_coeffs if b % p]
    if len(units) == 2:
        return 1 - Fraction(kronecker(-units[0] * units[1], p), p)
    if len(units) == 1:
        return Fraction(1 + kronecker(n * units[0], p))
    raise ValueError("coefficients share the prime p")


def delta_p(f: QuadForm, n: int, p: int) -> Fraction:
    """Closed form where one applies, exact counting otherwise."""
    if not f.is_diagonal and p != 2:
        _check_args(f, n)
        f = odd_diagonal_model(f, n, p)
    try:
        return delta_p_closed(f, n, p)
    except ValueError:
        return delta_p_exact(f, n, p)


# ---------------------------------------------------------------------------
# archimedean density


def _split_square(q: Fraction) -> tuple[Fraction, Fraction]:
    """Write q = s^2 * t with t having squarefree numerator and denominator."""
    s, t = Fraction(1), Fraction(1)
    for part, inv in ((q.numerator, False), (q.denominator, True)):
        for p, e in factorize(part):
            sp, tp = p ** (e // 2), p ** (e % 2)
            s *= Fraction(1, sp) if inv else sp
            t *= Fraction(1, tp) if inv else tp
    return s, t


@dataclass(frozen=True)
class SymbolicDensity:
    """coeff * pi^pi_exponent * sqrt(radicand)."""

    coeff: Fraction
    pi_exponent: int
    radicand: Fraction

    def __float__(self) -> float:
        return float(self.coeff) * math.pi**self.pi_exponent * math.sqrt(self.radicand)

    def __str__(self) -> str:
        parts = [str(self.coeff)]
        if self.pi_exponent:
            parts.append("π" if self.pi_exponent == 1 else f"π^{self.pi_exponent}")
        if self.radicand != 1:
            parts.append(f"√({self.radicand})")
        return "·".join(parts)


def delta_infinity(f: QuadForm, n: int) -> SymbolicDensity:
    """pi^{d/2} n^{d/2-1} / (Gamma(d/2) sqrt D) in exact symbolic form."""
    if n < 1:
        raise ValueError("n must be positive")
    d, D = f.dim, f.D
    if d % 2:
        k = (d - 1) // 2
        # pi^{k+1/2} / Gamma(k+1/2) = 4^k k! / (2k)! * pi^k
        coeff = Fraction(4**k * math.factorial(k), math.factorial(2 * k))
        rad = Fraction(n ** (2 * k - 1), D) if k else Fraction(1, n * D)
        pi_exp = k
    else:
        k = d // 2
        coeff = Fraction(n ** (k - 1), math.factorial(k - 1))
        rad = Fraction(1, D)
        pi_exp = k
    s, t = _split_square(rad)
    return SymbolicDensity(coeff * s, pi_exp, t)


def density_product(f: QuadForm, n: int, primes: Sequence[int]) -> Fraction:
    """Product of delta_p(n, f) over the given primes."""
    out = Fraction(1)
    for p in primes:
        out *= delta_p(f, n, p)
    return out
