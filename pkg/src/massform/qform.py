"""Positive definite integral quadratic forms given by even Gram matrices.

The form attached to a Gram matrix A is f(x) = x^T A x / 2, so a diagonal
form b_1 x_1^2 + ... + b_d x_d^2 has A = 2 diag(b).
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class QuadForm:
    gram: Matrix
    diagonal_coeffs: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        g = tuple(tuple(int(v) for v in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        d = len(g)
        if d == 0 or any(len(row) != d for row in g):
            raise ValueError("Gram matrix must be square and nonempty")
        for i in range(d):
            if g[i][i] % 2:
                raise ValueError("Gram matrix must have even diagonal")
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        for k in range(1, d + 1):
            if _det([row[:k] for row in g[:k]]) <= 0:
                raise ValueError("form is not positive definite")
        diag = all(g[i][j] == 0 for i in range(d) for j in range(d) if i != j)
        if diag:
            b = tuple(g[i][i] // 2 for i in range(d))
            if self.diagonal_coeffs is not None and tuple(self.diagonal_coeffs) != b:
                raise ValueError("diagonal_coeffs disagree with the Gram matrix")
            object.__setattr__(self, "diagonal_coeffs", b)
        elif self.diagonal_coeffs is not None:
            raise ValueError("diagonal_coeffs given for a non-diagonal form")

    @property
    def dim(self) -> int:
        return len(self.gram)

    @property
    def is_diagonal(self) -> bool:
        return self.diagonal_coeffs is not None

    @property
    def det(self) -> int:
        """Determinant of the Gram matrix."""
        return _det(self.gram)

    @property
    def D(self) -> int:
        """Product of the coefficients of a diagonal form."""
        if self.diagonal_coeffs is None:
            raise ValueError("D is only defined for diagonal forms")
        return math.prod(self.diagonal_coeffs)

    def value(self, x: Sequence[int]) -> int:
        g = self.gram
        d = self.dim
        s = 0
        for i in range(d):
            s += g[i][i] // 2 * x[i] * x[i]
            for j in range(i + 1, d):
                s += g[i][j] * x[i] * x[j]
        return s

    def bilinear(self, x: Sequence[int], y: Sequence[int]) -> int:
        """x^T A y (so bilinear(x, x) = 2 f(x))."""
        return sum(x[i] * self.gram[i][j] * y[j] for i in range(self.dim) for j in range(self.dim))

    def gram_hash(self) -> str:
        text = ",".join(str(v) for row in self.gram for v in row)
        return hashlib.sha256(text.encode()).hexdigest()

    def blocks(self) -> list[list[int]]:
        """Index sets of the finest orthogonal splitting of the Gram matrix."""
        d = self.dim
        parent = list(range(d))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(d):
            for j in range(i + 1, d):
                if self.gram[i][j]:
                    parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(d):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    def sub(self, idx: Sequence[int]) -> QuadForm:
        return QuadForm(tuple(tuple(self.gram[i][j] for j in idx) for i in idx))

    def __str__(self) -> str:
        if self.diagonal_coeffs is not None:
            return "diag(" + ",".join(map(str, self.diagonal_coeffs)) + ")"
        return "gram" + str([list(r) for r in self.gram])


def _det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free Gaussian elimination (Bareiss)."""
    a = [list(r) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def from_diagonal(b: Sequence[int]) -> QuadForm:
    b = tuple(int(v) for v in b)
    if not b or min(b) < 1:
        raise ValueError("diagonal coefficients must be positive")
    if reduce(math.gcd, b) != 1:
        raise ValueError("diagonal coefficients must be coprime")
    d = len(b)
    gram = tuple(tuple(2 * b[i] if i == j else 0 for j in range(d)) for i in range(d))
    return QuadForm(gram, b)


def from_ternary(coeffs: Sequence[int]) -> QuadForm:
    """Ternary form [a1..a6] = a1x^2 + a2y^2 + a3z^2 + a4yz + a5xz + a6xy."""
    a1, a2, a3, a4, a5, a6 = (int(c) for c in coeffs)
    return QuadForm(((2 * a1, a6, a5), (a6, 2 * a2, a4), (a5, a4, 2 * a3)))


def inverse(f: QuadForm) -> list[list[Fraction]]:
    """Exact inverse of the Gram matrix."""
    d = f.dim
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(f.gram)]
    for c in range(d):
        piv = next(r for r in range(c, d) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [v * inv for v in a[c]]
        for r in range(d):
            if r != c and a[r][c] != 0:
                t = a[r][c]
                a[r] = [vr - t * vc for vr, vc in zip(a[r], a[c])]
    return [row[d:] for row in a]


def level(f: QuadForm) -> int:
    """Least N with N A^{-1} integral and of even diagonal."""
    inv = inverse(f)
    d = f.dim
    N = 1
    for i in range(d):
        N = math.lcm(N, (inv[i][i] / 2).denominator)
        for j in range(i + 1, d):
            N = math.lcm(N, inv[i][j].denominator)
    return N


# ---------------------------------------------------------------------------
# theta series


@dataclass(frozen=True)
class ThetaSeries:
    form: QuadForm
    precision: int
    coeffs: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        if n > self.precision:
            raise IndexError(f"theta series known only up to {self.precision}")
        return self.coeffs[n]


def _unary(b: int, N: int) -> list[int]:
    s = [0] * (N + 1)
    s[0] = 1
    x = 1
    while b * x * x <= N:
        s[b * x * x] += 2
        x += 1
    return s


def _series_mul(s: Sequence[int], t: Sequence[int], N: int) -> list[int]:
    """Truncated product of two power series.

    Accumulates shifted copies of ``s``, one per nonzero term of ``t``, which
    is cheap when ``t`` is sparse (unary series).  Falls back to Python
    integers when int64 could overflow.
    """
    bound = max(s[: N + 1]) * sum(t[: N + 1])
    dtype = np.int64 if bound < 2**62 else object
    a = np.array([int(v) for v in s[: N + 1]], dtype=dtype)
    a = np.concatenate([a, np.zeros(N + 1 - len(a), dtype=dtype)])
    out = np.zeros(N + 1, dtype=dtype)
    for j, c in enumerate(t[: N + 1]):
        if c:
            out[j:] += int(c) * a[: N + 1 - j]
    return [int(v) for v in out]


def theta_diagonal(b: Sequence[int], N: int) -> ThetaSeries:
    """Theta series of a diagonal form as a product of unary series."""
    f = from_diagonal(b)
    coeffs = [1] + [0] * N
    for bi in sorted(b):
        coeffs = _series_mul(coeffs, _unary(bi, N), N)
    return ThetaSeries(f, N, tuple(coeffs))


def enumerate_exact(f: QuadForm, N: int) -> list[int]:
    """Reference enumerator with exact rational bounds (slow, used for checks).

    Outermost coordinate is x_{d-1}; the bound at each level comes from the
    exact decomposition, so no boundary vector is missed.
    """
    d = f.dim
    counts = [0] * (N + 1)
    x = [0] * d
    U, qq = _upper_ldl(f)

    def walk(i: int, budget: Fraction) -> None:
        c = -sum((U[i][j] * x[j] for j in range(i + 1, d)), Fraction(0))
        # (x_i - c)^2 <= budget / qq[i]
        r2 = budget / qq[i]
        lo = _ceil_root_lo(c, r2)
        hi = _floor_root_hi(c, r2)
        for xi in range(lo, hi + 1):
            x[i] = xi
            rest = budget - qq[i] * (xi - c) ** 2
            if i == 0:
                counts[f.value(x)] += 1
            else:
                walk(i - 1, rest)
        x[i] = 0

    walk(d - 1, Fraction(N))
    return counts


def _upper_ldl(f: QuadForm) -> tuple[list[list[Fraction]], list[Fraction]]:
    """f(x) = sum_i q_i (x_i + sum_{j>i} U[i][j] x_j)^2 (exact)."""
    d = f.dim
    a = [[Fraction(f.gram[i][j], 2) for j in range(d)] for i in range(d)]
    U = [[Fraction(0)] * d for _ in range(d)]
    q = [Fraction(0)] * d
    for i in range(d):
        q[i] = a[i][i]
        for j in range(i + 1, d):
            U[i][j] = a[i][j] / q[i]
        for j in range(i + 1, d):
            for k in range(i + 1, d):
                a[j][k] -= a[i][j] * a[i][k] / q[i]
    return U, q


def _ceil_root_lo(c: Fraction, r2: Fraction) -> int:
    """Least integer t with (t - c)^2 <= r2, assuming r2 >= 0."""
    t = math.floor(c - math.sqrt(float(r2))) - 1
    while (t - c) ** 2 > r2 and t < c:
        t += 1
    while (t - 1 - c) ** 2 <= r2:
        t -= 1
    return t


def _floor_root_hi(c: Fraction, r2: Fraction) -> int:
    t = math.ceil(c + math.sqrt(float(r2))) + 1
    while (t - c) ** 2 > r2 and t > c:
        t -= 1
    while (t + 1 - c) ** 2 <= r2:
        t += 1
    return t


def _float_ldl(f: QuadForm) -> tuple[np.ndarray, np.ndarray]:
    U, q = _upper_ldl(f)
    d = f.dim
    return (
        np.array([[float(U[i][j]) for j in range(d)] for i in range(d)]),
        np.array([float(v) for v in q]),
    )


def _theta_block(f: QuadForm, N: int) -> list[int]:
    if f.dim == 1:
        return _unary(f.gram[0][0] // 2, N)
    from . import _kernels

    L, qd = _float_ldl(f)
    A = np.array(f.gram, dtype=np.int64)
    eps = 1e-6 * (1.0 + N)
    counts = _kernels.count_norms(A, L, qd, N, eps)
    return [int(v) for v in counts]


def cache_dir() -> Path | None:
    d = os.environ.get("MASSFORM_CACHE_DIR")
    return Path(d) if d else None


def _cache_path(f: QuadForm) -> Path | None:
    d = cache_dir()
    return d / f"theta-{f.gram_hash()[:32]}.txt" if d else None


def read_theta_cache(f: QuadForm, N: int) -> list[int] | None:
    path = _cache_path(f)
    if path is None or not path.exists():
        return None
    with path.open() as fh:
        head = fh.readline().split()
        if len(head) != 4 or head[:2] != ["theta", "v1"] or head[2] != f.gram_hash():
            return None
        if int(head[3]) < N:
            return None
        coeffs = [0] * (N + 1)
        for line in fh:
            n, r = line.split()
            n = int(n)
            if n <= N:
                coeffs[n] = int(r)
    return coeffs


def write_theta_cache(f: QuadForm, coeffs: Sequence[int]) -> None:
    path = _cache_path(f)
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with tmp.open("w") as fh:
        fh.write(f"theta v1 {f.gram_hash()} {len(coeffs) - 1}\n")
        for n, r in enumerate(coeffs):
            fh.write(f"{n} {r}\n")
    tmp.replace(path)


def theta_general(f: QuadForm, N: int) -> ThetaSeries:
    """Theta series to precision N of any positive definite form.

    The Gram matrix is split into orthogonal blocks; each block is enumerated
    (last coordinate outermost, one representative of each +-pair) and the
    block series are multiplied.
    """
    cached = read_theta_cache(f, N)
    if cached is not None:
        return ThetaSeries(f, N, tuple(cached))
    coeffs = [1] + [0] * N
    for idx in f.blocks():
        coeffs = _series_mul(coeffs, _theta_block(f.sub(idx), N), N)
    write_theta_cache(f, coeffs)
    return ThetaSeries(f, N, tuple(coeffs))


def theta(f: QuadForm, N: int) -> ThetaSeries:
    if f.is_diagonal:
        return theta_diagonal(f.diagonal_coeffs, N)
    return theta_general(f, N)


# ---------------------------------------------------------------------------
# short vectors and automorphisms


def short_vectors(f: QuadForm, N: int) -> Iterator[tuple[int, ...]]:
    """All x with 0 < f(x) <= N (both signs), via the exact decomposition."""
    d = f.dim
    U, q = _upper_ldl(f)
    x = [0] * d

    def walk(i: int, budget: Fraction) -> Iterator[tuple[int, ...]]:
        c = -sum((U[i][j] * x[j] for j in range(i + 1, d)), Fraction(0))
        r2 = budget / q[i]
        for xi in range(_ceil_root_lo(c, r2), _floor_root_hi(c, r2) + 1):
            x[i] = xi
            if i == 0:
                if any(x):
                    yield tuple(x)
            else:
                yield from walk(i - 1, budget - q[i] * (xi - c) ** 2)
        x[i] = 0

    yield from walk(d - 1, Fraction(N))


class CapExceeded(Exception):
    """Raised when a backtracking search explores more nodes than allowed."""


def automorphisms(f: QuadForm, cap: int = 10**7) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Yield every alpha with alpha^T A alpha = A, as tuples of column images.

    Basis vectors are processed by ascending norm; the image of e_i ranges
    over vectors of norm f(e_i) with the right inner products against the
    images already chosen.
    """
    d = f.dim
    g = f.gram
    order = sorted(range(d), key=lambda i: g[i][i])
    top = max(g[i][i] // 2 for i in range(d))
    by_norm: dict[int, list[tuple[int, ...]]] = {}
    for v in short_vectors(f, top):
        by_norm.setdefault(f.value(v), []).append(v)
    cands = [by_norm.get(g[i][i] // 2, []) for i in range(d)]
    order.sort(key=lambda i: (g[i][i], len(cands[i])))
    image: dict[int, tuple[int, ...]] = {}
    nodes = 0

    def rec(k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
        nonlocal nodes
        if k == d:
            yield tuple(image[i] for i in range(d))
            return
        i = order[k]
        for v in cands[i]:
            nodes += 1
            if nodes > cap:
                raise CapExceeded
            if all(f.bilinear(v, image[j]) == g[i][j] for j in order[:k]):
                image[i] = v
                yield from rec(k + 1)
                del image[i]

    yield from rec(0)


def automorphism_count(f: QuadForm, cap: int = 10**7) -> int | None:
    """|O(f)|, or None when the search exceeds ``cap`` nodes."""
    try:
        return sum(1 for _ in automorphisms(f, cap))
    except CapExceeded:
        return None
