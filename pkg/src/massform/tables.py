"""Reproducible tables: K-group orders, multipliers, valuations and levels.

Every builder returns a :class:`Table` of strings so that the text and csv
renderings are byte-stable for fixed inputs.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .genus import GenusDescriptor, load_genus
from .numtheory import (
    class_number_imag,
    format_factorization,
    is_squarefree,
    omega_odd,
)
from .qform import level

TABLE_IDS = ("d5", "d9", "d13", "val-p7", "levels", "lambda", "rho")

# d13 rows above this n need the 12-dimensional mate enumerated far out.
D13_BUDGET = 39
D13_FULL = 97


def fmt_exact(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_float(x: float) -> str:
    return f"~{x:.6g}"


@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    def render(self, fmt: str = "text") -> str:
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.header)
            w.writerows(self.rows)
            return buf.getvalue()
        if fmt != "text":
            raise ValueError(f"unknown format {fmt!r}")
        cols = [self.header] + self.rows
        widths = [0] * len(self.header)
        for r in cols:
            for i, c in enumerate(r[: len(widths)]):
                widths[i] = max(widths[i], len(c))
        lines = []
        for r in cols:
            cells = [c.rjust(widths[i]) if i < len(widths) else c for i, c in enumerate(r)]
            lines.append("  ".join(cells).rstrip())
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> list[str]:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


def admissible(n: int, D: int) -> bool:
    """n squarefree and prime to 2D, the range of the multiplier identities."""
    return n >= 1 and is_squarefree(n) and math.gcd(n, 2 * D) == 1


def prefetch(genus: GenusDescriptor, N: int, threads: int | None = None) -> None:
    """Compute the theta series of every class to precision N, possibly in parallel."""
    k = len(genus.forms)
    if threads is None or threads <= 1 or k == 1:
        for i in range(k):
            genus.theta(i, N)
        return
    with ThreadPoolExecutor(max_workers=min(threads, k)) as pool:
        list(pool.map(lambda i: genus.theta(i, N), range(k)))


# ---------------------------------------------------------------------------
# K-group tables


def kgroup_table(
    name: str,
    n_min: int,
    n_max: int,
    budget: int | None = None,
    threads: int | None = None,
) -> Table:
    """Rows n, tau(n), r_g(n) for each class, the K-group order and its factorization.

    Rows with n above ``budget`` are marked ``skipped``.
    """
    from .siegel import kgroup_order

    genus = load_genus(f"{name}_std")
    d = genus.dim
    m = d - 3
    cls = ["r_f", "r_g", "r_h"][: genus.class_number]
    header = ["n", "tau"] + cls + [f"K{m}", "factorization"]
    table = Table(name, header)
    ns = [n for n in range(n_min, n_max + 1) if admissible(n, genus.D)]
    top = min(n_max, budget) if budget is not None else n_max
    in_budget = [n for n in ns if n <= top]
    if in_budget:
        prefetch(genus, in_budget[-1], threads)
    for n in ns:
        if budget is not None and n > budget:
            table.rows.append([str(n), str(omega_odd(n))] + ["skipped"] * (len(header) - 2))
            continue
        r = [genus.theta_coeff(i, n) for i in range(genus.class_number)]
        pred = kgroup_order(genus, n)
        table.rows.append(
            [str(n), str(omega_odd(n))] + [str(v) for v in r]
            + [str(pred.order), format_factorization(pred.order)]
        )
    return table


# ---------------------------------------------------------------------------
# multiplier tables


def lambda_table(genus: GenusDescriptor, n_max: int) -> Table:
    from .siegel import HypothesisError, lambda_f, mass

    table = Table("lambda", ["n", "G", "lambda", "h", "check"])
    prefetch(genus, n_max)
    for n in range(1, n_max + 1):
        if not admissible(n, genus.D):
            continue
        try:
            lam = lambda_f(genus.f, n)
        except HypothesisError as exc:
            table.rows.append([str(n), "skipped", str(exc), "", ""])
            continue
        h = class_number_imag(n * genus.D_sq)
        G = mass(genus, n)
        table.rows.append([str(n), fmt_exact(G), fmt_exact(lam), str(h), "ok" if G == lam * h else "FAIL"])
    return table


def rho_table(genus: GenusDescriptor, n_max: int) -> Table:
    from .numtheory import dirichlet_L_nonpositive
    from .siegel import HypothesisError, field_character, mass, rho_f

    k = (genus.dim - 1) // 2
    table = Table("rho", ["n", "G", "rho", "L", "check"])
    prefetch(genus, n_max)
    for n in range(1, n_max + 1):
        if not admissible(n, genus.D):
            continue
        try:
            rho = rho_f(genus.f, n)
        except HypothesisError as exc:
            table.rows.append([str(n), "skipped", str(exc), "", ""])
            continue
        L = dirichlet_L_nonpositive(k, field_character(genus.f, n))
        G = mass(genus, n)
        table.rows.append([str(n), fmt_exact(G), fmt_exact(rho), fmt_exact(L), "ok" if G == rho * L else "FAIL"])
    return table


# ---------------------------------------------------------------------------
# 2-adic valuations for the p = 7 genus


def val_p7_table(n_max: int, min_mu: int = 3) -> Table:
    """n, mu(n), the lower bound, r_f(n), v2(r_f(n)) for n with mu(n) >= min_mu."""
    from .curves import genus_constants, valuation_bound

    genus = load_genus("p7")
    consts = genus_constants(genus)
    table = Table("val-p7", ["n", "mu", "bound", "r_f", "v2"])
    ns = [n for n in range(1, n_max + 1) if admissible(n, genus.D) and omega_odd(n) >= min_mu]
    if ns:
        genus.theta(0, ns[-1])
    for n in ns:
        rep = valuation_bound(genus, n, consts)
        act = "inf" if rep.actual == math.inf else fmt_exact(rep.actual)
        table.rows.append([str(n), str(rep.mu), fmt_exact(rep.bound), str(genus.theta_coeff(0, n)), act])
    return table


# ---------------------------------------------------------------------------
# two-class ternary genera by level


@dataclass(frozen=True)
class LevelRow:
    name: str
    listed: int
    computed: int
    eigen: bool
    label: str
    twist: int | None

    @property
    def level_ok(self) -> bool:
        return self.listed == self.computed


def level_rows(prime_bound: int = 50, names: Iterable[str] | None = None) -> list[LevelRow]:
    """Level, Hecke eigenform property and curve match of each bundled level genus."""
    from .genus import bundled_genera
    from .modforms import NotEigenform, hecke_eigenvalue, shimura_lift, theta_difference, verify_sh_e

    if names is None:
        names = [g for g in bundled_genera() if g.startswith("level")]
        names.sort(key=lambda s: (int(s[5:].split("_")[0]), s))
    out = []
    for name in names:
        genus = load_genus(name)
        N = level(genus.f)
        listed = int(genus.extra.get("listed_level", N))
        theta = theta_difference(genus, 30 * prime_bound**2)
        eigen = True
        for p in (3, 5):
            if N % p == 0:
                continue
            try:
                hecke_eigenvalue(theta, p)
            except NotEigenform:
                eigen = False
        label = genus.curve.label if genus.curve else "/"
        twist = None
        if genus.curve is not None and eigen:
            lift = shimura_lift(theta, prime_bound)
            twist = verify_sh_e(lift, genus.curve, prime_bound, genus.D_sq).twist
        out.append(LevelRow(name, listed, N, eigen, label, twist))
    return out


def levels_table(prime_bound: int = 50) -> Table:
    table = Table("levels", ["genus", "listed", "level", "f", "g", "eigenform", "curve", "twist"])
    for row in level_rows(prime_bound):
        genus = load_genus(row.name)
        f, g = genus.extra.get("ternary", [[], []])
        table.rows.append([
            row.name, str(row.listed), str(row.computed),
            "[" + ",".join(map(str, f)) + "]", "[" + ",".join(map(str, g)) + "]",
            "yes" if row.eigen else "no", row.label,
            "-" if row.twist is None else str(row.twist),
        ])
    return table


# ---------------------------------------------------------------------------


def build_table(
    table_id: str,
    n_max: int | None = None,
    full: bool = False,
    threads: int | None = None,
    genus: GenusDescriptor | None = None,
    n_min: int | None = None,
) -> Table:
    builders: dict[str, Callable[[], Table]] = {
        "d5": lambda: kgroup_table("d5", n_min or 7, n_max or 97, threads=threads),
        "d9": lambda: kgroup_table("d9", n_min or 7, n_max or 97, threads=threads),
        "d13": lambda: kgroup_table(
            "d13", n_min or 15, n_max or (D13_FULL if full else D13_BUDGET),
            budget=None if full else D13_BUDGET, threads=threads,
        ),
        "val-p7": lambda: val_p7_table(n_max or 7000),
        "levels": lambda: levels_table(),
        "lambda": lambda: lambda_table(genus or load_genus("p7"), n_max or 200),
        "rho": lambda: rho_table(genus or load_genus("d5_i4_7"), n_max or 97),
    }
    if table_id not in builders:
        raise ValueError(f"unknown table {table_id!r}; choose from {', '.join(TABLE_IDS)}")
    return builders[table_id]()
