"""Acceptance suite: one test group per criterion.

Each test records its verdict in ``tests.acceptance_report`` before asserting,
and the terminal summary prints one PASS/FAIL line per criterion.  Published
values that this package recomputes differently are marked xfail(strict=True):
the computation runs, the verdict is recorded as FAIL, and the mark turns
into an error if the mismatch ever disappears.

Run ``python tests/test_acceptance.py`` for this file alone with output shown.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import pytest

from massform.curves import CurveModel, algebraic_L, ap, ap_minimal, genus_constants, twist_conductor
from massform.genus import bundled_genera, load_genus
from massform.localdensity import beta_p, delta_p_closed, delta_p_exact, _normalized
from massform.modforms import shimura_lift, theta_difference, verify_sh_e
from massform.numtheory import (
    QuadCharacter,
    class_number_disc,
    class_number_imag,
    factorize,
    format_factorization,
    fundamental_discriminant,
    generalized_bernoulli,
    is_squarefree,
    kronecker,
    primes_up_to,
    units_count,
    v2,
)
from massform.qform import enumerate_exact, from_diagonal, from_ternary, theta, theta_general
from massform.siegel import kgroup_order, lambda_f, rho_f, verify_siegel_d3
from massform.tables import admissible, kgroup_table, level_rows, val_p7_table
from tests.acceptance_report import record
from tests.conftest import read_fixture

P_GENERA = (7, 11, 13, 17, 29)


def check(criterion: int, ok: bool, note: str) -> None:
    record(criterion, ok, note)
    assert ok, note


def diverges(reason: str):
    return pytest.mark.xfail(strict=True, reason=reason)


# ---------------------------------------------------------------------------
# 1. ternary multipliers


def test_c1_example_classes():
    t0 = time.perf_counter()
    f = from_diagonal((1, 1, 7))
    expected = {3: Fraction(2, 3), 7: Fraction(2, 3), 1: Fraction(8, 3), 5: Fraction(4)}
    bad = [n for n in range(1, 600) if admissible(n, 7) and lambda_f(f, n) != expected[n % 8]]
    check(1, not bad and time.perf_counter() - t0 < 1, f"lambda classes for x^2+y^2+7z^2 differ at {bad[:5]}")


@pytest.mark.parametrize("p", P_GENERA)
def test_c1_residue_formulas(p):
    t0 = time.perf_counter()
    f = from_diagonal((1, 1, p))
    if p % 4 == 1:
        table = {1: Fraction(12, p + 1), 3: Fraction(24, p + 1), 5: Fraction(12, p + 1), 7: Fraction(0)}
    else:
        table = {1: Fraction(4, p - 1), 3: Fraction(24, p - 1), 5: Fraction(4, p - 1), 7: Fraction(16, p - 1)}
    seen, bad = set(), []
    for n in range(5, 400):
        if admissible(n, p):
            seen.add(p * n % 8)
            if lambda_f(f, n) != table[p * n % 8]:
                bad.append(n)
    ok = not bad and seen == {1, 3, 5, 7} and time.perf_counter() - t0 < 1
    check(1, ok, f"p={p}: lambda differs from the residue formula at {bad[:5]}")


# ---------------------------------------------------------------------------
# 2. quinary multipliers and the K_2 identity


def test_c2_rho_classes():
    t0 = time.perf_counter()
    f = from_diagonal((1, 1, 1, 1, 7))
    expected = {1: Fraction(-4, 5), 5: Fraction(-4, 5), 3: Fraction(-28, 5), 7: Fraction(-12, 5)}
    bad = [n for n in range(1, 600) if admissible(n, 7) and rho_f(f, n) != expected[n % 8]]
    check(2, not bad and time.perf_counter() - t0 < 1, f"rho classes differ at {bad[:5]}")


def test_c2_k2_identity(genera):
    t0 = time.perf_counter()
    g = genera("d5_i4_7")
    bad = []
    for n in range(1, 98):
        if not admissible(n, 7):
            continue
        lhs = g.theta_coeff(0, n) + 4 * g.theta_coeff(1, n)
        rhs = 5 * rho_f(g.f, n) / -2 * kgroup_order(g, n).order
        if lhs != rhs:
            bad.append(n)
    check(2, not bad and time.perf_counter() - t0 < 60, f"r_f + 4 r_g identity fails at {bad[:5]}")


# ---------------------------------------------------------------------------
# 3. Siegel sweep


@pytest.mark.parametrize("p", P_GENERA)
def test_c3_siegel_sweep(genera, p):
    t0 = time.perf_counter()
    g = genera(f"p{p}")
    for i in range(g.class_number):
        g.theta(i, 2000)
    bad = [n for n in range(1, 2001) if admissible(n, p) and not verify_siegel_d3(g, n).ok]
    check(3, not bad and time.perf_counter() - t0 < 120, f"p={p}: mass differs from lambda h at {bad[:5]}")


# ---------------------------------------------------------------------------
# 4-6. K-group tables


def _kgroup_rows(name: str, n_min: int, n_max: int) -> dict[str, list[str]]:
    t = kgroup_table(name, n_min, n_max, budget=n_max, threads=None)
    return {row[0]: row for row in t.rows}


def test_c4_d5_table():
    t0 = time.perf_counter()
    fixture = read_fixture("d5.csv")
    rows = _kgroup_rows("d5", 7, 97)
    got = [rows.get(r["n"]) for r in fixture]
    want = [[r["n"], r["tau"], r["r_f"], r["K2"], r["factorization"]] for r in fixture]
    bad = [w[0] for g, w in zip(got, want) if g != w]
    ok = len(fixture) == 38 and not bad and time.perf_counter() - t0 < 60
    check(4, ok, f"d=5 rows differ at n={bad[:5]}")
    assert rows["7"][2:4] == ["320", "16"] and rows["97"][2:4] == ["8160", "136"]


def test_c5_d9_table(genera):
    t0 = time.perf_counter()
    fixture = read_fixture("d9.csv")
    rows = _kgroup_rows("d9", 7, 97)
    want = [[r["n"], r["tau"], r["r_f"], r["r_g"], r["K6"], r["factorization"]] for r in fixture]
    bad = [w[0] for w in want if rows.get(w[0]) != w]
    ok = bool(fixture) and not bad and time.perf_counter() - t0 < 600
    check(5, ok, f"d=9 rows differ at n={bad[:5]}")
    assert 15 * 12672 + 2 * 13440 == 480 * 452 == 480 * int(rows["7"][4])


def test_c6_d13_table():
    t0 = time.perf_counter()
    fixture = [r for r in read_fixture("d13.csv") if int(r["n"]) <= 39]
    rows = _kgroup_rows("d13", 15, 39)
    bad = []
    for r in fixture:
        got = rows.get(r["n"])
        want = [r["n"], r["tau"], r["r_f"], r["r_g"], r["r_h"]]
        if got is None or got[:5] != want or got[6] != r["K10_factorization"]:
            bad.append(r["n"])
        elif format_factorization(int(got[5])) != got[6]:
            bad.append(r["n"])
    ns = [int(r["n"]) for r in fixture]
    ok = ns == [15, 17, 19, 21, 23, 29, 31, 33, 35, 37, 39] and not bad and time.perf_counter() - t0 < 900
    check(6, ok, f"d=13 rows differ at n={bad[:5]}")
    assert rows["15"][5] == "46989168"


# ---------------------------------------------------------------------------
# 7. 2-adic valuation table


def test_c7_valuation_table():
    t0 = time.perf_counter()
    fixture = [r for r in read_fixture("val_p7.csv") if int(r["mu"]) in (3, 4) and int(r["n"]) <= 7000]
    t = val_p7_table(7000)
    got = {row[0]: row for row in t.rows}
    want = [[r["n"], r["mu"], r["bound"], r["r_f"], r["v2"]] for r in fixture]
    bad = [w[0] for w in want if got.get(w[0]) != w]
    bound_ok = all(
        int(w[4]) >= math.ceil(Fraction(3, 2) + Fraction(int(w[1]), 2)) >= math.ceil(Fraction(w[2])) for w in want
    )
    sharp = math.ceil(Fraction(got["3705"][2])) == int(got["3705"][4])
    ok = bool(want) and not bad and bound_ok and sharp and time.perf_counter() - t0 < 60
    check(7, ok, f"valuation rows differ at n={bad[:5]}")
    assert got["165"][3:] == ["32", "5"] and got["3705"][3:] == ["304", "4"]


# ---------------------------------------------------------------------------
# 8. genus constants

B_NOTE = (
    "every lambda_f(n) for p = 3 mod 4 has v2 >= 1, so B = 1 and kappa follows; "
    "the listed B = 0 is not reproducible from the lambda values"
)


@pytest.mark.parametrize("p", P_GENERA)
def test_c8_xi_and_A(genera, p):
    row = next(r for r in read_fixture("genus_constants.csv") if r["p"] == str(p))
    xi = {7: Fraction(2, 3), 11: Fraction(4, 5), 13: Fraction(4, 7), 17: Fraction(2, 3), 29: Fraction(4, 5)}[p]
    c = genus_constants(genera(f"p{p}"))
    check(8, c.xi == xi and c.A == Fraction(row["A"]), f"p={p}: (xi, A) = ({c.xi}, {c.A})")


@pytest.mark.parametrize(
    "p",
    [pytest.param(7, marks=diverges(B_NOTE)), pytest.param(11, marks=diverges(B_NOTE)), 13, 17, 29],
)
def test_c8_B_and_kappa(genera, p):
    t0 = time.perf_counter()
    row = next(r for r in read_fixture("genus_constants.csv") if r["p"] == str(p))
    c = genus_constants(genera(f"p{p}"))
    ok = c.B == Fraction(row["B"]) and c.kappa == int(row["kappa"]) and time.perf_counter() - t0 < 1
    check(8, ok, f"p={p}: (B, kappa) = ({c.B}, {c.kappa}), listed ({row['B']}, {row['kappa']})")


def test_c8_recomputed_B_is_lambda_minimum():
    # the honest value: least v2 of lambda over the four residue classes
    for p in P_GENERA:
        vals = {v2(lambda_f(from_diagonal((1, 1, p)), n)) for n in range(5, 200) if admissible(n, p)}
        assert min(vals) == 1


# ---------------------------------------------------------------------------
# 9. L-value and a_{n0} tables


@pytest.mark.parametrize("p", P_GENERA)
def test_c9_a_exact(genera, p):
    rows = [r for r in read_fixture("lvalue_tables.csv") if r["p"] == str(p)]
    g = genera(f"p{p}")
    th = theta_difference(g, max(int(r["n0"]) for r in rows))
    bad = [r["n0"] for r in rows if th[int(r["n0"])] != int(r["a"])]
    check(9, len(rows) == 8 and not bad, f"p={p}: a_n0 differs at {bad}")


@pytest.mark.parametrize(
    "p",
    [7, pytest.param(11, marks=diverges("listed L-values are 5 times the base-period twist values")), 13, 17, 29],
)
def test_c9_L_values(genera, p):
    t0 = time.perf_counter()
    rows = [r for r in read_fixture("lvalue_tables.csv") if r["p"] == str(p)]
    g = genera(f"p{p}")
    # largest twist first, so its a_p table serves the others
    rows.sort(key=lambda r: -twist_conductor(g.curve.conductor, -g.D_sq * int(r["n0"])))
    bad = []
    for r in rows:
        listed = float(Fraction(r["L"]))
        got = algebraic_L(g.curve, -g.D_sq * int(r["n0"]), normalization="base")
        if (listed == 0 and abs(got) > 1e-6) or (listed and abs(got / listed - 1) > 0.01):
            bad.append((r["n0"], round(got, 4), r["L"]))
    check(9, not bad and time.perf_counter() - t0 < 300, f"p={p}: L(n0) off at {bad[:3]}")


# ---------------------------------------------------------------------------
# 10. level table


@pytest.fixture(scope="module")
def levels():
    t0 = time.perf_counter()
    rows = {r.name: r for r in level_rows(prime_bound=50)}
    return rows, time.perf_counter() - t0


LEVEL_NOTE = "the level of the listed form is computed as half the listed value"


def _level_params():
    out = []
    for name in sorted(n for n in bundled_genera() if n.startswith("level")):
        marks = [diverges(LEVEL_NOTE)] if name in ("level80_1", "level96_1") else []
        out.append(pytest.param(name, marks=marks))
    return out


@pytest.mark.parametrize("name", _level_params())
def test_c10_level(levels, name):
    rows, _ = levels
    r = rows[name]
    check(10, r.level_ok, f"{name}: listed level {r.listed}, computed {r.computed}")


def test_c10_eigenforms_and_curves(levels):
    rows, elapsed = levels
    fixture = read_fixture("levels.csv")
    assert len(fixture) == len(rows) == 25
    not_eigen = [r.name for r in rows.values() if not r.eigen]
    curve_bad = [r.name for r in rows.values() if r.label != "/" and r.twist != 1]
    labels = sorted(r.label for r in rows.values())
    ok = not not_eigen and not curve_bad and labels == sorted(f["curve"] for f in fixture) and elapsed < 300
    check(10, ok, f"not eigen: {not_eigen}; curve mismatch: {curve_bad}")


def test_c10_level64_has_no_bundled_curve():
    g = load_genus("level64_1")
    # the difference is sparse; twice the usual precision reaches lambda_29
    lift = shimura_lift(theta_difference(g, 60 * 31 * 31), 31)
    assert all(abs(v) == p + 1 for p, v in lift.eigenvalues.items())
    candidates = {}
    for name in bundled_genera():
        other = load_genus(name)
        if other.curve is not None and other.curve.label:
            candidates[other.curve.label] = other.curve
    matches = []
    for label, curve in candidates.items():
        try:
            if verify_sh_e(lift, curve, 31, g.D_sq).ok:
                matches.append(label)
        except ValueError:
            continue
    check(10, g.curve is None and not matches, f"level 64 matched {matches}")


# ---------------------------------------------------------------------------
# 11. property suites


def test_c11_local_densities():
    t0 = time.perf_counter()
    bad = []
    for p in P_GENERA:
        f = from_diagonal((1, 1, p))
        for n in (n for n in range(1, 60) if admissible(n, p)):
            for q in (3, 5, 7, 11, 13, p):
                try:
                    closed = delta_p_closed(f, n, q)
                except ValueError:
                    continue
                beta = beta_p(f, n, q)
                if closed != delta_p_exact(f, n, q) or _normalized(f, n, q, beta) != _normalized(f, n, q, beta + 1):
                    bad.append((p, n, q))
    check(11, not bad and time.perf_counter() - t0 < 60, f"local density mismatch at {bad[:3]}")


def test_c11_class_numbers_and_characters():
    bad = []
    for b in (b for b in range(1, 400) if is_squarefree(b)):
        D = fundamental_discriminant(-b)
        h = class_number_imag(b)
        if h != Fraction(units_count(D), 2) * -generalized_bernoulli(1, QuadCharacter(D)):
            bad.append(("h", b))
        if v2(class_number_disc(D)) < len(factorize(abs(D))) - 1:
            bad.append(("genus", b))
    for p in primes_up_to(60)[1:]:
        for a in range(p):
            if sum(kronecker(x * x + a, p) for x in range(p)) != (p - 1 if a == 0 else -1):
                bad.append(("char", p, a))
    check(11, not bad, f"number theory property failures {bad[:3]}")


def test_c11_theta_and_hasse():
    bad = []
    for b in ((1, 1, 7), (1, 2, 4), (1, 1, 1, 1, 7)):
        f = from_diagonal(b)
        exact = enumerate_exact(f, 60)
        if list(theta(f, 60).coeffs) != exact or list(theta_general(f, 60).coeffs) != exact:
            bad.append(b)
    g = from_ternary([1, 2, 4, 2, 0, 0])
    if list(theta_general(g, 60).coeffs) != enumerate_exact(g, 60):
        bad.append("g")
    for P in ((1, 1, -8, 16), (1, -4, 0, 16), (1, 5, 88, 592)):
        E = CurveModel(P)
        for p in primes_up_to(300)[2:]:
            try:
                a = ap(E, p)
            except ValueError:
                continue
            if a * a > 4 * p or a != ap_minimal(E.ainvs, p):
                bad.append((P, p))
    check(11, not bad, f"theta or Hasse failures {bad[:3]}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
