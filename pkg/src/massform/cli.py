"""massform command line.

Exit codes: 0 success, 1 a verification failed, 2 malformed input.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Callable, Sequence

from .genus import DescriptorError, GenusDescriptor, load_genus
from .numtheory import (
    class_number_disc,
    class_number_imag,
    format_factorization,
    fundamental_discriminant,
    is_prime,
    prime_divisors,
)
from .qform import QuadForm, from_diagonal, theta
from .tables import TABLE_IDS, Table, admissible, build_table, fmt_exact, fmt_float

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def _parse_diag(text: str) -> tuple[int, ...]:
    try:
        b = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad --diag value {text!r}") from exc
    if not b or any(x <= 0 for x in b):
        raise InputError("--diag needs positive integers")
    return b


def _genus(args: argparse.Namespace) -> GenusDescriptor:
    if args.genus is None:
        raise InputError("--genus is required")
    return load_genus(args.genus)


def _form(args: argparse.Namespace) -> QuadForm:
    if getattr(args, "diag", None):
        return from_diagonal(_parse_diag(args.diag))
    g = _genus(args)
    if not 0 <= args.form < g.class_number:
        raise InputError(f"--form must be below {g.class_number}")
    return g.forms[args.form]


def _ns(args: argparse.Namespace) -> list[int] | None:
    """The explicit n, or None when a --max range was requested."""
    if args.n is not None:
        if args.n < 0:
            raise InputError("n must be non-negative")
        return [args.n]
    if args.max is None:
        raise InputError("give n or --max")
    return None


def _emit(table: Table, args: argparse.Namespace) -> None:
    sys.stdout.write(table.render(args.format))


def _per_n(
    args: argparse.Namespace,
    name: str,
    header: list[str],
    row: Callable[[GenusDescriptor, int], list[str]],
) -> int:
    """Run ``row`` over n or the admissible n <= --max; hypothesis failures become rows."""
    from .siegel import HypothesisError, MassVanishes

    g = _genus(args)
    ns = _ns(args)
    single = ns is not None
    if ns is None:
        D = g.D if g.diagonal is not None else g.half_det
        ns = [n for n in range(1, args.max + 1) if admissible(n, D)]
    table = Table(name, header)
    for n in ns:
        try:
            table.rows.append([str(n)] + row(g, n))
        except (HypothesisError, MassVanishes) as exc:
            if single:
                raise InputError(str(exc)) from exc
            table.rows.append([str(n), f"skipped: {exc}"])
    _emit(table, args)
    return EXIT_OK


# ---------------------------------------------------------------------------


def cmd_count(args: argparse.Namespace) -> int:
    if args.n is None or args.n < 0:
        raise InputError("count needs n >= 0")
    print(theta(_form(args), args.n)[args.n])
    return EXIT_OK


def cmd_theta(args: argparse.Namespace) -> int:
    N = args.max if args.max is not None else 50
    s = theta(_form(args), N)
    table = Table("theta", ["n", "r"], [[str(n), str(s[n])] for n in range(N + 1)])
    _emit(table, args)
    return EXIT_OK


def cmd_density(args: argparse.Namespace) -> int:
    from .localdensity import delta_infinity, delta_p

    f = _form(args)
    n = args.n
    if n is None or n < 1:
        raise InputError("density needs n >= 1")
    if args.p is not None:
        if not is_prime(args.p):
            raise InputError(f"{args.p} is not prime")
        primes = [args.p]
    else:
        primes = sorted(set(prime_divisors(2 * f.D * n)))
    table = Table("density", ["place", "delta"])
    for p in primes:
        table.rows.append([str(p), fmt_exact(delta_p(f, n, p))])
    table.rows.append(["inf", str(delta_infinity(f, n))])
    _emit(table, args)
    return EXIT_OK


def cmd_mass(args: argparse.Namespace) -> int:
    from .siegel import mass

    g = _genus(args)
    ns = _ns(args) or list(range(1, args.max + 1))
    table = Table("mass", ["n"] + [f"r{i}" for i in range(g.class_number)] + ["G"])
    for n in ns:
        table.rows.append(
            [str(n)] + [str(g.theta_coeff(i, n)) for i in range(g.class_number)] + [fmt_exact(mass(g, n))]
        )
    _emit(table, args)
    return EXIT_OK


def cmd_lambda(args: argparse.Namespace) -> int:
    from .siegel import lambda_f

    return _per_n(args, "lambda", ["n", "lambda"], lambda g, n: [fmt_exact(lambda_f(g.f, n))])


def cmd_rho(args: argparse.Namespace) -> int:
    from .siegel import rho_f

    return _per_n(args, "rho", ["n", "rho"], lambda g, n: [fmt_exact(rho_f(g.f, n))])


def cmd_kgroup(args: argparse.Namespace) -> int:
    from .siegel import kgroup_order

    def row(g: GenusDescriptor, n: int) -> list[str]:
        k = kgroup_order(g, n)
        return [f"{k.order} = {format_factorization(k.order)}"]

    return _per_n(args, "kgroup", ["n", "order"], row)


def cmd_classnumber(args: argparse.Namespace) -> int:
    m = args.n
    if m is None or m == 0:
        raise InputError("classnumber needs a nonzero integer")
    if m > 0:
        print(f"h(Q(sqrt(-{m}))) = {class_number_imag(m)}  (D_K = {fundamental_discriminant(-m)})")
    else:
        if m % 4 not in (0, 1):
            raise InputError(f"{m} is not a discriminant")
        print(f"h({m}) = {class_number_disc(m)}")
    return EXIT_OK


def cmd_lift(args: argparse.Namespace) -> int:
    from .modforms import NotEigenform, shimura_lift, theta_difference, verify_sh_e

    g = _genus(args)
    bound = args.max if args.max is not None else 50
    th = theta_difference(g, 30 * bound * bound)
    try:
        lift = shimura_lift(th, bound)
    except NotEigenform as exc:
        print(f"not an eigenform: {exc}")
        return EXIT_FAIL
    table = Table("lift", ["p", "lambda_p"], [[str(p), str(v)] for p, v in sorted(lift.eigenvalues.items())])
    _emit(table, args)
    if g.curve is None:
        return EXIT_OK
    rep = verify_sh_e(lift, g.curve, bound, g.D_sq)
    if rep.ok:
        print(f"matches {g.curve.label or 'the curve'} twisted by {rep.twist}")
        return EXIT_OK
    print(f"no twist of {g.curve.label or 'the curve'} matches")
    return EXIT_FAIL


def cmd_waldcheck(args: argparse.Namespace) -> int:
    from .modforms import waldspurger_ratio_check

    g = _genus(args)
    if args.n is None or args.n0 is None:
        raise InputError("waldcheck needs n and --n0")
    try:
        chk = waldspurger_ratio_check(g, args.n, args.n0)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    table = Table("waldcheck", ["n", "n0", "a_n", "a_n0", "L_n", "L_n0", "predicted", "ok"])
    table.rows.append([
        str(chk.n), str(chk.n0), str(chk.a_n), str(chk.a_n0), fmt_float(chk.L_n),
        fmt_float(chk.L_n0), fmt_float(chk.predicted), "yes" if chk.ok else "no",
    ])
    _emit(table, args)
    return EXIT_OK if chk.ok else EXIT_FAIL


def cmd_bound(args: argparse.Namespace) -> int:
    from .curves import genus_constants, valuation_bound

    g = _genus(args)
    consts = genus_constants(g)
    ns = _ns(args)
    if ns is None:
        ns = [n for n in range(1, args.max + 1) if admissible(n, g.D)]
    table = Table("bound", ["n", "mu", "tE", "bound", "v2", "holds", "rule"])
    csv_lines = ["n,mu,tE,bound_num,bound_den,actual,ok"]
    failed = False
    for n in ns:
        if not admissible(n, g.D):
            raise InputError(f"n = {n} must be squarefree and prime to {2 * g.D}")
        r = valuation_bound(g, n, consts)
        csv_lines.append(r.csv_row())
        act = "inf" if r.actual == math.inf else fmt_exact(r.actual)
        table.rows.append(
            [str(n), str(r.mu), str(r.tE), fmt_exact(r.bound), act, "yes" if r.satisfied else "no", r.rule]
        )
        failed |= not r.satisfied
    if args.format == "csv":
        sys.stdout.write("\n".join(csv_lines) + "\n")
    else:
        _emit(table, args)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    genus = load_genus(args.genus) if args.genus else None
    t = build_table(args.table_id, args.max, full=args.full, threads=args.threads, genus=genus)
    _emit(t, args)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from .siegel import HypothesisError, MassVanishes, kgroup_order, verify_siegel_d3

    g = _genus(args)
    n_max = args.max if args.max is not None else 200
    d = g.dim
    if d == 3:
        mode = "siegel"
    elif d >= 5 and d % 4 == 1:
        mode = "kgroup"
    else:
        raise InputError(f"verify supports d = 3 or d = 1 mod 4, not d = {d}")
    if mode == "kgroup" and g.diagonal is None:
        raise InputError("the K-group check needs a diagonal representative")
    D = g.D if g.diagonal is not None else g.half_det
    ns = [n for n in range(1, n_max + 1) if admissible(n, D)]
    from .tables import prefetch

    prefetch(g, max(ns, default=0), args.threads)
    failures = []
    checked = 0
    for n in ns:
        try:
            if mode == "siegel":
                ok = verify_siegel_d3(g, n).ok
            else:
                ok = kgroup_order(g, n).paths_agree
        except (HypothesisError, MassVanishes):
            continue
        except ArithmeticError as exc:
            failures.append(f"{n}: {exc}")
            continue
        checked += 1
        if not ok:
            failures.append(str(n))
    for line in failures:
        print(f"FAIL {line}")
    status = "pass" if not failures else "fail"
    print(f"{g.name}: {mode} check {status} on {checked} values of n <= {n_max}")
    return EXIT_OK if not failures else EXIT_FAIL


# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--genus", metavar="FILE", help="genus descriptor (path or bundled name)")
    p.add_argument("--max", type=int, metavar="N", help="upper end of the n range")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--threads", type=int, metavar="K", help="worker threads (default: all cores)")
    p.add_argument("--full", action="store_true", help="lift the default budget of long tables")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="massform", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable[[argparse.Namespace], int], help_: str, n: bool = True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if n:
            sp.add_argument("n", type=int, nargs="?")
        sp.set_defaults(func=func)
        return sp

    for name, func, help_ in (("count", cmd_count, "r_f(n)"), ("theta", cmd_theta, "theta series"),
                              ("density", cmd_density, "local densities")):
        sp = add(name, func, help_, n=name != "theta")
        sp.add_argument("--diag", metavar="B1,B2,...", help="diagonal form instead of a genus")
        sp.add_argument("--form", type=int, default=0, help="class index within the genus")
    sub.choices["density"].add_argument("--p", type=int, help="a single prime")
    add("mass", cmd_mass, "genus representation number G_f(n)")
    add("lambda", cmd_lambda, "ternary multiplier lambda_f(n)")
    add("rho", cmd_rho, "multiplier rho_f(n), d >= 5 odd")
    add("classnumber", cmd_classnumber, "class number of Q(sqrt(-n)), or h(D) for D < 0")
    add("kgroup", cmd_kgroup, "predicted order of K_{d-3}(O_F)")
    add("lift", cmd_lift, "Shimura lift eigenvalues (--max is the prime bound)", n=False)
    add("waldcheck", cmd_waldcheck, "ratio check |a_n| against the L-values").add_argument(
        "--n0", type=int, required=True
    )
    add("bound", cmd_bound, "2-adic lower bound for r_f(n)")
    sp = add("table", cmd_table, "reproduce a table", n=False)
    sp.add_argument("table_id", choices=TABLE_IDS)
    add("verify", cmd_verify, "mass formula or K-group integrality sweep", n=False)
    return parser


def _apply_threads(k: int | None) -> None:
    if k is None:
        return
    if k < 1:
        raise InputError("--threads must be positive")
    import numba

    numba.set_num_threads(min(k, numba.config.NUMBA_NUM_THREADS))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads(args.threads)
        return args.func(args)
    except (InputError, DescriptorError, FileNotFoundError) as exc:
        print(f"massform: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
