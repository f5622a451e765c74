"""Genus descriptors: the classes of a genus with their weights, plus the
optional elliptic curve and table of algebraic L-values attached to it.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .curves import CurveModel
from .numtheory import squarefree_part
from .qform import QuadForm, ThetaSeries, automorphism_count, from_diagonal, level, theta


class DescriptorError(ValueError):
    """Malformed genus descriptor."""


@dataclass
class GenusDescriptor:
    """Representatives of the classes of a genus with weights summing to 1.

    ``forms[0]`` is the designated representative f.  When f is diagonal its
    coefficients are recorded in ``diagonal``.
    """

    name: str
    forms: list[QuadForm]
    xi: list[Fraction]
    diagonal: tuple[int, ...] | None = None
    mu: list[int] | None = None
    curve: CurveModel | None = None
    lvalues: dict[int, Fraction] | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    _theta: dict[int, ThetaSeries] = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.forms:
            raise DescriptorError("a genus needs at least one form")
        if len(self.xi) != len(self.forms):
            raise DescriptorError("one weight per form is required")
        if any(x <= 0 for x in self.xi) or sum(self.xi) != 1:
            raise DescriptorError("weights must be positive and sum to 1")
        dims = {g.dim for g in self.forms}
        if len(dims) != 1:
            raise DescriptorError("forms have different dimensions")
        dets = {g.det for g in self.forms}
        if len(dets) != 1:
            raise DescriptorError("forms have different determinants")
        if self.diagonal is not None:
            if from_diagonal(self.diagonal) != self.forms[0]:
                raise DescriptorError("diagonal coefficients do not match the first form")
        levels = {level(g) for g in self.forms}
        if len(levels) != 1:
            raise DescriptorError("forms have different levels")

    # -- invariants ---------------------------------------------------------

    @property
    def f(self) -> QuadForm:
        return self.forms[0]

    @property
    def dim(self) -> int:
        return self.f.dim

    @property
    def class_number(self) -> int:
        return len(self.forms)

    @property
    def level(self) -> int:
        return level(self.f)

    @property
    def D(self) -> int:
        """Product of the diagonal coefficients of f."""
        if self.diagonal is None:
            raise DescriptorError(f"genus {self.name} has no diagonal representative")
        return math.prod(self.diagonal)

    @property
    def half_det(self) -> int:
        """det(A_f) / 2^(d-2); equals 4D for a diagonal f."""
        return self.f.det // 2 ** (self.dim - 2)

    @property
    def D_sq(self) -> int:
        """Squarefree part D° of D (of det(A_f)/2^(d-2) if f is not diagonal)."""
        return squarefree_part(self.D if self.diagonal is not None else self.half_det)

    @property
    def xi_g(self) -> Fraction:
        """Weight of the second class; the xi of the two-class identities."""
        if self.class_number != 2:
            raise DescriptorError("xi_g is defined for two-class genera")
        return self.xi[1]

    # -- theta series -------------------------------------------------------

    def theta(self, i: int, N: int) -> ThetaSeries:
        """Theta series of forms[i] to precision at least N (memoised)."""
        with self._lock:
            have = self._theta.get(i)
            if have is not None and have.precision >= N:
                return have
        series = theta(self.forms[i], N)
        with self._lock:
            have = self._theta.get(i)
            if have is None or have.precision < series.precision:
                self._theta[i] = series
            return self._theta[i]

    def theta_coeff(self, i: int, n: int) -> int:
        return self.theta(i, n)[n]

    def verify_weights(self, cap: int = 10**6) -> bool | None:
        """Recompute weights from automorphism counts; None if a count exceeds cap."""
        counts = []
        for g in self.forms:
            c = automorphism_count(g, cap)
            if c is None:
                return None
            counts.append(c)
        inv = sum(Fraction(1, c) for c in counts)
        return [Fraction(1, c) / inv for c in counts] == self.xi


def _fraction(v: Any) -> Fraction:
    if isinstance(v, list) and len(v) == 2:
        return Fraction(int(v[0]), int(v[1]))
    if isinstance(v, (int, str)):
        return Fraction(v)
    raise DescriptorError(f"cannot read a rational from {v!r}")


def genus_from_dict(data: Mapping[str, Any]) -> GenusDescriptor:
    try:
        forms_raw = data["forms"]
        name = str(data["name"])
        dim = int(data["dim"])
        forms = [QuadForm(tuple(tuple(int(x) for x in row) for row in fr["gram"])) for fr in forms_raw]
    except (KeyError, TypeError, ValueError) as exc:
        raise DescriptorError(f"malformed descriptor: {exc}") from exc
    if any(g.dim != dim for g in forms):
        raise DescriptorError("form dimension does not match 'dim'")
    has_xi = ["xi" in fr for fr in forms_raw]
    has_mu = ["mu" in fr for fr in forms_raw]
    if all(has_xi) and not any(has_mu):
        xi = [_fraction(fr["xi"]) for fr in forms_raw]
        mu = None
    elif all(has_mu) and not any(has_xi):
        mu = [int(fr["mu"]) for fr in forms_raw]
        inv = sum(Fraction(1, m) for m in mu)
        xi = [Fraction(1, m) / inv for m in mu]
    else:
        raise DescriptorError("each form needs exactly one of 'xi' or 'mu', uniformly")
    diagonal = tuple(int(b) for b in data["diagonal"]) if data.get("diagonal") else None
    curve = None
    if data.get("curve"):
        c = data["curve"]
        P = [int(x) for x in c["P"]]
        curve = CurveModel(
            tuple(P), label=str(c.get("label", "")), manin=int(c.get("manin", 1)),
            conductor=int(c["conductor"]) if c.get("conductor") else None,
        )
    lvalues = None
    if data.get("lvalues"):
        lvalues = {int(k): _fraction(v) for k, v in data["lvalues"].items()}
    known = {"name", "dim", "forms", "diagonal", "curve", "lvalues"}
    extra = {k: v for k, v in data.items() if k not in known}
    return GenusDescriptor(name, forms, xi, diagonal, mu, curve, lvalues, extra)


def genus_to_dict(g: GenusDescriptor) -> dict[str, Any]:
    forms = []
    for i, form in enumerate(g.forms):
        entry: dict[str, Any] = {"gram": [list(r) for r in form.gram]}
        if g.mu is not None:
            entry["mu"] = g.mu[i]
        else:
            entry["xi"] = [g.xi[i].numerator, g.xi[i].denominator]
        forms.append(entry)
    out: dict[str, Any] = {"name": g.name, "dim": g.dim, "forms": forms}
    if g.diagonal is not None:
        out["diagonal"] = list(g.diagonal)
    if g.curve is not None:
        c = g.curve
        out["curve"] = {"P": list(c.P), "label": c.label, "manin": c.manin}
        if c.conductor:
            out["curve"]["conductor"] = c.conductor
    if g.lvalues:
        out["lvalues"] = {str(k): [v.numerator, v.denominator] for k, v in sorted(g.lvalues.items())}
    out.update(g.extra)
    return out


def load_genus(source: str | Path) -> GenusDescriptor:
    """Load a descriptor from a path, or a bundled one by name ("p7", "d9_std.json")."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    else:
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        res = resources.files("massform.data").joinpath(f"{stem}.json")
        if not res.is_file():
            raise FileNotFoundError(f"no genus file or bundled genus named {source!r}")
        text = res.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"invalid JSON: {exc}") from exc
    return genus_from_dict(data)


def save_genus(g: GenusDescriptor, path: str | Path) -> None:
    Path(path).write_text(json.dumps(genus_to_dict(g), indent=1) + "\n")


def bundled_genera() -> list[str]:
    return sorted(
        p.name[:-5] for p in resources.files("massform.data").iterdir() if p.name.endswith(".json")
    )


def two_class_genus(name: str, f: Sequence[int], g: Sequence[int], **kw: Any) -> GenusDescriptor:
    """Two-class ternary genus from [a1..a6] coefficient lists, weights from |O|."""
    from .qform import from_ternary

    F, G = from_ternary(f), from_ternary(g)
    mu = [automorphism_count(F), automorphism_count(G)]
    if None in mu:
        raise DescriptorError("automorphism count exceeded its cap")
    inv = sum(Fraction(1, m) for m in mu)
    xi = [Fraction(1, m) / inv for m in mu]
    diag = None
    if all(c == 0 for c in f[3:]):
        diag = tuple(f[:3])
    return GenusDescriptor(name, [F, G], xi, diag, mu, **kw)
