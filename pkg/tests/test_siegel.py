from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from massform.genus import load_genus
from massform.numtheory import class_number_imag, is_squarefree, square_linked
from massform.qform import from_diagonal
from massform.siegel import (
    HypothesisError,
    class_of,
    kgroup_order,
    lambda_f,
    mass,
    rho_f,
    sfrak_representatives,
    verify_siegel_d3,
)
from massform.tables import admissible

F7 = from_diagonal((1, 1, 7))
F_EX = from_diagonal((1, 1, 1, 1, 7))


def test_lambda_examples():
    assert lambda_f(F7, 15) == Fraction(2, 3)
    assert lambda_f(F7, 17) == Fraction(8, 3)
    assert lambda_f(F7, 5) == 4


def test_rho_examples():
    assert rho_f(F_EX, 5) == Fraction(-4, 5)
    assert rho_f(F_EX, 3) == Fraction(-28, 5)
    assert rho_f(F_EX, 15) == Fraction(-12, 5)


def test_hypotheses():
    with pytest.raises(HypothesisError):
        lambda_f(F7, 9)
    with pytest.raises(HypothesisError):
        lambda_f(F7, 21)
    with pytest.raises(HypothesisError):
        rho_f(F7, 3)
    with pytest.raises(HypothesisError):
        lambda_f(F_EX, 3)


@given(st.integers(1, 500), st.integers(1, 500))
def test_lambda_constant_on_square_classes(n1, n2):
    if not (admissible(n1, 7) and admissible(n2, 7)) or not square_linked(n1, n2, 28):
        return
    assert lambda_f(F7, n1) == lambda_f(F7, n2)


@given(st.integers(1, 500), st.integers(1, 500))
def test_rho_constant_on_square_classes(n1, n2):
    if not (admissible(n1, 7) and admissible(n2, 7)) or not square_linked(n1, n2, 28):
        return
    assert rho_f(F_EX, n1) == rho_f(F_EX, n2)


@pytest.mark.parametrize("name", ["p7", "p13"])
def test_siegel_d3_small_sweep(name):
    g = load_genus(name)
    g.theta(0, 400)
    g.theta(1, 400)
    for n in range(1, 400):
        if admissible(n, g.D):
            assert verify_siegel_d3(g, n).ok


def test_mass_is_weighted_average():
    g = load_genus("p7")
    assert mass(g, 15) == Fraction(1, 3) * 8 + Fraction(2, 3) * g.theta_coeff(1, 15)
    assert mass(g, 15) == lambda_f(g.f, 15) * class_number_imag(15 * 7)


def test_kgroup_d5():
    g = load_genus("d5_std")
    k = kgroup_order(g, 7)
    assert (k.order, k.field_disc, k.w) == (16, 28, 24)
    assert k.paths_agree


def test_kgroup_example_two_paths():
    g = load_genus("d5_i4_7")
    for n in (1, 3, 5, 11, 15, 97):
        k = kgroup_order(g, n)
        assert k.paths_agree and k.w == 24


def test_kgroup_needs_d_one_mod_four():
    with pytest.raises(HypothesisError):
        kgroup_order(load_genus("p7"), 15)


def test_sfrak_sets():
    s = sfrak_representatives(28, D=7)
    assert s.complete and s.expected == 8
    assert len({class_of(n, 28) for n in s.representatives}) == 8
    assert all(is_squarefree(n) for n in s.representatives)


@pytest.mark.parametrize("name", ["level52_2", "level80_1", "level100_2"])
def test_siegel_for_non_diagonal_genera(name):
    g = load_genus(name)
    assert g.diagonal is None
    for n in range(1, 150):
        if admissible(n, g.half_det):
            assert verify_siegel_d3(g, n).ok


def test_lambda_of_both_classes_agree():
    # lambda depends only on the genus
    g = load_genus("p7")
    for n in (15, 17, 5, 3):
        assert lambda_f(g.forms[0], n) == lambda_f(g.forms[1], n)
