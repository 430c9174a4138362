"""Symbolic action of the modes on monomial vectors."""

from fractions import Fraction

import pytest

from vircut.verma import VermaVector, act

C = Fraction(1, 2)
H = Fraction(0)


def test_l0_is_the_level():
    v = VermaVector.monomial((3, 2, 1))
    out = act(0, v, C, Fraction(3))
    # L_0 on a level-6 monomial over lowest weight 3 gives (3 + 6) v
    assert out.level == 6
    assert out.coefficient((3, 2, 1)) == 9


def test_lowering_prepends_to_the_word():
    v = VermaVector.monomial((2,))
    out = act(-3, v, C, H)
    assert out.level == 5
    assert out.coefficient((3, 2)) == 1


def test_lowering_straightens_out_of_order_modes():
    # L_{-1} L_{-2} = L_{-2} L_{-1} + [L_{-1}, L_{-2}] = L_{-2} L_{-1} + L_{-3}
    v = VermaVector.monomial((1,))
    out = act(-2, v, C, H)
    assert out.coefficient((2, 1)) == 1
    assert out.level == 3


def test_commutator_on_vacuum_includes_central_term():
    # L_2 L_{-2} Omega = [L_2, L_{-2}] Omega = (4 L_0 + c/2) Omega
    vac = VermaVector.monomial(())
    up = act(2, act(-2, vac, C, H), C, H)
    assert up.level == 0
    assert up.coefficient(()) == 4 * H + C / 2


def test_annihilation_above_the_top():
    vac = VermaVector.monomial(())
    assert act(1, vac, C, H).is_zero()
    assert act(5, act(-2, vac, C, H), C, H).is_zero()


def test_translation_recursion_on_vacuum():
    # L_{-1} L_{-n} Omega = (n - 1) L_{-n-1} Omega
    vac = VermaVector.monomial(())
    for n in range(2, 8):
        lhs = act(-1, act(-n, vac, C, H), C, H)
        assert lhs.coefficient((n + 1,)) == n - 1
        assert lhs.coefficient((n, 1)) == 1  # straightened remainder term


def test_level_mismatch_rejected():
    with pytest.raises(ValueError):
        VermaVector({(2, 1): Fraction(1)}, level=2)
