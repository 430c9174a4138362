"""Quotient construction, level dimensions, and the bracket relations."""

from fractions import Fraction

import numpy as np
import pytest

from vircut import verma
from vircut.verma import (
    NonUnitaryError,
    level_rank,
    measure_central_charge,
    relation_residual_summary,
    truncated_rep,
)

# irreducible vacuum characters, fixed by independent counting
ISING_VACUUM_DIMS = (1, 0, 1, 1, 2, 2, 3, 3, 5, 5, 7, 8, 11)
ISING_HALF_DIMS = (1, 1, 1, 1, 2, 2, 3, 4, 5)
TCI_VACUUM_DIMS = (1, 0, 1, 1, 2, 2, 4, 4, 7)
GENERIC_DIMS = (1, 1, 2, 3, 5, 7, 11, 15, 22)


def test_ising_vacuum_dimensions(ising12):
    assert ising12.level_dims == ISING_VACUUM_DIMS


def test_ising_energy_half_dimensions(ising_half_8):
    assert ising_half_8.level_dims == ISING_HALF_DIMS


def test_tricritical_vacuum_dimensions():
    rep = truncated_rep(Fraction(7, 10), 0, 8)
    assert rep.level_dims == TCI_VACUUM_DIMS


def test_generic_weight_keeps_full_verma_dimensions():
    rep = truncated_rep(Fraction(2), Fraction(1, 2), 8, mode="float")
    assert rep.level_dims == GENERIC_DIMS


def test_level_rank_modes_agree():
    for k in range(1, 7):
        exact = level_rank(Fraction(1, 2), 0, k, mode="exact")
        floaty = level_rank(Fraction(1, 2), 0, k, mode="float")
        assert exact.rank == floaty.rank == ISING_VACUUM_DIMS[k]


@pytest.mark.parametrize("c,h,level", [
    (Fraction(1, 2), Fraction(1, 10), 2),
    (Fraction(1, 2), Fraction(1, 3), 2),
    (Fraction(7, 10), Fraction(1, 5), 2),
])
def test_non_unitary_weights_refused(c, h, level):
    with pytest.raises(NonUnitaryError):
        truncated_rep(c, h, level + 1)


def test_tricritical_half_fails_only_at_level_six():
    c, h = Fraction(7, 10), Fraction(1, 2)
    rep = truncated_rep(c, h, 5)  # positive semidefinite through level 5
    assert rep.N == 5
    with pytest.raises(NonUnitaryError, match="level 6"):
        truncated_rep(c, h, 6)


def test_monomial_basis_carries_relations_without_inner_product():
    rep = truncated_rep(Fraction(7, 10), Fraction(1, 2), 8, basis="monomial")
    summary = relation_residual_summary(rep, max_mode=3)
    assert summary["exact_zero"]
    with pytest.raises(ValueError, match="no inner product"):
        rep.norms(0)


def test_exact_relations_are_identically_zero(ising8):
    summary = relation_residual_summary(ising8, max_mode=3)
    assert summary["exact_zero"] and summary["max_abs"] == 0.0


def test_float_relations_within_tolerance(ising8_float):
    summary = relation_residual_summary(ising8_float, max_mode=3)
    assert summary["max_abs"] <= 1e-10


def test_block_shapes_and_out_of_range(ising8):
    assert ising8.dim(-1) == 0 and ising8.dim(9) == 0
    assert ising8.block(2, 1) is None  # level 1 is empty
    blk = ising8.block(-2, 0)
    assert blk.shape == (1, 1)
    assert ising8.block(8, 8).shape == (1, 5)


def test_orthonormal_blocks_give_unit_norms(ising8):
    # rows of L_{-2}|_0 in the orthonormal basis: the image of the vacuum
    # has squared length <O| L_2 L_{-2} |O> = c/2
    col = ising8.orthonormal_block(-2, 0)
    assert np.allclose(np.sum(col * col), 0.25)


def test_measured_central_charge_is_exact(ising8):
    assert measure_central_charge(ising8) == Fraction(1, 2)


def test_float_mode_matches_exact_blocks(ising8, ising8_float):
    for key in ising8.blocks:
        a = ising8.orthonormal_block(*key)
        b = ising8_float.block(*key)
        assert a.shape == b.shape
        if a.size:
            # same quotient, possibly different orthonormal frames: compare
            # the frame-invariant singular values
            sa = np.linalg.svd(a, compute_uv=False)
            sb = np.linalg.svd(b, compute_uv=False)
            assert np.allclose(sa, sb, atol=1e-9)


def test_fault_hook_changes_the_algebra():
    original = verma.CENTRAL_DENOMINATOR
    try:
        verma.CENTRAL_DENOMINATOR = 13
        verma.clear_caches()
        rep = truncated_rep(Fraction(2), 0, 5, mode="float")
        summary = relation_residual_summary(rep, max_mode=2)
        assert summary["max_abs"] > 1e-3
    finally:
        verma.CENTRAL_DENOMINATOR = original
        verma.clear_caches()
