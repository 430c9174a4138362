"""Bound-constant experiments: r, q, decay, mollifier convergence."""

import math
from fractions import Fraction

import numpy as np
import pytest

from vircut.bounds import (
    decay_report,
    default_eps_grid,
    estimate_q,
    estimate_r,
    mollifier_report,
)
from vircut.fields import FEJER, GAUSSIAN, cosine_field, mode_field

# Frozen from independent sweeps of the c = 1/2 vacuum module at N = 8.
R_SQ_N8 = 1.0000000000000002
Q_HAT_N8 = 0.13011474896219252


@pytest.fixture(scope="module")
def r_n8(ising8_float):
    return estimate_r(Fraction(1, 2), 8, rep=ising8_float)


@pytest.fixture(scope="module")
def q_n8(ising8_float, r_n8):
    return estimate_q(Fraction(1, 2), 8, rep=ising8_float, r_report=r_n8)


# ---------------------------------------------------------------------------
# energy-bound ratio r


def test_r_constant_and_witness(r_n8):
    assert r_n8.constant == pytest.approx(R_SQ_N8, rel=1e-12)
    assert (r_n8.witness["k"], r_n8.witness["n"]) == (7, 0)
    assert r_n8.witness["reproduced"] is True
    assert r_n8.verdict == "pass"
    assert r_n8.derived["r_hat"] == pytest.approx(1.0, rel=1e-12)


def test_r_table_skips_the_degenerate_cell(r_n8):
    assert all((row["k"], row["n"]) != (0, 0) for row in r_n8.table)
    assert r_n8.derived["skipped"] > 0
    assert r_n8.derived["cells"] == len(r_n8.table)


def test_r_is_nondecreasing_in_the_truncation(r_n8):
    r4 = estimate_r(Fraction(1, 2), 4)
    r6 = estimate_r(Fraction(1, 2), 6)
    assert r4.constant <= r6.constant <= r_n8.constant


# ---------------------------------------------------------------------------
# heat-commutator constant q


def test_q_constant_and_witness(q_n8):
    assert q_n8.constant == pytest.approx(Q_HAT_N8, rel=1e-9)
    assert q_n8.witness["n"] == -1
    assert q_n8.witness["level"] == 7
    # the winning eps is the injected closed-form maximizer ln(8/7)
    assert q_n8.witness["eps"] == pytest.approx(math.log(8.0 / 7.0), rel=1e-12)
    assert q_n8.witness["reproduced"] is True
    assert q_n8.verdict == "pass"


def test_q_chain_inequality(q_n8, r_n8):
    assert q_n8.derived["chain_ok"] is True
    assert q_n8.derived["chain_bound"] == 3.0 * r_n8.constant
    assert q_n8.constant <= q_n8.derived["chain_bound"]


def test_q_factor_cells_respect_the_closed_form_sup(q_n8):
    assert not any("fm_sup" in w for w in q_n8.warnings)


def test_q_is_deterministic(ising8_float, r_n8):
    grid = default_eps_grid(1e-3, 10.0, 40)
    a = estimate_q(Fraction(1, 2), 8, eps_grid=grid, rep=ising8_float,
                   r_report=r_n8)
    b = estimate_q(Fraction(1, 2), 8, eps_grid=grid, rep=ising8_float,
                   r_report=r_n8)
    assert a.to_dict() == b.to_dict()


def test_q_grid_validation(ising8_float):
    with pytest.raises(ValueError, match="nonempty and positive"):
        estimate_q(Fraction(1, 2), 8, eps_grid=[], rep=ising8_float)
    with pytest.raises(ValueError, match="nonempty and positive"):
        estimate_q(Fraction(1, 2), 8, eps_grid=[0.5, -1.0], rep=ising8_float)


def test_default_eps_grid():
    grid = default_eps_grid()
    assert grid.size == 200
    assert grid[0] == pytest.approx(1e-4)
    assert grid[-1] == pytest.approx(20.0)
    assert np.all(np.diff(np.log(grid)) > 0)
    with pytest.raises(ValueError, match="0 < lo < hi"):
        default_eps_grid(count=0)
    with pytest.raises(ValueError, match="0 < lo < hi"):
        default_eps_grid(lo=2.0, hi=1.0)


# ---------------------------------------------------------------------------
# coefficient decay


def test_piecewise_decay_constant(piecewise):
    report = decay_report(piecewise, 400)
    assert report.constant == piecewise.decay_constant == 32.0 / (3.0 * math.pi)
    assert report.witness["n"] == 2
    assert 0 < report.derived["stabilization_ratio"] < 1


def test_piecewise_decay_is_stable_under_the_cutoff(piecewise):
    assert decay_report(piecewise, 200).constant == \
        decay_report(piecewise, 400).constant


def test_single_mode_decay():
    report = decay_report(mode_field(5), 10)
    assert report.constant == 125.0
    assert report.witness["n"] == 5


def test_decay_with_no_qualifying_modes():
    report = decay_report(cosine_field(1), 10)
    assert report.constant == 0.0
    assert report.verdict == "pass"
    assert report.derived["stabilization_ratio"] is None


def test_decay_validation(piecewise):
    with pytest.raises(ValueError, match="n_max must be >= 2"):
        decay_report(piecewise, 1)


# ---------------------------------------------------------------------------
# mollifier convergence


def test_cosine_mollifier_errors_are_exactly_two_over_k_plus_one():
    report = mollifier_report(cosine_field(1), FEJER, k_max=8,
                              ladder=[1, 2, 4, 8], tol=0.5)
    got = {row["k"]: row["error"] for row in report.table}
    assert got == pytest.approx({k: 2.0 / (k + 1) for k in (1, 2, 4, 8)},
                                rel=1e-15)
    assert report.derived["monotone"] is True
    assert report.verdict == "pass"


def test_piecewise_mollifier_ladder(piecewise):
    report = mollifier_report(piecewise, FEJER, k_max=1 << 14, tol=0.1)
    errors = [row["error"] for row in report.table]
    assert all(b <= a for a, b in zip(errors, errors[1:]))
    assert 0.01 < errors[-1] < 0.1  # scales like 1/sqrt(k)
    assert all(row["tail_bound"] > 0 for row in report.table)
    assert report.verdict == "pass"


def test_piecewise_mollifier_needs_fejer(piecewise):
    with pytest.raises(TypeError, match="Fejer family"):
        mollifier_report(piecewise, GAUSSIAN, k_max=16)


def test_report_csv_round_trip(tmp_path):
    report = decay_report(mode_field(5), 10)
    path = tmp_path / "decay.csv"
    report.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,abs_coefficient,scaled"
    assert len(lines) == 1 + len(report.table)
