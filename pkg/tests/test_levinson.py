import json
import math

import pytest

from ablevinson.errors import DomainError
from ablevinson.levinson import (
    LevinsonReport,
    analytic_lhs,
    default_tolerance,
    levinson_lhs,
    levinson_rhs,
    reports_to_json,
    rhs_terms,
    soliton_expected,
    verify,
)
from ablevinson.potentials import (
    SolitonParams,
    make_bp_soliton,
    make_centrifugal,
    make_conventional_ab,
    make_flux_well,
    make_free,
    make_pure_flux,
    make_returned_flux,
)

PI = math.pi
TOL = 1e-3 * PI


@pytest.mark.parametrize(
    "q,m,expected",
    [(1, 0, PI), (1, 1, 0.0), (2, 3, -2 * PI), (2, -2, 2 * PI), (2, -1, 2 * PI), (3, 7, -3 * PI)],
)
def test_soliton_expected(q, m, expected):
    assert soliton_expected(q, m) == pytest.approx(expected)


@pytest.mark.parametrize("q", [0, -1, 1.5])
def test_soliton_expected_rejects(q):
    with pytest.raises(DomainError):
        soliton_expected(q, 0)


def test_rhs_examples():
    assert levinson_rhs(make_returned_flux(PI), 1) == pytest.approx(-PI / 4, abs=1e-12)
    soliton1 = make_bp_soliton(SolitonParams(1))
    assert levinson_rhs(soliton1, 0) == pytest.approx(PI, abs=1e-12)
    assert levinson_rhs(make_bp_soliton(SolitonParams(2)), -3) == pytest.approx(2 * PI, abs=1e-12)


def test_half_bound_inclusion_rule():
    soliton = make_bp_soliton(SolitonParams(1))
    t = rhs_terms(soliton, 0)  # mu = 1
    assert t.half_bound and t.half_bound_included
    t = rhs_terms(soliton, -1)  # mu = 0 constant solution
    assert t.half_bound and not t.half_bound_included and t.caveat is None
    t = rhs_terms(make_free(), 0)
    assert t.half_bound and not t.half_bound_included and t.rhs == 0.0


def test_conventional_lhs():
    assert levinson_lhs(make_conventional_ab(0.6), 1) == pytest.approx(0.15 * PI, abs=TOL)


def test_verify_free():
    reports = verify(make_free(), range(-3, 4), 1e-6)
    assert all(r.passed and r.residual == 0.0 for r in reports)


def test_verify_centrifugal():
    reports = verify(make_centrifugal(0.5, 0.0, 1.0), range(-3, 4), TOL)
    assert [r.m for r in reports] == list(range(-3, 4))
    assert all(r.passed for r in reports)


def test_verify_soliton_q1():
    model = make_bp_soliton(SolitonParams(1))
    reports = verify(model, range(-4, 5))
    assert default_tolerance(model) == pytest.approx(2e-2 * PI)
    assert all(r.passed for r in reports)
    rhs = [r.rhs / PI for r in reports]
    assert rhs == pytest.approx([1, 1, 1, 1, 1, 0, -1, -1, -1], abs=1e-12)


def test_verify_well_counts_bound_states():
    reports = verify(make_flux_well(0.3, 25.0, 1.0), [0, 2])
    assert all(r.passed for r in reports)
    assert [r.n_bound for r in reports] == [2, 1]


def test_flux_only_invariant():
    for model in (make_returned_flux(PI), make_pure_flux(0.5), make_conventional_ab(1.8)):
        for m in (-5, 0, 5):
            expected = 0.5 * PI * (abs(m - model.alpha) - abs(m - model.beta))
            assert levinson_lhs(model, m) == pytest.approx(expected, abs=TOL)
            assert analytic_lhs(model, m) == pytest.approx(expected)


def test_integer_flux_still_shifts():
    assert abs(levinson_lhs(make_returned_flux(2 * PI), 1)) >= PI / 4 - TOL


def test_pure_flux_standard_relation():
    for m in (-2, 0, 1, 2):
        assert levinson_lhs(make_pure_flux(0.3), m) == pytest.approx(0.0, abs=TOL)


def test_symmetry_breaking():
    model = make_centrifugal(0.0, 0.5, 1.0)
    assert abs(levinson_lhs(model, 1) - levinson_lhs(model, -1)) > 0.1


def test_json_fields():
    reports = verify(make_free(), [0, 1], 1e-6)
    data = json.loads(reports_to_json(reports))
    assert list(data[0]) == [
        "m", "lhs", "n_bound", "half_bound", "nu", "mu", "rhs", "residual", "passed", "caveat",
    ]
    assert data[1]["m"] == 1 and data[1]["passed"] is True


def test_json_seventeen_digits():
    r = LevinsonReport(1, 0.1, 0, False, 1.0, 2.0, -PI, 0.0, True, None)
    text = reports_to_json([r])
    assert "0.10000000000000001" in text
    assert "-3.1415926535897931" in text


def test_bad_tolerance():
    with pytest.raises(DomainError):
        verify(make_free(), [0], 0.0)
