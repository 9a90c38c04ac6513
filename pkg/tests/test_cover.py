"""
Tests for the universal cover model.

Named points, the point action of A, B, C and M^k, canonical forms of
composed lifts, powers on different sheets.
"""
import cmath
import math

import numpy as np
import pytest

from src.heunsym.cover import (
    A,
    B,
    C,
    I_HAT,
    ID,
    MINUS_I_HAT,
    MINUS_ONE_C,
    MINUS_ONE_P,
    ONE,
    CoverPoint,
    LiftKind,
    LiftMap,
    apply_lift,
    compose_lifts,
    cover_pow,
    invert,
    isclose,
    shift,
)


def test_named_points_project():
    """1, i, -i and both lifts of -1 project where they should."""
    assert ONE.project() == 1
    assert cmath.isclose(I_HAT.project(), 1j, abs_tol=1e-15)
    assert cmath.isclose(MINUS_I_HAT.project(), -1j, abs_tol=1e-15)
    assert cmath.isclose(MINUS_ONE_C.project(), -1, abs_tol=1e-15)
    assert cmath.isclose(MINUS_ONE_P.project(), -1, abs_tol=1e-15)
    assert MINUS_ONE_C != MINUS_ONE_P


def test_lift_point_action():
    """A, B, C act as (1/rho, pi-phi), (rho, pi+phi), (1/rho, -phi)."""
    p = CoverPoint(2.0, 0.3)
    assert isclose(apply_lift(A, p), CoverPoint(0.5, math.pi - 0.3))
    assert isclose(apply_lift(B, p), CoverPoint(2.0, math.pi + 0.3))
    assert isclose(apply_lift(C, p), CoverPoint(0.5, -0.3))
    assert isclose(apply_lift(LiftMap.m_shift(-2), p), CoverPoint(2.0, 0.3 - 4 * math.pi))


def test_lifts_cover_their_maps():
    """Projections of A, B, C images are -1/z, -z, 1/z."""
    p = CoverPoint(1.7, -2.1)
    z = p.project()
    assert cmath.isclose(apply_lift(A, p).project(), -1 / z, rel_tol=1e-13)
    assert cmath.isclose(apply_lift(B, p).project(), -z, rel_tol=1e-13)
    assert cmath.isclose(apply_lift(C, p).project(), 1 / z, rel_tol=1e-13)


@pytest.mark.parametrize("m1, m2, expected", [
    (A, A, ID),
    (B, B, LiftMap.m_shift(1)),
    (C, C, ID),
    (A, B, LiftMap(LiftKind.C, -1)),
    (B, A, LiftMap(LiftKind.C, 0)),
    (B, C, LiftMap(LiftKind.A, 1)),
    (C, B, A),
    (C, A, B),
    (A, C, LiftMap(LiftKind.B, -1)),
])
def test_compose_lifts_table(m1, m2, expected):
    """Canonical forms of the nine two-letter words."""
    assert compose_lifts(m1, m2) == expected


def test_compose_matches_point_action():
    """compose_lifts(m1, m2) acts as m1 followed by m2 for every pair."""
    rng = np.random.default_rng(3)
    lifts = [ID, A, B, C, LiftMap(LiftKind.A, 2), LiftMap(LiftKind.B, -1), LiftMap.m_shift(3)]
    for _ in range(5):
        p = CoverPoint(float(np.exp(rng.uniform(-1, 1))), float(rng.uniform(-9, 9)))
        for m1 in lifts:
            for m2 in lifts:
                assert isclose(apply_lift(compose_lifts(m1, m2), p), apply_lift(m2, apply_lift(m1, p)), atol=1e-9)


def test_cover_pow_changes_sheet():
    """A half-integer power flips sign after one turn; an integer power does not."""
    p = CoverPoint(0.8, 1.1)
    assert cmath.isclose(cover_pow(shift(p, 1), 0.5), -cover_pow(p, 0.5), rel_tol=1e-13)
    assert cmath.isclose(cover_pow(shift(p, 1), 3), cover_pow(p, 3), rel_tol=1e-12)
    assert cmath.isclose(cover_pow(p, 2), p.project() ** 2, rel_tol=1e-13)


def test_invert_is_c_lift():
    """invert is the C lift and an involution."""
    p = CoverPoint(3.0, -7.5)
    assert invert(p) == apply_lift(C, p)
    assert isclose(invert(invert(p)), p)


def test_w_round_trip():
    """from_w inverts the log coordinate."""
    p = CoverPoint(0.25, 12.0)
    assert isclose(CoverPoint.from_w(p.w), p)
    assert p.to_json() == {"rho": 0.25, "phi": 12.0}


@pytest.mark.parametrize("rho", [0.0, -1.0, float("inf")])
def test_rejects_bad_rho(rho):
    """rho must be positive and finite."""
    with pytest.raises(ValueError):
        CoverPoint(rho, 0.0)


def test_lift_names():
    """String forms used in reports."""
    assert str(A) == "A"
    assert str(LiftMap.m_shift(2)) == "M^2"
    assert str(LiftMap(LiftKind.C, -1)) == "M^-1oC"
