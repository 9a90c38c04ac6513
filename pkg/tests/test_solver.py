"""
Tests for path integration, the eigenbasis and the Theta operators.

Integrator against the power-series oracle, eigenfunction relations,
Wronskian constancy, splitting, Theta images solving the equation,
composition and commutation rules (with a negative control), CSV export.
"""
import cmath
import math

import numpy as np
import pytest

from src.heunsym.cover import ONE, CoverPoint, invert, shift
from src.heunsym.errors import ZeroSolution
from src.heunsym.solver import (
    CSV_COLUMNS,
    AnalyticFunction,
    SolutionFrame,
    ThetaImage,
    eigen_residual,
    integrate_path,
    polylocal_residual,
    random_points,
    random_solutions,
    sample_csv,
    sdche_residual,
    split_eigen,
    theta_apply,
    theta_c_square_defect,
    theta_image,
    verify_compositions,
    wronskian,
)
from tests.conftest import REF, taylor_jet


@pytest.mark.parametrize("target", [
    CoverPoint(2.0, 0.7),
    CoverPoint(0.5, -2.5),
    CoverPoint(1.3, 2 * math.pi + 0.4),
    CoverPoint(0.7, -4 * math.pi - 1.0),
])
def test_integrator_matches_taylor_oracle(ref_basis, target):
    """E+ at points on several sheets agrees with local power-series continuation."""
    start = ref_basis.cauchy_plus
    oracle = taylor_jet(REF, target, start.value, start.deriv)
    value, deriv = ref_basis.jets(target)[0]
    assert abs(value - oracle[0]) < 1e-9 * max(1.0, abs(oracle[0]))
    assert abs(deriv - oracle[1]) < 1e-9 * max(1.0, abs(oracle[1]))


def test_integrate_path_from_frame(ref_basis):
    """integrate_path from an intermediate frame lands on the cached values."""
    mid = CoverPoint(1.5, 1.0)
    frame = ref_basis.frame(-1, mid)
    end = integrate_path(REF, frame, CoverPoint(0.8, -1.2))
    assert cmath.isclose(end.value, ref_basis.jets(CoverPoint(0.8, -1.2))[1, 0], rel_tol=1e-8)


def test_eigen_relations(ref_basis, complex_basis):
    """E' - mu E = +-(2w)^-1 z^{ell-1} E(1/z) at ten points."""
    rng = np.random.default_rng(1)
    for basis in (ref_basis, complex_basis):
        for p in random_points(10, rng):
            assert eigen_residual(basis, p) < 1e-9


def test_polylocal_identity(ell2_basis):
    """E+(z)E-(1/z) + E-(z)E+(1/z) = 2 e^{mu(z+1/z-2)} E+E-(1)."""
    rng = np.random.default_rng(2)
    for p in random_points(5, rng):
        assert polylocal_residual(ell2_basis, p) < 1e-9


def test_wronskian_constant(ref_basis):
    """The scaled Wronskian of E+, E- takes one value across five points."""
    rng = np.random.default_rng(4)
    values = [wronskian(ref_basis.plus, ref_basis.minus, p) for p in random_points(5, rng)]
    assert max(abs(w - values[0]) for w in values) < 1e-9
    assert abs(values[0]) > 1e-3


def test_split_eigen_round_trip(ref_basis):
    """Splitting the Cauchy data of c+ E+ + c- E- returns (c+, c-)."""
    at = CoverPoint(1.4, 2.2)
    s = ref_basis.handle(0.3 - 1j, 2.0)
    value, deriv = s.jet(at)
    c_plus, c_minus = split_eigen(ref_basis, SolutionFrame(at, value, deriv))
    assert cmath.isclose(c_plus, 0.3 - 1j, rel_tol=1e-9)
    assert cmath.isclose(c_minus, 2.0, rel_tol=1e-9)


def test_split_zero_data(ref_basis):
    """(0, 0) Cauchy data is refused."""
    with pytest.raises(ZeroSolution):
        split_eigen(ref_basis, SolutionFrame(ONE, 0j, 0j))


def test_theta_c_eigenvalues(ref_basis):
    """Theta_C E+- = +-E+- for the normalized 2 omega."""
    p = CoverPoint(0.9, 0.6)
    assert cmath.isclose(theta_apply("C", ref_basis.plus, p), ref_basis.plus.value(p), rel_tol=1e-9)
    assert cmath.isclose(theta_apply("C", ref_basis.minus, p), -ref_basis.minus.value(p), rel_tol=1e-9)


def test_theta_images_solve_equation(ref_basis, ell2_basis):
    """Theta_A, Theta_B, Theta_C map solutions to solutions."""
    rng = np.random.default_rng(5)
    for basis in (ref_basis, ell2_basis):
        for s in random_solutions(basis, 3, rng):
            for which in "ABC":
                image = ThetaImage(which, s)
                for p in random_points(5, rng):
                    assert abs(sdche_residual(basis.params, image, p)) < 1e-7 * max(1.0, abs(image.value(p)))


def test_theta_image_handle_agrees(ref_basis):
    """The eigenbasis expansion of a Theta image reproduces it elsewhere."""
    s = ref_basis.handle(1.0, 0.5j)
    handle = theta_image("A", s)
    p = CoverPoint(1.8, -0.9)
    assert cmath.isclose(handle.value(p), theta_apply("A", s, p), rel_tol=1e-8)


def test_theta_c_square_defect_vanishes(ref_basis):
    """Theta_C o Theta_C f - kappa f = -(2w)^2 R[f] for a non-solution f."""
    f = AnalyticFunction(ref_basis, lambda z: z ** 2 + 1 / z, lambda z: 2 * z - 1 / z ** 2, lambda z: 2 + 2 / z ** 3)
    for p in (CoverPoint(1.2, 0.3), CoverPoint(0.6, -2.0)):
        assert abs(theta_c_square_defect(ref_basis, f, p)) < 1e-10


def test_compositions_pass(ref_basis):
    """Nine composition rules and three commutation families hold."""
    report = verify_compositions(ref_basis, seed=0)
    assert report.passed(), report.failures()
    assert not report.flags


def test_compositions_complex_lambda(complex_basis):
    """Rules hold for a complex lambda as well."""
    report = verify_compositions(complex_basis, n_solutions=2, n_points=3, seed=1)
    assert report.passed(), report.failures()


def test_compositions_negative_control(ref_basis):
    """Flipping the sign of Delta breaks exactly the rules carrying Delta."""
    report = verify_compositions(ref_basis, n_solutions=2, n_points=2, seed=2, delta_sign=-1)
    failures = set(report.failures())
    assert {"AoA", "BoB", "AoB", "BoA"} <= failures
    assert not failures & {"CoC", "CoA", "AoC", "CoB", "BoC", "MkA", "MkB", "MkC"}


def test_commutation_with_monodromy(ref_basis):
    """Theta_B commutes with M; Theta_C reverses it."""
    s = ref_basis.handle(1.0, -0.4)
    p = CoverPoint(1.1, 0.2)
    assert cmath.isclose(theta_apply("B", s, shift(p, 1)), theta_apply("B", s.shifted(1), p), rel_tol=1e-8)
    assert cmath.isclose(theta_apply("C", s, shift(p, 1)), theta_apply("C", s.shifted(-1), p), rel_tol=1e-8)


def test_sample_csv(ref_basis):
    """CSV export has the documented header and one row per point."""
    text = sample_csv(ref_basis, [ONE, invert(CoverPoint(2.0, 0.5))])
    lines = text.strip().splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 3
    first = [float(x) for x in lines[1].split(",")]
    assert first[:4] == [1.0, 0.0, 1.0, 0.0]
