"""
Tests for the monodromy eigen-combinations and their Laurent series.

Series values against the integrator on three circles, single-valuedness
after the gamma twist, eigenvalue product, recurrence defect, refusal of a
wrong exponent and of a too small truncation.
"""
import math

import numpy as np
import pytest

from src.heunsym.cover import ONE, CoverPoint
from src.heunsym.errors import InvalidParams, NoDecay
from src.heunsym.laurent import (
    build_series,
    eigen_anchor,
    eval_series,
    eval_series_derivative,
    laurent_pair,
    monodromy_eigen,
    recurrence_residuals,
    series_exponent,
    single_valuedness_residual,
)


@pytest.fixture(scope="module")
def ref_pair(ref_basis, ref_report):
    return laurent_pair(ref_basis, ref_report.M, ref_report.boundary)


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("sign", [1, -1])
def test_series_matches_integrator(ref_basis, ref_pair, rho, sign):
    """sum g_k z^{k - gamma} equals the integrated eigen-combination."""
    ls = ref_pair.solution(sign)
    combo = ref_pair.eigen.combo(sign)
    for phi in (-2.0, 0.4, 2.9):
        at = CoverPoint(rho, phi)
        want = combo @ ref_basis.jets(at)[:, 0]
        got = eval_series(ls, at)
        assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_series_derivative(ref_basis, ref_pair):
    """The termwise derivative matches the integrated derivative."""
    at = CoverPoint(1.3, -0.6)
    want = ref_pair.eigen.combo(1) @ ref_basis.jets(at)[:, 1]
    got = eval_series_derivative(ref_pair.plus, at)
    assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_anchor_values(ref_basis, ref_pair):
    """Both series reproduce their Cauchy data at the lifted unit."""
    for sign in (1, -1):
        anchor = eigen_anchor(ref_basis, ref_pair.eigen, sign)
        ls = ref_pair.solution(sign)
        assert abs(eval_series(ls, ONE) - anchor.value) < 1e-10 * max(1.0, abs(anchor.value))
        assert ls.anchor_mismatch < 1e-7


def test_eigenvalue_product(ref_pair):
    """Lambda_+ Lambda_- = det M = 1, and both agree with numpy's eigenvalues."""
    eig = ref_pair.eigen
    assert abs(eig.Lambda_plus * eig.Lambda_minus - 1) < 1e-10
    assert eig.eig_residual < 1e-9


@pytest.mark.parametrize("sign", [1, -1])
def test_single_valuedness(ref_basis, ref_pair, sign):
    """z^gamma E_[sign] returns to itself after one turn."""
    for at in (CoverPoint(0.7, 0.2), CoverPoint(1.5, -1.9)):
        assert single_valuedness_residual(ref_basis, ref_pair.eigen, sign, at) < 1e-8


def test_eigen_combination_scales_under_loop(ref_basis, ref_report, ref_pair):
    """E_[+](M z) = Lambda_+ E_[+](z)."""
    eig = ref_pair.eigen
    at = CoverPoint(0.9, 1.0)
    here = eig.combo(1) @ ref_basis.jets(at)[:, 0]
    there = eig.combo(1) @ ref_basis.jets(CoverPoint(0.9, 1.0 + 2 * math.pi))[:, 0]
    assert abs(there - eig.Lambda_plus * here) < 1e-8 * max(1.0, abs(there))


def test_recurrence_defect(ref_pair):
    """Interior rows of the three-term recurrence vanish."""
    for sign in (1, -1):
        assert recurrence_residuals(ref_pair.solution(sign)) < 1e-9


def test_tails_decay(ref_pair):
    """Both ends of the accepted coefficient window are negligible."""
    assert ref_pair.plus.tail_ratio() < 1e-14
    assert ref_pair.minus.tail_ratio() < 1e-14


def test_explicit_truncation(ref_basis, ref_report):
    """A larger starting N is honoured."""
    pair = laurent_pair(ref_basis, ref_report.M, ref_report.boundary, N=128)
    assert pair.plus.N >= 128
    assert pair.plus.coeffs.shape == (2 * pair.plus.N + 1,)


def test_wrong_exponent_has_no_decay(ref_basis, ref_pair):
    """Shifting the exponent off its value leaves only a formal series."""
    gamma = series_exponent(ref_pair.eigen, 1) + 0.1
    with pytest.raises(NoDecay):
        build_series(ref_basis.params, gamma, eigen_anchor(ref_basis, ref_pair.eigen, 1))


def test_small_truncation_refused(ref_basis, ref_pair):
    """N below 16 is a usage error."""
    with pytest.raises(InvalidParams):
        build_series(ref_basis.params, series_exponent(ref_pair.eigen, 1),
                     eigen_anchor(ref_basis, ref_pair.eigen, 1), N=8)


def test_eigen_from_boundary(ref_report):
    """monodromy_eigen on boundary data gives conjugate combinations (a, b), (a, -b)."""
    eig = monodromy_eigen(ref_report.M, ref_report.boundary)
    assert eig.combo_plus[0] == eig.combo_minus[0]
    assert eig.combo_plus[1] == -eig.combo_minus[1]
    M = ref_report.M
    row = eig.combo_plus
    # row @ M = Lambda row for a left eigenvector in the row convention
    assert np.allclose(row @ M, eig.Lambda_plus * row, atol=1e-8)


def test_json_shape(ref_pair):
    """Both series and the eigen data serialize as [re, im] pairs."""
    data = ref_pair.to_json()
    assert set(data) == {"eigen", "plus", "minus"}
    assert len(data["plus"]["coeffs"]) == 2 * data["plus"]["N"] + 1
    assert len(data["eigen"]["gamma_plus"]) == 2
