"""
Matrix representations of Theta_A, Theta_B and the monodromy, and algebraic
continuation of E+- from the right half-plane to the whole cover.

Row convention: Theta[E_i] = sum_j X_ij E_j. The operator word X o Y
("apply Y, then X") is then represented by the matrix product Y @ X, and the
column (E+, E-) at M^k z equals matrix_power(M, k) @ column at z.

Everything below is driven by the values of E+- at five distinguished points
(BoundaryData). Once those are known, E+- anywhere on the cover follows from
their values on the right half-strip rho > 0, |phi| < pi/2 by solving a 2x2
linear system and applying powers of M.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from src.heunsym.config import BUDGET, GENERIC_TOL
from src.heunsym.cover import (
    I_HAT,
    MINUS_I_HAT,
    MINUS_ONE_C,
    MINUS_ONE_P,
    ONE,
    CoverPoint,
    invert,
    shift,
)
from src.heunsym.errors import DegenerateParams, NonDiagonalizable, OutOfDomain
from src.heunsym.polys import PolySet
from src.heunsym.solver import EigenBasis, Solution, SolutionFrame, split_eigen

log = logging.getLogger("heunsym")

DIAG_C = np.diag([1.0 + 0j, -1.0 + 0j])   # matrix of Theta_C under the default normalization


@dataclass
class BoundaryData:
    """
    E+- at 1, (-1)_c = (1, pi), (-1)_p = (1, -pi), i = (1, pi/2), -i = (1, -pi/2).

    Each field holds the pair (E+, E-) at that point.
    """
    one: np.ndarray
    minus_one_c: np.ndarray
    minus_one_p: np.ndarray
    i: np.ndarray
    minus_i: np.ndarray
    mu: complex
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def product_at_one(self) -> complex:
        return complex(self.one[0] * self.one[1])

    def to_json(self) -> dict:
        def pair(v):
            return [[complex(x).real, complex(x).imag] for x in v]

        return {
            "one": pair(self.one),
            "minus_one_c": pair(self.minus_one_c),
            "minus_one_p": pair(self.minus_one_p),
            "i": pair(self.i),
            "minus_i": pair(self.minus_i),
            "residuals": self.residuals,
        }


def _three_point_residuals(bd: BoundaryData, ps: Optional[PolySet]) -> Dict[str, float]:
    mu = bd.mu
    c, p = bd.minus_one_c, bd.minus_one_p
    out = {
        "three_point_minus_one": abs(c[0] * p[1] + c[1] * p[0] - 2 * np.exp(-4 * mu) * bd.product_at_one),
        "three_point_i": abs(bd.i[0] * bd.minus_i[1] + bd.i[1] * bd.minus_i[0] - 2 * np.exp(-2 * mu) * bd.product_at_one),
    }
    if ps is not None:
        d_plus = ps.delta_plus / bd.one[0]
        d_minus = ps.delta_minus / bd.one[1]
        out["cross_ratio"] = abs(d_plus * (c[0] - p[0]) - d_minus * (c[1] - p[1]))
        cc, pp = continuation_constants(bd, ps)
        out["constants_c"] = float(np.max(np.abs(cc - c)))
        out["constants_p"] = float(np.max(np.abs(pp - p)))
    return out


def collect_boundary_data(basis: EigenBasis) -> BoundaryData:
    """Integrate along unit-circle arcs from 1 to each distinguished point."""
    values = {name: basis.jets(point)[:, 0].copy() for name, point in (
        ("one", ONE), ("minus_one_c", MINUS_ONE_C), ("minus_one_p", MINUS_ONE_P),
        ("i", I_HAT), ("minus_i", MINUS_I_HAT),
    )}
    bd = BoundaryData(mu=basis.params.mu_c, **values)
    bd.residuals = _three_point_residuals(bd, basis.polys)
    worst = max(bd.residuals.values())
    if worst > BUDGET:
        log.warning(f"Boundary relations above budget: {bd.residuals}")
    else:
        log.info(f"Boundary data collected, worst relation residual {worst:.3e}")
    return bd


# ---------------------------------------------------------------------------
# W-functionals
# ---------------------------------------------------------------------------

def bracket(basis: EigenBasis, s1: Solution, s2: Solution, at: CoverPoint,
            other: Optional[CoverPoint] = None) -> complex:
    """{{E1, E2}}(z, z~) = E1(z)E2(z~) + E2(z)E1(z~) - 2 e^{mu(z+1/z-2)} E1E2(1)."""
    other = invert(at) if other is None else other
    z = at.project()
    mu = basis.params.mu_c
    return (
        s1.value(at) * s2.value(other) + s2.value(at) * s1.value(other)
        - 2 * np.exp(mu * (z + 1 / z - 2)) * s1.value(ONE) * s2.value(ONE)
    )


def w_functional(sign: int, a_field: complex, b_field: complex, s: Solution, at: CoverPoint,
                 other: Optional[CoverPoint] = None, form: str = "r") -> complex:
    """
    W_sign[a, b; E](z, z~), z~ defaulting to 1/z.

    form="r" uses z^{2(1-ell)} r(z) and z^{2(ell-1)} r(1/z); form="q" uses
    the equal expressions q(1/z) + mu z^-2 p(1/z) and q(z) + mu z^2 p(z).
    """
    ps = s.basis.polys
    params = ps.params
    ell, mu, tw = params.ell, params.mu_c, params.tw
    other = invert(at) if other is None else other
    z = at.project()
    sg = (-1) ** ell
    if form == "r":
        r_here = z ** (2 * (1 - ell)) * ps.eval("r", z)
        r_there = z ** (2 * (ell - 1)) * ps.eval("r", 1 / z)
    elif form == "q":
        r_here = ps.eval("q", 1 / z) + mu / (z * z) * ps.eval("p", 1 / z)
        r_there = ps.eval("q", z) + mu * z * z * ps.eval("p", z)
    else:
        raise ValueError(f"unknown form {form!r}")
    E_here, E_there = s.value(at), s.value(other)
    return (
        sign * tw * sg * r_here * a_field * E_here
        - tw * sg * r_there * b_field * E_there
        - sign * z ** (ell - 1) * ps.eval("p", 1 / z) * b_field * E_here
        + z ** (1 - ell) * ps.eval("p", z) * a_field * E_there
    )


def w_identity_residual(sign: int, a_field: complex, b_field: complex, s1: Solution, s2: Solution,
                        at: CoverPoint, other: Optional[CoverPoint] = None) -> complex:
    """
    Difference of the two sides of the polylocal identity that expresses
    e^{mu(z+1/z)}[(2w)^-1 z^{1-ell} p a -+ (-1)^ell Q b] through W-functionals.
    Holds for any pair of solutions, fields and second point.
    """
    basis = s1.basis
    ps = basis.polys
    params = ps.params
    ell, mu, tw = params.ell, params.mu_c, params.tw
    z = at.project()
    sg = (-1) ** ell
    p = ps.eval("p", z)
    Q = ps.eval("q", z) + mu * z * z * p
    e = np.exp(mu * (z + 1 / z))
    lhs = e * (z ** (1 - ell) * p * a_field / tw - sign * sg * Q * b_field)
    pref = np.exp(2 * mu) / (2 * tw * s1.value(ONE) * s2.value(ONE))
    rhs = pref * (
        (-z ** (1 - ell) * p * a_field + sign * tw * sg * Q * b_field) * bracket(basis, s1, s2, at, other)
        + w_functional(1, a_field, sign * b_field, s2, at, other) * s1.value(at)
        + w_functional(-1, a_field, sign * b_field, s1, at, other) * s2.value(at)
    )
    return lhs - rhs


def theta_expansion_w(which: str, basis: EigenBasis, at: CoverPoint) -> np.ndarray:
    """
    Rows of the Theta_A or Theta_B matrix computed from W-functionals at one
    point. The result does not depend on `at`.
    """
    params = basis.params
    mu, tw = params.mu_c, params.tw
    plus, minus = basis.plus, basis.minus
    k = np.exp(2 * mu) / (2 * tw * basis.jets(ONE)[0, 0] * basis.jets(ONE)[1, 0])
    a_hat = CoverPoint(1 / at.rho, math.pi - at.phi)
    b_hat = CoverPoint(at.rho, math.pi + at.phi)
    out = np.zeros((2, 2), dtype=complex)
    for i, (s_sign, sol) in enumerate(((1, plus), (-1, minus))):
        if which == "A":
            a_field = -s_sign * sol.value(shift(b_hat, -1))
            b_field = -sol.value(a_hat)
        elif which == "B":
            a_field = sol.value(b_hat)
            b_field = s_sign * sol.value(shift(a_hat, -1))
        else:
            raise ValueError(f"W expansion exists for A and B only, got {which!r}")
        out[i, 0] = k * w_functional(1, a_field, b_field, minus, at)
        out[i, 1] = k * w_functional(-1, a_field, b_field, plus, at)
    return out


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

def matrices_AB(bd: BoundaryData, ps: PolySet) -> Tuple[np.ndarray, np.ndarray]:
    """
    Theta_A and Theta_B in the E+- basis; B = A @ diag(1, -1).

    Built with the right factor diag(Delta_+/E+(1), Delta_-/E-(1)). The form
    with the left factor diag(Delta_-/E-(1), Delta_+/E+(1)) gives the same
    matrices because the square rule for Theta_A forces
    Delta_+ (E+(c) - E+(p)) / E+(1) = Delta_- (E-(c) - E-(p)) / E-(1).
    The boundary residual `cross_ratio` measures that relation.
    """
    params = ps.params
    if not params.normalized:
        raise DegenerateParams("matrix representations need (2 omega)^2 (lambda + mu^2) = 1")
    if not np.all(np.isfinite(np.concatenate([bd.one, bd.minus_one_c, bd.minus_one_p]))):
        raise DegenerateParams("boundary data is not finite")
    c, p = bd.minus_one_c, bd.minus_one_p
    d_plus = ps.delta_plus / bd.one[0]
    d_minus = ps.delta_minus / bd.one[1]
    k = np.exp(2 * params.mu_c) / (2 * params.tw)
    A = k * np.array([
        [d_plus * (c[0] - p[0]), -d_minus * (c[0] + p[0])],
        [d_plus * (c[1] + p[1]), -d_minus * (c[1] - p[1])],
    ], dtype=complex)
    B = A @ DIAG_C
    return A, B


def matrix_A_left_form(bd: BoundaryData, ps: PolySet) -> np.ndarray:
    """Theta_A with the diagonal factor on the left; equals matrices_AB(bd, ps)[0]."""
    c, p = bd.minus_one_c, bd.minus_one_p
    d_plus = ps.delta_plus / bd.one[0]
    d_minus = ps.delta_minus / bd.one[1]
    k = np.exp(2 * ps.params.mu_c) / (2 * ps.params.tw)
    return k * np.diag([d_minus, d_plus]) @ np.array([
        [c[1] - p[1], -(c[0] + p[0])],
        [c[1] + p[1], -(c[0] - p[0])],
    ], dtype=complex)


def matrix_M(bd: BoundaryData) -> np.ndarray:
    c, p = bd.minus_one_c, bd.minus_one_p
    K = np.exp(4 * bd.mu) / (2 * bd.product_at_one)
    diag = c[0] * c[1] + p[0] * p[1]
    M = K * np.array([
        [diag, c[0] ** 2 - p[0] ** 2],
        [c[1] ** 2 - p[1] ** 2, diag],
    ], dtype=complex)
    det_err = abs(np.linalg.det(M) - 1)
    if det_err > BUDGET:
        log.warning(f"det M deviates from 1 by {det_err:.3e}")
    return M


def monodromy_loop_matrix(basis: EigenBasis) -> np.ndarray:
    """Row i: the E+- coefficients of E_i continued once around the origin."""
    loop = shift(ONE, 1)
    data = basis.jets(loop)
    rows = [split_eigen(basis, SolutionFrame(ONE, complex(data[i, 0]), complex(data[i, 1]))) for i in range(2)]
    return np.array(rows, dtype=complex)


def matrix_algebra_residuals(A: np.ndarray, B: np.ndarray, M: np.ndarray, delta: complex) -> Dict[str, float]:
    """Matrix forms of the composition and commutation rules (max entry of each defect)."""
    C = DIAG_C
    Mi = np.linalg.inv(M)
    I = np.eye(2)

    def size(x):
        return float(np.max(np.abs(x)))

    return {
        "AoA": size(A @ A + delta * I),
        "BoB": size(B @ B - delta * M),
        "AoB": size(B @ A - delta * C @ Mi),
        "BoA": size(A @ B + delta * C),
        "BoC": size(C @ B + A @ M),
        "CoB": size(B @ C - A),
        "CoA": size(A @ C - B),
        "AoC": size(C @ A + B @ Mi),
        "MA": size(A @ M - Mi @ A),
        "MB": size(B @ M - M @ B),
        "MC": size(C @ M - Mi @ C),
        "det_A": abs(np.linalg.det(A) - delta),
        "det_B": abs(np.linalg.det(B) + delta),
        "det_M": abs(np.linalg.det(M) - 1),
        "M_inverse": size(Mi - C @ M @ C),
    }


def is_generic(ps: PolySet, M: np.ndarray, tol: Optional[float] = None) -> bool:
    """Delta_pm nonzero and M with distinct eigenvalues."""
    tol = GENERIC_TOL if tol is None else tol
    disc = np.trace(M) ** 2 - 4 * np.linalg.det(M)
    return min(abs(ps.delta_plus), abs(ps.delta_minus)) > tol and abs(np.sqrt(disc)) > tol


def require_generic(ps: PolySet, M: np.ndarray):
    if not is_generic(ps, M):
        raise NonDiagonalizable("non-generic parameters (Delta_pm = 0 or a double eigenvalue of M); "
                                "algebraic continuation is refused")


def continue_monodromy(values: np.ndarray, k: int, M: np.ndarray) -> np.ndarray:
    """(E+, E-) at M^k z from the column at z."""
    return np.linalg.matrix_power(M, k) @ np.asarray(values, dtype=complex)


# ---------------------------------------------------------------------------
# Half-plane continuation
# ---------------------------------------------------------------------------

def continuation_constants(bd: BoundaryData, ps: PolySet) -> Tuple[np.ndarray, np.ndarray]:
    """
    E+- at (-1)_c and (-1)_p recovered from the values at +-i alone.

    Theta_B[E_s] at -i and Theta_A[E_s] at i reduce to known multiples of
    E_s(+-i); inverting the 2x2 system gives the Theta_A row of E_s, and the
    row entries are c_s -+ p_s up to known factors.
    """
    params = ps.params
    ell, mu, tw = params.ell, params.mu_c, params.tw
    sg = (-1) ** ell
    a1, b1 = bd.minus_i
    a2, b2 = bd.i
    omega_sum = a1 * b2 + a2 * b1
    p_i, q_i = ps.eval("p", 1j), ps.eval("q", 1j)
    p_mi, q_mi = ps.eval("p", -1j), ps.eval("q", -1j)
    c_out = np.zeros(2, dtype=complex)
    p_out = np.zeros(2, dtype=complex)
    for idx, s in enumerate((1, -1)):
        E_i, E_mi = bd.i[idx], bd.minus_i[idx]
        R_B = s * (-sg) * (q_mi - mu * p_mi) * E_mi + (-1j) ** (1 - ell) * p_mi * E_i / tw
        R_A = sg * ((q_i - mu * p_i) * E_i + s * 1j ** (ell - 1) * p_i * E_mi / tw)
        u = tw * (b2 * R_B + b1 * R_A) / (ps.delta_plus * bd.one[1])
        v = tw * (a2 * R_B - a1 * R_A) / (ps.delta_minus * bd.one[0])
        c_out[idx] = (u + v) / 2
        p_out[idx] = s * (v - u) / 2
    if abs(omega_sum) < GENERIC_TOL:
        raise DegenerateParams("three-point sum at +-i vanishes")
    return c_out, p_out


def _strip_coefficients(ps: PolySet, z: complex, s: int):
    params = ps.params
    ell, mu, S, tw = params.ell, params.mu_c, params.S, params.tw
    sg = (-1) ** ell
    e = np.exp(mu * (z + 1 / z))
    p, q = ps.eval("p", z), ps.eval("q", z)
    p_inv, q_inv = ps.eval("p", 1 / z), ps.eval("q", 1 / z)
    Q = q + mu * z * z * p
    Q_inv = q_inv + mu / (z * z) * p_inv
    alpha1 = tw * z ** (1 - ell) * e * S * p
    beta1 = s * (-sg) * e * Q
    alpha2 = sg * e * Q_inv
    beta2 = sg * e * s / tw * (-z) ** (ell - 1) * p_inv
    return alpha1, beta1, alpha2, beta2


def left_half_values(here: np.ndarray, there: np.ndarray, at: CoverPoint,
                     A: np.ndarray, B: np.ndarray, ps: PolySet) -> Tuple[np.ndarray, np.ndarray]:
    """
    From (E+, E-) at z and at 1/z (z in the right half-strip) return
    (E+, E-) at (rho, phi + pi) and at (1/rho, -phi - pi).
    """
    z = at.project()
    rhs_b = B @ here
    rhs_a = A @ there
    X = np.zeros(2, dtype=complex)
    Y = np.zeros(2, dtype=complex)
    for idx, s in enumerate((1, -1)):
        a1, b1, a2, b2 = _strip_coefficients(ps, z, s)
        sol = np.linalg.solve(np.array([[a1, b1], [a2, b2]]), np.array([rhs_b[idx], rhs_a[idx]]))
        X[idx], Y[idx] = sol
    return X, Y


def _check_strip(at: CoverPoint):
    if not -math.pi / 2 <= at.phi < math.pi / 2:
        raise OutOfDomain(f"{at} is outside the right half-strip")


def continue_left_half(basis: EigenBasis, at: CoverPoint, bd: BoundaryData,
                       ps: Optional[PolySet] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    (E+, E-) at (rho, phi + pi) and (rho, phi - pi) for a point of the right
    half-strip, using only right half-strip values and the boundary data.
    """
    _check_strip(at)
    ps = basis.polys if ps is None else ps
    require_generic(ps, matrix_M(bd))
    A, B = matrices_AB(bd, ps)
    here = basis.jets(at)[:, 0]
    there = basis.jets(invert(at))[:, 0]
    upper, _ = left_half_values(here, there, at, A, B, ps)
    _, lower = left_half_values(there, here, invert(at), A, B, ps)
    return upper, lower


def continue_anywhere(basis: EigenBasis, at: CoverPoint, bd: BoundaryData,
                      ps: Optional[PolySet] = None, M: Optional[np.ndarray] = None) -> np.ndarray:
    """
    (E+, E-) at any cover point: reduce phi to [-pi/2, pi/2) plus n*pi, then
    use half-strip values, one left-half step when n is odd, and M powers.
    """
    ps = basis.polys if ps is None else ps
    M = matrix_M(bd) if M is None else M
    require_generic(ps, M)
    n = math.floor((at.phi + math.pi / 2) / math.pi)
    base = CoverPoint(at.rho, at.phi - n * math.pi)
    if n % 2 == 0:
        return continue_monodromy(basis.jets(base)[:, 0], n // 2, M)
    A, B = matrices_AB(bd, ps)
    upper, _ = left_half_values(basis.jets(base)[:, 0], basis.jets(invert(base))[:, 0], base, A, B, ps)
    return continue_monodromy(upper, (n - 1) // 2, M)


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------

@dataclass
class MonodromyReport:
    """Matrices, their algebra and the boundary relations for one basis."""
    boundary: BoundaryData
    A: np.ndarray
    B: np.ndarray
    M: np.ndarray
    delta: complex
    generic: bool
    algebra: Dict[str, float]
    loop_residual: Optional[float] = None

    @property
    def det_M(self) -> complex:
        return complex(np.linalg.det(self.M))

    def residuals(self) -> Dict[str, float]:
        out = dict(self.boundary.residuals)
        out.update({f"matrix_{k}": v for k, v in self.algebra.items()})
        if self.loop_residual is not None:
            out["loop"] = self.loop_residual
        return out

    def passed(self, budget: float = BUDGET) -> bool:
        return all(v <= budget for v in self.residuals().values())

    def to_json(self, budget: float = BUDGET) -> dict:
        def mat(X):
            return [[[complex(x).real, complex(x).imag] for x in row] for row in X]

        det = self.det_M
        return {
            "A": mat(self.A),
            "B": mat(self.B),
            "M": mat(self.M),
            "det_M": [det.real, det.imag],
            "det_M_error": abs(det - 1),
            "generic": self.generic,
            "boundary": self.boundary.to_json(),
            "residuals": self.residuals(),
            "passed": self.passed(budget),
        }


def monodromy_report(basis: EigenBasis, with_loop: bool = True) -> MonodromyReport:
    ps = basis.polys
    bd = collect_boundary_data(basis)
    A, B = matrices_AB(bd, ps)
    M = matrix_M(bd)
    algebra = matrix_algebra_residuals(A, B, M, ps.delta_c)
    loop = None
    if with_loop:
        loop = float(np.max(np.abs(monodromy_loop_matrix(basis) - M)))
    generic = is_generic(ps, M)
    if not generic:
        log.warning("Parameters are non-generic: continuation and Laurent layers will refuse")
    return MonodromyReport(bd, A, B, M, ps.delta_c, generic, algebra, loop)
