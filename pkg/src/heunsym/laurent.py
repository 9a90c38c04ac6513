"""
Monodromy eigen-combinations and their generalized Laurent series.

The combinations E_[+-] = a E+ +- b E- satisfy E_[+-](M z) = Lambda_+- E_[+-](z).
With gamma_+- = i Log(Lambda_+-) / (2 pi) the function z^{gamma_+-} E_[+-] is
single-valued, so E_[+-] = sum_k g_k z^{k - gamma_+-}. For a series
sum_k g_k z^{k + gamma} the coefficients obey, with n = k + gamma,

    -mu (n + l) g_{k-1} + (n (n + l) + lambda) g_k + mu (n + 1) g_{k+1} = 0.

Only the right exponent admits a two-sided decaying solution; it is found as
the null vector of the truncated tridiagonal system.
"""
from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from src.heunsym.config import (
    ANCHOR_TOL,
    GENERIC_TOL,
    LAURENT_N_CAP,
    LAURENT_N_START,
    NULL_TOL,
    TAIL_TOL,
)
from src.heunsym.cover import ONE, CoverPoint, shift
from src.heunsym.errors import InvalidParams, NoDecay, NonDiagonalizable, SingularSystem
from src.heunsym.monodromy import BoundaryData
from src.heunsym.polys import HeunParams, cpair
from src.heunsym.solver import EigenBasis, SolutionFrame

log = logging.getLogger("heunsym")

_INVERSE_STEPS = 4


@dataclass
class MonodromyEigen:
    Lambda_plus: complex
    Lambda_minus: complex
    gamma_plus: complex
    gamma_minus: complex
    combo_plus: np.ndarray    # row vector (a, b): E_[+] = a E+ + b E-
    combo_minus: np.ndarray   # (a, -b)
    eig_residual: float = 0.0  # distance to numpy's eigenvalues of M

    def combo(self, sign: int) -> np.ndarray:
        return self.combo_plus if sign > 0 else self.combo_minus

    def Lambda(self, sign: int) -> complex:
        return self.Lambda_plus if sign > 0 else self.Lambda_minus

    def gamma(self, sign: int) -> complex:
        return self.gamma_plus if sign > 0 else self.gamma_minus

    def to_json(self) -> dict:
        return {
            "Lambda_plus": cpair(self.Lambda_plus),
            "Lambda_minus": cpair(self.Lambda_minus),
            "gamma_plus": cpair(self.gamma_plus),
            "gamma_minus": cpair(self.gamma_minus),
            "combo_plus": [cpair(x) for x in self.combo_plus],
            "combo_minus": [cpair(x) for x in self.combo_minus],
            "eig_residual": self.eig_residual,
        }


def monodromy_eigen(M: np.ndarray, bd: BoundaryData) -> MonodromyEigen:
    """Eigen-combinations and eigenvalues of M from the (-1)-lift values."""
    c, p = bd.minus_one_c, bd.minus_one_p
    a = cmath.sqrt(1j * (c[1] ** 2 - p[1] ** 2))
    b = cmath.sqrt(1j * (c[0] ** 2 - p[0] ** 2))
    K = np.exp(4 * bd.mu) / (2 * bd.product_at_one)
    diag = c[0] * c[1] + p[0] * p[1]
    lam_plus = complex(K * (diag - 1j * a * b))
    lam_minus = complex(K * (diag + 1j * a * b))
    if abs(lam_plus - lam_minus) < GENERIC_TOL:
        raise NonDiagonalizable(f"Lambda_+ = Lambda_- = {lam_plus}")

    direct = np.linalg.eigvals(np.asarray(M))
    eig_residual = max(min(abs(lam - d) for d in direct) for lam in (lam_plus, lam_minus))

    gamma_plus = 1j * cmath.log(lam_plus) / (2 * np.pi)
    gamma_minus = 1j * cmath.log(lam_minus) / (2 * np.pi)
    log.info(f"Monodromy eigenvalues {lam_plus:.6g}, {lam_minus:.6g}; exponents {gamma_plus:.6g}, {gamma_minus:.6g}")
    return MonodromyEigen(
        lam_plus, lam_minus, gamma_plus, gamma_minus,
        np.array([a, b], dtype=complex), np.array([a, -b], dtype=complex), eig_residual,
    )


def series_exponent(eig: MonodromyEigen, sign: int) -> complex:
    """Exponent of the series representing E_[sign]: -gamma_sign."""
    return -eig.gamma(sign)


def eigen_anchor(basis: EigenBasis, eig: MonodromyEigen, sign: int) -> SolutionFrame:
    """Cauchy data of E_[sign] at the lifted unit."""
    data = basis.jets(ONE)
    combo = eig.combo(sign)
    return SolutionFrame(ONE, complex(combo @ data[:, 0]), complex(combo @ data[:, 1]))


@dataclass
class LaurentSolution:
    gamma: complex
    N: int
    coeffs: np.ndarray    # g_k for k = -N..N
    params: HeunParams
    anchor_mismatch: float = 0.0

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def tail_ratio(self) -> float:
        return _tail_ratio(self.coeffs)

    def to_json(self) -> dict:
        return {"gamma": cpair(self.gamma), "N": self.N, "coeffs": [cpair(g) for g in self.coeffs]}


def _bands(params: HeunParams, gamma: complex, N: int):
    """Row-scaled sub, main and super diagonals for rows k = -N..N."""
    n = np.arange(-N, N + 1) + gamma
    l = params.l
    mu, lam = params.mu_c, params.lam_c
    sub = -mu * (n + l)
    main = n * (n + l) + lam
    sup = mu * (n + 1)
    scale = 1.0 / np.maximum(1.0, np.abs(main))
    return sub * scale, main * scale, sup * scale


def _apply(sub, main, sup, x):
    y = main * x
    y[1:] += sub[1:] * x[:-1]
    y[:-1] += sup[:-1] * x[1:]
    return y


def _tail_ratio(x: np.ndarray) -> float:
    peak = np.max(np.abs(x))
    return float(max(abs(x[0]), abs(x[-1])) / peak)


def _null_vector(params: HeunParams, gamma: complex, N: int):
    sub, main, sup = _bands(params, gamma, N)
    size = 2 * N + 1
    ab = np.zeros((3, size), dtype=complex)
    ab[0, 1:] = sup[:-1]
    ab[1, :] = main
    ab[2, :-1] = sub[1:]
    x = np.ones(size, dtype=complex)
    for _ in range(_INVERSE_STEPS):
        try:
            y = solve_banded((1, 1), ab, x)
        except (LinAlgError, ValueError):
            shifted = ab.copy()
            shifted[1, :] += 1e-14
            try:
                y = solve_banded((1, 1), shifted, x)
            except (LinAlgError, ValueError):
                raise SingularSystem(f"banded solve failed for gamma={gamma}, N={N}")
        if not np.all(np.isfinite(y)):
            raise SingularSystem(f"banded solve overflowed for gamma={gamma}, N={N}")
        x = y / np.max(np.abs(y))
    null_residual = float(np.max(np.abs(_apply(sub, main, sup, x))))
    return x, null_residual


def build_series(params: HeunParams, gamma: complex, anchor: SolutionFrame,
                 N: Optional[int] = None, force: bool = False) -> LaurentSolution:
    """
    Two-sided coefficients of sum_k g_k z^{k+gamma}, scaled so the value at
    z = 1 equals the anchor value. N doubles from its start value up to
    LAURENT_N_CAP until the null residual and the tail decay both hold.
    """
    N = LAURENT_N_START if N is None else int(N)
    if N < 16:
        raise InvalidParams(f"N must be at least 16, got {N}")
    while True:
        x, null_residual = _null_vector(params, gamma, N)
        tail = _tail_ratio(x)
        if null_residual < NULL_TOL and tail < TAIL_TOL:
            break
        if N * 2 > LAURENT_N_CAP:
            if force:
                log.warning(f"Formal series accepted at N={N}: residual {null_residual:.3e}, tail {tail:.3e}")
                break
            raise NoDecay(f"no decaying coefficients for gamma={gamma} up to N={N} "
                          f"(residual {null_residual:.3e}, tail {tail:.3e})")
        N *= 2

    n = np.arange(-N, N + 1) + gamma
    value = np.sum(x)
    deriv = np.sum(n * x)
    if abs(value) > abs(deriv) * 1e-12 and value != 0:
        c = anchor.value / value
    else:
        c = (np.conj(value) * anchor.value + np.conj(deriv) * anchor.deriv) / (abs(value) ** 2 + abs(deriv) ** 2)
    mismatch = abs(c * deriv - anchor.deriv) / max(1.0, abs(anchor.deriv))
    if mismatch > ANCHOR_TOL and not force:
        raise NoDecay(f"series derivative at z=1 disagrees with the anchor by {mismatch:.3e}")
    log.info(f"Laurent series for gamma={gamma:.6g} accepted at N={N}")
    return LaurentSolution(complex(gamma), N, c * x, params, float(mismatch))


def _log_terms(ls: LaurentSolution, at: CoverPoint, extra: int = 0):
    g = ls.coeffs
    keep = g != 0
    exps = (ls.ks + ls.gamma - extra)[keep]
    logs = np.log(g[keep].astype(complex)) + exps * at.w
    return logs


def _sum_small_first(terms: np.ndarray) -> complex:
    order = np.argsort(np.abs(terms))
    return complex(np.sum(terms[order]))


def eval_series(ls: LaurentSolution, at: CoverPoint) -> complex:
    """sum g_k cover_pow(at, k + gamma), built in log space and summed from the smallest term."""
    return _sum_small_first(np.exp(_log_terms(ls, at)))


def eval_series_derivative(ls: LaurentSolution, at: CoverPoint) -> complex:
    keep = ls.coeffs != 0
    exps = (ls.ks + ls.gamma)[keep]
    return _sum_small_first(exps * np.exp(_log_terms(ls, at, extra=1)))


def recurrence_residuals(ls: LaurentSolution) -> float:
    """Max row-scaled recurrence defect over interior k, relative to max |g_k|."""
    sub, main, sup = _bands(ls.params, ls.gamma, ls.N)
    r = _apply(sub, main, sup, ls.coeffs)[1:-1]
    return float(np.max(np.abs(r)) / np.max(np.abs(ls.coeffs)))


def single_valuedness_residual(basis: EigenBasis, eig: MonodromyEigen, sign: int, at: CoverPoint) -> float:
    """|z^gamma E_[sign]| at (rho, phi) against (rho, phi + 2 pi), values from the integrator."""
    gamma = eig.gamma(sign)
    combo = eig.combo(sign)
    later = shift(at, 1)
    here = np.exp(gamma * at.w) * (combo @ basis.jets(at)[:, 0])
    there = np.exp(gamma * later.w) * (combo @ basis.jets(later)[:, 0])
    return float(abs(here - there))


@dataclass
class LaurentPair:
    eigen: MonodromyEigen
    plus: LaurentSolution
    minus: LaurentSolution

    def solution(self, sign: int) -> LaurentSolution:
        return self.plus if sign > 0 else self.minus

    def to_json(self) -> dict:
        return {"eigen": self.eigen.to_json(), "plus": self.plus.to_json(), "minus": self.minus.to_json()}


def laurent_pair(basis: EigenBasis, M: np.ndarray, bd: BoundaryData, N: Optional[int] = None) -> LaurentPair:
    eig = monodromy_eigen(M, bd)
    series = [
        build_series(basis.params, series_exponent(eig, sign), eigen_anchor(basis, eig, sign), N)
        for sign in (1, -1)
    ]
    return LaurentPair(eig, *series)
