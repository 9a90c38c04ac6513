"""
Path integration of the sDCHE on the universal cover and the Theta operators.

The equation is integrated in w = ln(rho) + i*phi, so a cover path is a
straight segment w(tau) = w0 + tau*(w1 - w0), tau in [0, 1], and the
singularities at z = 0, infinity sit at Re w = -inf, +inf. With z = e^w:

    dE/dw  = z E'
    dE'/dw = -[((l+1) z + mu (1 - z^2)) E' + (lambda - mu (l+1) z) E] / z

Solutions are anything exposing `jet(point) -> (value, deriv)`: eigenbasis
combinations (SolutionHandle), Theta images evaluated on the fly
(ThetaImage) and explicit test functions (AnalyticFunction).
"""
from __future__ import annotations

import csv
import io
import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.heunsym.config import BUDGET, SEED, TOL
from src.heunsym.cover import (
    A,
    B,
    C,
    ONE,
    CoverPoint,
    LiftKind,
    apply_lift,
    invert,
    shift,
)
from src.heunsym.errors import StepFailure, ZeroSolution
from src.heunsym.polys import HeunParams, PolySet, build_polys

log = logging.getLogger("heunsym")

_LIFTS = {LiftKind.A: A, LiftKind.B: B, LiftKind.C: C}


@dataclass(frozen=True)
class SolutionFrame:
    point: CoverPoint
    value: complex
    deriv: complex   # d/dz, not d/dw


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def ode_second(params: HeunParams, u: complex, value: complex, deriv: complex) -> complex:
    """E'' at projected point u, read off from the equation."""
    l1 = params.l + 1
    mu, lam = params.mu_c, params.lam_c
    return -((l1 * u + mu * (1 - u * u)) * deriv + (lam - mu * l1 * u) * value) / (u * u)


def integrate_frames(params: HeunParams, start: CoverPoint, data: np.ndarray,
                     target: CoverPoint, tol: float = TOL) -> np.ndarray:
    """
    Continue several Cauchy data rows [[E, E'], ...] from start to target.

    Returns an array of the same shape.
    """
    data = np.asarray(data, dtype=complex)
    if target == start:
        return data.copy()
    w0, w1 = start.w, target.w
    dw = w1 - w0
    l1 = params.l + 1
    mu, lam = params.mu_c, params.lam_c

    def rhs(tau, y):
        z = np.exp(w0 + tau * dw)
        E, dE = y[0::2], y[1::2]
        out = np.empty_like(y)
        out[0::2] = dw * z * dE
        out[1::2] = -dw * ((l1 * z + mu * (1 - z * z)) * dE + (lam - mu * l1 * z) * E) / z
        return out

    y0 = data.reshape(-1)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-2)
    if sol.status < 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise StepFailure(f"integration {start} -> {target} failed: {sol.message}")
    return sol.y[:, -1].reshape(data.shape)


def integrate_path(params: HeunParams, start: SolutionFrame, target: CoverPoint,
                   tol: float = TOL) -> SolutionFrame:
    """Continue (E, E') along the straight segment start.point -> target in the w-plane."""
    if target == start.point:
        return start
    out = integrate_frames(params, start.point, np.array([[start.value, start.deriv]]), target, tol)
    return SolutionFrame(target, complex(out[0, 0]), complex(out[0, 1]))


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

class Solution:
    """Base for anything Theta operators can act on."""
    basis: "EigenBasis"

    def jet(self, at: CoverPoint) -> Tuple[complex, complex]:
        raise NotImplementedError

    def second(self, at: CoverPoint) -> complex:
        value, deriv = self.jet(at)
        return ode_second(self.basis.params, at.project(), value, deriv)

    def value(self, at: CoverPoint) -> complex:
        return self.jet(at)[0]

    def shifted(self, k: int) -> "Solution":
        return Shifted(self, k)


class EigenBasis:
    """
    The Theta_C eigenfunctions E+ and E- with E(1) = 1, E'(1) = mu +- sqrt(lambda + mu^2).

    Values are cached per CoverPoint. Every evaluation integrates from the
    lifted unit along a straight w-segment, so cached entries do not depend
    on evaluation order.
    """

    def __init__(self, params: HeunParams, polys: PolySet, tol: float = TOL):
        self.params = params
        self.polys = polys
        self.tol = tol
        self.sigma = params.sqrt_S
        mu = params.mu_c
        self.cauchy_plus = SolutionFrame(ONE, 1.0 + 0j, mu + self.sigma)
        self.cauchy_minus = SolutionFrame(ONE, 1.0 + 0j, mu - self.sigma)
        self._data = np.array(
            [[self.cauchy_plus.value, self.cauchy_plus.deriv],
             [self.cauchy_minus.value, self.cauchy_minus.deriv]],
            dtype=complex,
        )
        self._cache: Dict[CoverPoint, np.ndarray] = {ONE: self._data.copy()}
        self._lock = threading.Lock()

    @property
    def zeta(self) -> complex:
        """Theta_C eigenvalue of E+ (E- has the opposite one)."""
        return self.params.tw * self.sigma

    def jets(self, at: CoverPoint) -> np.ndarray:
        """[[E+, E+'], [E-, E-']] at a cover point."""
        with self._lock:
            cached = self._cache.get(at)
        if cached is not None:
            return cached
        out = integrate_frames(self.params, ONE, self._data, at, self.tol)
        with self._lock:
            self._cache[at] = out
        return out

    def frame(self, sign: int, at: CoverPoint) -> SolutionFrame:
        row = self.jets(at)[0 if sign > 0 else 1]
        return SolutionFrame(at, complex(row[0]), complex(row[1]))

    def handle(self, c_plus: complex, c_minus: complex, k: int = 0) -> "SolutionHandle":
        return SolutionHandle(self, (complex(c_plus), complex(c_minus)), k)

    @property
    def plus(self) -> "SolutionHandle":
        return self.handle(1, 0)

    @property
    def minus(self) -> "SolutionHandle":
        return self.handle(0, 1)


def eigenbasis(params: HeunParams, tol: float = TOL, polys: Optional[PolySet] = None) -> EigenBasis:
    """Build E+- for generic params (DegenerateParams propagates from build_polys)."""
    ps = polys if polys is not None else build_polys(params)
    if not params.normalized:
        log.warning(f"eigenbasis built with (2w)^2 (lambda+mu^2) = {params.kappa}; Theta_C eigenvalues are not +-1")
    log.info(f"Eigenbasis ready: ell={params.ell}, lambda={params.lam_c}, mu={params.mu_c}")
    return EigenBasis(params, ps, tol)


@dataclass(frozen=True)
class SolutionHandle(Solution):
    """c+ E+ + c- E-, optionally pulled back by M^k (value at z is taken at M^k z)."""
    basis: EigenBasis
    coeffs: Tuple[complex, complex]
    k: int = 0

    def jet(self, at: CoverPoint) -> Tuple[complex, complex]:
        data = self.basis.jets(shift(at, self.k) if self.k else at)
        c = np.asarray(self.coeffs)
        return complex(c @ data[:, 0]), complex(c @ data[:, 1])

    def shifted(self, k: int) -> "SolutionHandle":
        return SolutionHandle(self.basis, self.coeffs, self.k + k)

    def __add__(self, other: "SolutionHandle") -> "SolutionHandle":
        if other.basis is not self.basis or other.k != self.k:
            raise ValueError("handles must share basis and shift")
        return SolutionHandle(self.basis, (self.coeffs[0] + other.coeffs[0], self.coeffs[1] + other.coeffs[1]), self.k)

    def scaled(self, factor: complex) -> "SolutionHandle":
        return SolutionHandle(self.basis, (factor * self.coeffs[0], factor * self.coeffs[1]), self.k)


class Shifted(Solution):
    """M^k pullback of an arbitrary solution."""

    def __init__(self, inner: Solution, k: int):
        self.inner = inner
        self.k = k
        self.basis = inner.basis

    def jet(self, at):
        return self.inner.jet(shift(at, self.k))

    def second(self, at):
        return self.inner.second(shift(at, self.k))


class AnalyticFunction(Solution):
    """An explicit function of projected z with its first two derivatives."""

    def __init__(self, basis: EigenBasis, f: Callable, df: Callable, d2f: Callable):
        self.basis = basis
        self.f, self.df, self.d2f = f, df, d2f

    def jet(self, at):
        z = at.project()
        return self.f(z), self.df(z)

    def second(self, at):
        return self.d2f(at.project())


class ThetaImage(Solution):
    """Theta_which[inner], evaluated on demand through theta_jet."""

    def __init__(self, which, inner: Solution):
        self.which = LiftKind(which)
        self.inner = inner
        self.basis = inner.basis

    def jet(self, at):
        return theta_jet(self.which, self.inner, at)


# ---------------------------------------------------------------------------
# Wronskian and splitting
# ---------------------------------------------------------------------------

def wronskian(s1: Solution, s2: Solution, at: CoverPoint) -> complex:
    """z^{1-ell} e^{-mu(z+1/z)} (E1' E2 - E2' E1); constant in z."""
    if s1.basis is not s2.basis:
        raise ValueError("solutions must share a basis")
    params = s1.basis.params
    z = at.project()
    v1, d1 = s1.jet(at)
    v2, d2 = s2.jet(at)
    return z ** (1 - params.ell) * np.exp(-params.mu_c * (z + 1 / z)) * (d1 * v2 - d2 * v1)


def split_eigen(basis: EigenBasis, frame: SolutionFrame) -> Tuple[complex, complex]:
    """Coefficients (c+, c-) of the solution with the given Cauchy data."""
    if frame.value == 0 and frame.deriv == 0:
        raise ZeroSolution("Cauchy data (0, 0)")
    data = basis.jets(frame.point)
    c = np.linalg.solve(data.T, np.array([frame.value, frame.deriv], dtype=complex))
    return complex(c[0]), complex(c[1])


# ---------------------------------------------------------------------------
# Theta operators
# ---------------------------------------------------------------------------

def theta_jet(which, s: Solution, at: CoverPoint) -> Tuple[complex, complex]:
    """
    Value and z-derivative of Theta_which[s] at `at`.

    Polynomials are evaluated at z = project(at); s is evaluated at the
    lifted point A(at), B(at) or C(at). E'' at the lifted point comes from
    s.second, which is the equation itself for genuine solutions.
    """
    which = LiftKind(which)
    ps = s.basis.polys
    params = ps.params
    ell, mu, S, tw = params.ell, params.mu_c, params.S, params.tw
    z = at.project()
    target = apply_lift(_LIFTS[which], at)
    E, dE = s.jet(target)
    d2E = s.second(target)
    F0 = dE - mu * E          # E' - mu E at the lifted point
    F1 = d2E - mu * dE        # its derivative in the lifted variable

    if which == LiftKind.C:
        value = tw * z ** (ell - 1) * F0
        deriv = tw * ((ell - 1) * z ** (ell - 2) * F0 - z ** (ell - 3) * F1)
        return value, deriv

    p, dp = ps.eval("p", z), ps.deriv("p", z)
    Q = ps.eval("q", z) + mu * z * z * p
    dQ = ps.deriv("q", z) + mu * (2 * z * p + z * z * dp)
    e = np.exp(mu * (z + 1 / z))
    de_over_e = mu * (1 - 1 / (z * z))

    if which == LiftKind.A:
        # u = -1/z, du/dz = 1/z^2
        F = p * F0 + Q * E
        dF = dp * F0 + p * F1 / (z * z) + dQ * E + Q * dE / (z * z)
        sg = (-1) ** ell
        return sg * e * F, sg * e * (de_over_e * F + dF)

    # B: u = -z, du/dz = -1
    pref = tw * z ** (1 - ell) * e
    dpref = pref * ((1 - ell) / z + de_over_e)
    G = Q * F0 + S * p * E
    dG = dQ * F0 - Q * F1 + S * dp * E - S * p * dE
    return pref * G, dpref * G + pref * dG


def theta_apply(which, s: Solution, at: CoverPoint) -> complex:
    return theta_jet(which, s, at)[0]


def theta_image(which, s: Solution) -> SolutionHandle:
    """Theta_which[s] re-expressed in the eigenbasis through its jet at the lifted unit."""
    value, deriv = theta_jet(which, s, ONE)
    return SolutionHandle(s.basis, split_eigen(s.basis, SolutionFrame(ONE, value, deriv)))


# ---------------------------------------------------------------------------
# Residual checks
# ---------------------------------------------------------------------------

def sdche_residual(params: HeunParams, s: Solution, at: CoverPoint, h: float = 5e-3) -> complex:
    """
    Equation residual of s at `at`, with E'' estimated by a five-point
    difference of the exact w-derivative z*E' along the w-line.
    """
    def zE1(p):
        return p.project() * s.jet(p)[1]

    w = at.w
    stencil = [zE1(CoverPoint.from_w(w + j * h)) for j in (-2, -1, 1, 2)]
    d_ww = (stencil[0] - 8 * stencil[1] + 8 * stencil[2] - stencil[3]) / (12 * h)
    z = at.project()
    E, dE = s.jet(at)
    E_w = z * dE
    l1 = params.l + 1
    mu, lam = params.mu_c, params.lam_c
    # z^2 E'' = E_ww - E_w
    return d_ww - E_w + (l1 + mu * (1 / z - z)) * E_w + (lam - mu * l1 * z) * E


def eigen_residual(basis: EigenBasis, at: CoverPoint) -> float:
    """max over signs of |E' - mu E -+ (2w)^-1 z^{ell-1} E(1/z)|."""
    params = basis.params
    z = at.project()
    here, there = basis.jets(at), basis.jets(invert(at))
    worst = 0.0
    for i, sign in enumerate((1, -1)):
        r = here[i, 1] - params.mu_c * here[i, 0] - sign / params.tw * z ** (params.ell - 1) * there[i, 0]
        worst = max(worst, abs(r))
    return worst


def polylocal_residual(basis: EigenBasis, at: CoverPoint) -> float:
    """E+(z)E-(1/z) + E-(z)E+(1/z) - 2 e^{mu(z+1/z-2)} E+E-(1)."""
    mu = basis.params.mu_c
    z = at.project()
    here, there = basis.jets(at)[:, 0], basis.jets(invert(at))[:, 0]
    one = basis.jets(ONE)[:, 0]
    lhs = here[0] * there[1] + here[1] * there[0]
    return abs(lhs - 2 * np.exp(mu * (z + 1 / z - 2)) * one[0] * one[1])


def random_points(n: int, rng: np.random.Generator, log_rho: float = 0.5,
                  phi_span: Tuple[float, float] = (-np.pi, np.pi)) -> list:
    return [
        CoverPoint(float(np.exp(rng.uniform(-log_rho, log_rho))), float(rng.uniform(*phi_span)))
        for _ in range(n)
    ]


def random_solutions(basis: EigenBasis, n: int, rng: np.random.Generator) -> list:
    out = []
    for _ in range(n):
        c = rng.normal(size=2) + 1j * rng.normal(size=2)
        out.append(basis.handle(c[0], c[1]))
    return out


@dataclass
class CompositionReport:
    """Max absolute residual per composition rule and commutation family."""
    residuals: Dict[str, float]
    delta: complex
    kappa: complex
    delta_sign: int = 1
    flags: list = field(default_factory=list)

    def failures(self, budget: float = BUDGET) -> list:
        return [name for name, value in self.residuals.items() if not value <= budget]

    def passed(self, budget: float = BUDGET) -> bool:
        return not self.failures(budget)

    def to_json(self, budget: float = BUDGET) -> dict:
        return {
            "residuals": self.residuals,
            "delta": [self.delta.real, self.delta.imag],
            "kappa": [self.kappa.real, self.kappa.imag],
            "delta_sign": self.delta_sign,
            "flags": self.flags,
            "passed": self.passed(budget),
        }


def verify_compositions(target, n_solutions: int = 3, n_points: int = 5, seed: int = SEED,
                        delta_sign: int = 1, shifts: Iterable[int] = range(-2, 3),
                        budget: float = BUDGET) -> CompositionReport:
    """
    Check the nine composition rules and the three commutation families.

    `target` is a HeunParams or an EigenBasis. X o Y means "apply Y, then X".
    delta_sign = -1 flips the sign of Delta in every rule that carries it.
    """
    basis = target if isinstance(target, EigenBasis) else eigenbasis(target)
    params = basis.params
    rng = np.random.default_rng(seed)
    kappa = params.kappa
    delta = delta_sign * basis.polys.delta_c
    shifts = list(shifts)

    res: Dict[str, float] = {}

    def record(name, value):
        res[name] = max(res.get(name, 0.0), abs(value))

    for s in random_solutions(basis, n_solutions, rng):
        TA, TB, TC = ThetaImage("A", s), ThetaImage("B", s), ThetaImage("C", s)
        for p in random_points(n_points, rng):
            record("AoA", theta_apply("A", TA, p) + delta * s.value(p))
            record("BoB", theta_apply("B", TB, p) - kappa * delta * s.value(shift(p, 1)))
            record("CoC", theta_apply("C", TC, p) - kappa * s.value(p))
            record("AoB", theta_apply("A", TB, p) - delta * TC.value(shift(p, -1)))
            record("BoA", theta_apply("B", TA, p) + delta * TC.value(p))
            record("BoC", theta_apply("B", TC, p) + kappa * TA.value(shift(p, 1)))
            record("CoB", theta_apply("C", TB, p) - kappa * TA.value(p))
            record("CoA", theta_apply("C", TA, p) - TB.value(p))
            record("AoC", theta_apply("A", TC, p) + TB.value(shift(p, -1)))
            for k in shifts:
                record("MkA", theta_apply("A", s, shift(p, k)) - theta_apply("A", s.shifted(-k), p))
                record("MkB", theta_apply("B", s, shift(p, k)) - theta_apply("B", s.shifted(k), p))
                record("MkC", theta_apply("C", s, shift(p, k)) - theta_apply("C", s.shifted(-k), p))

    report = CompositionReport(res, delta, kappa, delta_sign)
    if res.get("MkA", 0.0) > budget:
        report.flags.append("M^k o Theta_A = Theta_A o M^-k contradicted numerically")
    if not report.passed(budget):
        log.warning(f"Composition rules failed: {report.failures(budget)}")
    return report


def theta_c_square_defect(basis: EigenBasis, f: AnalyticFunction, at: CoverPoint) -> complex:
    """Theta_C o Theta_C[f] - kappa f + (2w)^2 R[f]; zero for any smooth f."""
    params = basis.params
    z = at.project()
    value, deriv = f.jet(at)
    l1 = params.l + 1
    mu, lam = params.mu_c, params.lam_c
    residual = z * z * f.second(at) + (l1 * z + mu * (1 - z * z)) * deriv + (lam - mu * l1 * z) * value
    return theta_apply("C", ThetaImage("C", f), at) - params.kappa * value + params.tw ** 2 * residual


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

CSV_COLUMNS = ["rho", "phi", "re_Ep", "im_Ep", "re_Em", "im_Em", "re_dEp", "im_dEp", "re_dEm", "im_dEm"]


def sample_rows(basis: EigenBasis, points: Sequence[CoverPoint]) -> list:
    rows = []
    for p in points:
        d = basis.jets(p)
        rows.append([
            p.rho, p.phi,
            d[0, 0].real, d[0, 0].imag, d[1, 0].real, d[1, 0].imag,
            d[0, 1].real, d[0, 1].imag, d[1, 1].real, d[1, 1].imag,
        ])
    return rows


def sample_csv(basis: EigenBasis, points: Sequence[CoverPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for row in sample_rows(basis, points):
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()
