"""
The polynomials p, q, r, s of the sDCHE symmetry operators.

p, q, r, s are built from the two-sequence recurrences seeded with
p0 = 0, q0 = 1, r0 = z^-2, s0 = -mu and read off at index k = ell. When
lambda and mu are rational (or Gaussian rational) everything is computed over
sympy's QQ_I, so identity checks are exact; otherwise the domain is CC.

Numeric layers use `PolySet.eval`, which works on cached numpy coefficient
arrays in ascending powers of z.
"""
from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, Optional

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly

from src.heunsym.config import BUDGET, ELL_CAP, GENERIC_TOL
from src.heunsym.errors import DegenerateParams, InvalidParams

log = logging.getLogger("heunsym")

z = sympy.Symbol("z")


def as_exact(x: Any) -> Optional[sympy.Expr]:
    """Return x as a sympy Gaussian rational, or None when x is inexact."""
    if isinstance(x, bool):
        return None
    if isinstance(x, (int, Fraction)):
        return sympy.nsimplify(x) if isinstance(x, Fraction) else sympy.Integer(x)
    if isinstance(x, sympy.Basic):
        re, im = x.as_real_imag()
        if re.is_Rational and im.is_Rational:
            return re + sympy.I * im
    return None


def parse_number(text: str):
    """
    Parse a CLI/HTTP number. Decimal and fraction literals stay exact
    ("0.5" -> 1/2); anything else goes through complex().
    """
    text = text.strip()
    try:
        return sympy.Rational(text)
    except (TypeError, ValueError):
        pass
    try:
        value = sympy.sympify(text.replace("j", "*I"))
        if as_exact(value) is not None:
            return as_exact(value)
        return complex(value)
    except (sympy.SympifyError, TypeError, ValueError):
        raise InvalidParams(f"cannot parse number {text!r}")


@dataclass(frozen=True)
class HeunParams:
    """
    Parameters of the sDCHE with order l = -ell.

    two_omega defaults to (lambda + mu^2)^(-1/2) (principal root), which puts
    the Theta_C eigenvalues at +-1.
    """
    ell: int
    lam: Any
    mu: Any
    two_omega: Optional[complex] = None

    def __post_init__(self):
        if isinstance(self.ell, bool) or not isinstance(self.ell, (int, np.integer)):
            raise InvalidParams(f"ell must be a positive integer, got {self.ell!r}")
        if not 1 <= self.ell <= ELL_CAP:
            raise InvalidParams(f"ell must lie in [1, {ELL_CAP}], got {self.ell}")
        if self.mu_c == 0:
            raise DegenerateParams("mu must be nonzero")
        if abs(self.S) == 0 or (self.exact and sympy.expand(self.S_exact) == 0):
            raise DegenerateParams("lambda + mu^2 must be nonzero")
        if self.two_omega is not None and complex(self.two_omega) == 0:
            raise DegenerateParams("two_omega must be nonzero")

    @property
    def exact(self) -> bool:
        return as_exact(self.lam) is not None and as_exact(self.mu) is not None

    @property
    def l(self) -> int:
        return -self.ell

    @property
    def lam_c(self) -> complex:
        return complex(self.lam)

    @property
    def mu_c(self) -> complex:
        return complex(self.mu)

    @property
    def S(self) -> complex:
        """lambda + mu^2."""
        return self.lam_c + self.mu_c ** 2

    @property
    def S_exact(self):
        return sympy.expand(as_exact(self.lam) + as_exact(self.mu) ** 2)

    @property
    def tw(self) -> complex:
        """The value 2*omega."""
        if self.two_omega is not None:
            return complex(self.two_omega)
        return 1 / cmath.sqrt(self.S)

    @property
    def sqrt_S(self) -> complex:
        return cmath.sqrt(self.S)

    @property
    def kappa(self) -> complex:
        """(2 omega)^2 (lambda + mu^2); equals 1 under the default normalization."""
        return self.tw ** 2 * self.S

    @property
    def normalized(self) -> bool:
        return abs(self.kappa - 1) < 1e-12

    def with_normalization(self) -> "HeunParams":
        return HeunParams(self.ell, self.lam, self.mu)

    def to_json(self) -> dict:
        return {
            "ell": self.ell,
            "lambda": cpair(self.lam_c),
            "mu": cpair(self.mu_c),
            "two_omega": cpair(self.tw),
        }


def cpair(x) -> list:
    x = complex(x)
    return [x.real, x.imag]


@dataclass
class PolySet:
    """p, q, r, s for fixed (ell, lambda, mu) with Delta and Delta_pm. Treat as immutable."""
    params: HeunParams
    p: sympy.Poly
    q: sympy.Poly
    r: sympy.Poly
    s: sympy.Poly
    delta: Any
    delta_plus: complex
    delta_minus: complex
    _arrays: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def exact(self) -> bool:
        return self.p.get_domain().is_Exact

    @property
    def delta_c(self) -> complex:
        return complex(self.delta)

    def coeffs(self, name: str) -> np.ndarray:
        """Ascending complex coefficients of p, q, r or s."""
        if name not in self._arrays:
            poly = getattr(self, name)
            self._arrays[name] = np.array([complex(c) for c in reversed(poly.all_coeffs())], dtype=complex)
        return self._arrays[name]

    def eval(self, name: str, x):
        return npoly.polyval(x, self.coeffs(name))

    def deriv(self, name: str, x):
        return npoly.polyval(x, npoly.polyder(self.coeffs(name)))

    def to_json(self) -> dict:
        return {
            "ell": self.params.ell,
            "lambda": cpair(self.params.lam_c),
            "mu": cpair(self.params.mu_c),
            "p": [cpair(c) for c in self.coeffs("p")],
            "q": [cpair(c) for c in self.coeffs("q")],
            "r": [cpair(c) for c in self.coeffs("r")],
            "s": [cpair(c) for c in self.coeffs("s")],
            "delta": cpair(self.delta_c),
            "delta_plus": cpair(self.delta_plus),
            "delta_minus": cpair(self.delta_minus),
        }


def _domain(params: HeunParams):
    return sympy.QQ_I if params.exact else sympy.CC


def _scalars(params: HeunParams):
    if params.exact:
        return as_exact(params.lam), as_exact(params.mu)
    return sympy.sympify(params.lam_c), sympy.sympify(params.mu_c)


def build_polys(params: HeunParams) -> PolySet:
    """
    Run the recurrences up to k = ell.

    r is carried as rt = z^2 * r so every intermediate stays polynomial;
    the final division by z^2 must be exact.
    """
    dom = _domain(params)
    lam, mu = _scalars(params)
    ell = params.ell

    def P(expr):
        return sympy.Poly(expr, z, domain=dom)

    Z = P(z)
    Z2 = P(z ** 2)
    p, q = P(0), P(1)
    rt, s = P(1), P(-mu)
    for k in range(1, ell + 1):
        p_new = P((1 - ell) * z) * p + q + Z2 * p.diff(z)
        q_new = P(z ** 2 * (-lam + (ell + 1) * mu * z)) * p + P(mu * (1 - z ** 2)) * q + Z2 * q.diff(z)
        rt_new = P(2 * (k - 1)) * Z * rt - Z2 * s - Z2 * rt.diff(z)
        s_new = (
            P(lam - (ell + 1) * mu * z) * rt
            + P((2 * (k - 1) - (ell + 1)) * z + mu * (z ** 2 - 1)) * s
            - Z2 * s.diff(z)
        )
        p, q, rt, s = p_new, q_new, rt_new, s_new

    r, rem = rt.div(Z2)
    if not rem.is_zero:
        raise RuntimeError("r_ell kept negative powers of z")

    S = lam + mu ** 2
    p1, r1 = p.eval(1), r.eval(1)
    delta = sympy.expand(S * p1 ** 2 - r1 ** 2)
    if params.exact:
        if delta == 0:
            raise DegenerateParams("Delta = 0")
    elif abs(complex(delta)) < GENERIC_TOL:
        raise DegenerateParams(f"Delta = {complex(delta)} is numerically zero")

    sign = (-1) ** ell
    tw = params.tw
    d_plus = complex(p1) + sign * tw * complex(r1)
    d_minus = complex(p1) - sign * tw * complex(r1)
    if min(abs(d_plus), abs(d_minus)) < GENERIC_TOL:
        raise DegenerateParams(f"Delta_pm vanishes: ({d_plus}, {d_minus})")

    log.info(f"Built polynomials for ell={ell} over {dom}: Delta={complex(delta)}")
    return PolySet(params, p, q, r, s, delta if params.exact else complex(delta), d_plus, d_minus)


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    """Per-identity residuals: max |coefficient| of each residual polynomial."""
    exact: bool
    residuals: Dict[str, float]
    degrees: Dict[str, int]
    expected_degrees: Dict[str, int]

    @property
    def degrees_ok(self) -> bool:
        return self.degrees == self.expected_degrees

    def failures(self, budget: float = BUDGET) -> list:
        limit = 0.0 if self.exact else budget
        return [name for name, value in self.residuals.items() if value > limit]

    def passed(self, budget: float = BUDGET) -> bool:
        return self.degrees_ok and not self.failures(budget)

    def to_json(self) -> dict:
        return {
            "exact": self.exact,
            "residuals": self.residuals,
            "degrees": self.degrees,
            "expected_degrees": self.expected_degrees,
            "passed": self.passed(),
        }


def _size(poly: sympy.Poly) -> float:
    if poly.is_zero:
        return 0.0
    return max(abs(complex(c)) for c in poly.all_coeffs())


def _scalar_size(x) -> float:
    x = sympy.expand(x)
    return 0.0 if x == 0 else abs(complex(x))


def verify_poly_system(ps: PolySet) -> IdentityReport:
    """
    Check the ODE system, the twelve argument transforms and the z=1
    reductions. Transforms are multiplied through by the power of z that
    makes both sides polynomial.
    """
    params = ps.params
    dom = ps.p.get_domain()
    lam, mu = _scalars(params)
    ell = params.ell
    sg = (-1) ** ell
    S = lam + mu ** 2
    p, q, r, s = ps.p, ps.q, ps.r, ps.s

    def P(expr):
        return sympy.Poly(expr, z, domain=dom)

    def reflect(poly, d, c):
        # z^d * poly(c/z)
        coeffs = list(reversed(poly.all_coeffs()))
        return P(sum((a * c ** j * z ** (d - j) for j, a in enumerate(coeffs)), sympy.Integer(0)))

    def negate(poly):
        coeffs = list(reversed(poly.all_coeffs()))
        return P(sum((a * (-1) ** j * z ** j for j, a in enumerate(coeffs)), sympy.Integer(0)))

    Z2 = P(z ** 2)
    mz2p_q = P(mu) * Z2 * p + q
    mz2r_s = P(mu) * Z2 * r + s
    dp, ds = 2 * (ell - 1), 2 * ell

    checks = {
        "ode_p": Z2 * p.diff(z) - (P(mu + (ell - 1) * z) * p - q + P(sg) * Z2 * r),
        "ode_q": q.diff(z) - (P(lam - (ell + 1) * mu * z) * p + P(mu) * q + P(sg) * s),
        "ode_r": Z2 * r.diff(z) - (P(-sg * S) * p + P(z * (2 * (ell - 1) - mu * z)) * r - s),
        "ode_s": Z2 * s.diff(z) - (P(-sg * S) * q + P(z ** 2 * (lam - (ell + 1) * mu * z)) * r + P((ell - 1) * z - mu) * s),
        "minus_inv_p": reflect(p, dp, -1) - P(-sg) * p,
        "minus_inv_q": reflect(q, ds, -1) - (P(sg * mu) * p + Z2 * r),
        "minus_inv_r": reflect(r, dp, -1) - mz2p_q,
        "minus_inv_s": reflect(s, ds, -1) + (P(mu) * mz2p_q + P(sg) * Z2 * mz2r_s),
        "minus_p": P(S) * negate(p) - P(-sg) * mz2r_s,
        "minus_q": P(S) * negate(q) - (P(S) * mz2p_q + P(sg * mu) * Z2 * mz2r_s),
        "minus_r": negate(r) - r,
        "minus_s": negate(s) - (P(-sg * S) * p - P(mu) * Z2 * r),
        "inv_p": P(S) * reflect(p, dp, 1) - mz2r_s,
        "inv_q": P(S) * reflect(q, ds, 1) - (P(lam) * Z2 * r - P(mu) * s),
        "inv_r": reflect(r, dp, 1) - mz2p_q,
        "inv_s": reflect(s, ds, 1) - (P(lam) * Z2 * p - P(mu) * q),
        "delta_constant": p * s - q * r - P(ps.delta * z ** dp),
    }
    residuals = {name: _size(poly) for name, poly in checks.items()}

    p1, q1, r1, s1 = p.eval(1), q.eval(1), r.eval(1), s.eval(1)
    residuals["unit_q"] = _scalar_size(q1 - (r1 - mu * p1))
    residuals["unit_s"] = _scalar_size(s1 - (S * p1 - mu * r1))
    residuals["delta_at_one"] = _scalar_size(ps.delta - (S * p1 ** 2 - r1 ** 2))

    degrees = {name: getattr(ps, name).degree() for name in "pqrs"}
    expected = {"p": dp, "q": ds, "r": dp, "s": ds}
    report = IdentityReport(ps.exact, residuals, degrees, expected)
    if not report.passed():
        log.warning(f"Polynomial identities failed for ell={ell}: {report.failures()}")
    return report


def delta_constancy_check(ps: PolySet, sample_points: Iterable) -> float:
    """max |z^{2(1-ell)}(p s - q r) - Delta| over the points (exact when possible)."""
    points = list(sample_points)
    ell = ps.params.ell
    exact_points = [as_exact(x) for x in points]
    if ps.exact and all(x is not None for x in exact_points):
        worst = 0.0
        for x in exact_points:
            value = x ** (2 * (1 - ell)) * (ps.p.eval(x) * ps.s.eval(x) - ps.q.eval(x) * ps.r.eval(x))
            worst = max(worst, _scalar_size(value - ps.delta))
        return worst
    xs = np.asarray([complex(x) for x in points])
    values = xs ** (2 * (1 - ell)) * (ps.eval("p", xs) * ps.eval("s", xs) - ps.eval("q", xs) * ps.eval("r", xs))
    return float(np.max(np.abs(values - ps.delta_c)))


@dataclass
class DeltaPM:
    plus: complex
    minus: complex
    product: complex
    ratio_to_delta: complex
    residual_plus2: float    # |D+D- - (2w)^2 Delta|
    residual_minus2: float   # |D+D- - (2w)^-2 Delta|
    exponent: int            # the confirmed exponent of (2 omega)

    def to_json(self) -> dict:
        return {
            "delta_plus": cpair(self.plus),
            "delta_minus": cpair(self.minus),
            "product": cpair(self.product),
            "ratio_to_delta": cpair(self.ratio_to_delta),
            "residual_plus2": self.residual_plus2,
            "residual_minus2": self.residual_minus2,
            "exponent": self.exponent,
        }


def delta_pm(ps: PolySet) -> DeltaPM:
    """Delta_pm = p(1) +- (-1)^ell 2w r(1), with both candidate product relations."""
    if not ps.params.normalized:
        raise DegenerateParams("delta_pm needs (2 omega)^2 (lambda + mu^2) = 1")
    plus, minus = ps.delta_plus, ps.delta_minus
    if min(abs(plus), abs(minus)) < GENERIC_TOL:
        raise DegenerateParams(f"Delta_pm vanishes: ({plus}, {minus})")
    tw = ps.params.tw
    product = plus * minus
    delta = ps.delta_c
    res_p = abs(product - tw ** 2 * delta)
    res_m = abs(product - tw ** -2 * delta)
    return DeltaPM(plus, minus, product, product / delta, res_p, res_m, 2 if res_p <= res_m else -2)
