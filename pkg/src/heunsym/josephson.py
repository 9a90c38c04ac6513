"""
Bridge between the sDCHE and the overdamped Josephson equation

    phi' + sin(phi) = B + A cos(omega t).

Parameters map as l = B/omega, mu = A/(2 omega), lambda = (2 omega)^-2 - mu^2,
and the unit circle point e^{i omega t} is the cover point (1, omega t).

On the circle a solution is carried linearly: with P(t) = int_0^t cos(phi),

    X(t) = (x1, x2) = (e^{(P + i phi)/2}, e^{(P - i phi)/2})

solves X' = H(t) X, H = [[i f/2, 1/2], [1/2, -i f/2]], f = B + A cos(omega t),
and Y(t) = S X(-t), S = [[0, 1], [-1, 0]], is a second solution with
det[X, Y] = -2 cos(phi(0)). Every phase map below (period shift, Theta_C,
Theta_A, Theta_B) is a linear recombination aX + bY; e^{i phi} = z1/z2 and
e^P = z1 z2 once the vector is normalized so that z1 z2 = 1 at t = 0.
"""
from __future__ import annotations

import cmath
import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.heunsym.config import GENERIC_TOL, POLE_TOL, TOL
from src.heunsym.cover import ONE, CoverPoint, cover_pow, invert
from src.heunsym.errors import (
    BranchLoss,
    DegenerateConstants,
    DegenerateInitial,
    InvalidParams,
    NonIntegerOrder,
    NonPositiveSum,
    OutOfDomain,
    PoleHit,
    SecantSingular,
    StepFailure,
)
from src.heunsym.monodromy import (
    BoundaryData,
    collect_boundary_data,
    continuation_constants,
    left_half_values,
    matrices_AB,
)
from src.heunsym.polys import HeunParams, PolySet, build_polys, cpair
from src.heunsym.solver import EigenBasis

log = logging.getLogger("heunsym")

EPS = cmath.exp(0.25j * math.pi)   # (1 + i)/sqrt(2)
S_MAT = np.array([[0, 1], [-1, 0]], dtype=complex)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JosephsonParams:
    A: float
    B: float
    omega: float

    def __post_init__(self):
        for name in ("A", "B", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParams(f"{name} must be finite")
        if self.A == 0:
            raise InvalidParams("A must be nonzero")
        if not self.omega > 0:
            raise InvalidParams(f"omega must be positive, got {self.omega}")

    @property
    def T(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def l(self) -> float:
        return self.B / self.omega

    @property
    def mu(self) -> float:
        return self.A / (2 * self.omega)

    @property
    def lam(self) -> float:
        return (2 * self.omega) ** -2 - self.mu ** 2

    @property
    def integer_order(self) -> bool:
        """True when B/omega is a negative integer."""
        return abs(self.l - round(self.l)) < 1e-9 and round(self.l) <= -1

    @property
    def ell_real(self) -> float:
        return -self.l

    def drive(self, t):
        return self.B + self.A * np.cos(self.omega * t)

    def to_json(self) -> dict:
        return {"A": self.A, "B": self.B, "omega": self.omega, "T": self.T, "l": self.l,
                "mu": self.mu, "lambda": self.lam, "integer_order": self.integer_order}


def params_to_heun(jp: JosephsonParams, strict: bool = True) -> Optional[HeunParams]:
    """HeunParams for integer order; otherwise NonIntegerOrder (or None with strict=False)."""
    if not jp.integer_order:
        if strict:
            raise NonIntegerOrder(f"B/omega = {jp.l} is not a negative integer")
        log.warning(f"B/omega = {jp.l} is not a negative integer; Theta phase maps are unavailable")
        return None
    return HeunParams(int(round(jp.ell_real)), jp.lam, jp.mu, two_omega=2 * jp.omega)


def heun_to_params(hp: HeunParams) -> JosephsonParams:
    S = hp.S
    if abs(S.imag) > 1e-12 * abs(S) or S.real <= 0:
        raise NonPositiveSum(f"lambda + mu^2 = {S} is not real positive")
    mu = hp.mu_c
    if abs(mu.imag) > 1e-12 * abs(mu):
        raise InvalidParams(f"mu = {mu} must be real")
    omega = 1 / (2 * math.sqrt(S.real))
    return JosephsonParams(A=2 * omega * mu.real, B=-omega * hp.ell, omega=omega)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

class PhaseTrajectory:
    """
    phi(t) (unwrapped) and P(t) on a grid, plus an evaluator for any t in
    the covered span. ODE trajectories evaluate through dense output;
    extended ones through the period-shift formulas. wrap_offset is the
    multiple of 2 pi used to stitch the forward extension.
    """

    def __init__(self, jp: JosephsonParams, phi0: float, t_grid: np.ndarray,
                 evaluator: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
                 span: Tuple[float, float], wrap_offset: int = 0):
        self.jp = jp
        self.phi0 = float(phi0)
        self.t_grid = np.asarray(t_grid, dtype=float)
        self._evaluator = evaluator
        self.span = span
        self.wrap_offset = wrap_offset
        self.phi, self.P = self.at(self.t_grid)

    def at(self, t) -> Tuple[np.ndarray, np.ndarray]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.span
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise OutOfDomain(f"t outside trajectory span [{lo}, {hi}]")
        return self._evaluator(t)

    def vector(self, t) -> np.ndarray:
        """X(t) as an array of shape (2, n)."""
        phi, P = self.at(t)
        return np.array([np.exp((P + 1j * phi) / 2), np.exp((P - 1j * phi) / 2)])

    def exp_iphi(self, t) -> np.ndarray:
        return np.exp(1j * self.at(t)[0])

    def covers(self, lo: float, hi: float) -> bool:
        return self.span[0] <= lo + 1e-12 and self.span[1] >= hi - 1e-12

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["t", "phi", "P", "re_exp_iphi", "im_exp_iphi"])
        for t, phi, P in zip(self.t_grid, self.phi, self.P):
            writer.writerow([repr(float(t)), repr(float(phi)), repr(float(P)),
                             repr(math.cos(phi)), repr(math.sin(phi))])
        return buf.getvalue()


def integrate_phase(jp: JosephsonParams, phi0: float, t_span: Optional[Tuple[float, float]] = None,
                    tol: float = TOL, n: int = 201) -> PhaseTrajectory:
    """Integrate (phi, P) from t = 0 in both directions with dense output."""
    t0, t1 = t_span if t_span is not None else (-jp.T / 2, jp.T / 2)
    if not t0 <= 0 <= t1:
        raise InvalidParams(f"t_span {t_span} must contain 0")

    def rhs(t, y):
        return [jp.drive(t) - math.sin(y[0]), math.cos(y[0])]

    pieces = []
    for end in (t1, t0):
        if end == 0:
            pieces.append(None)
            continue
        sol = solve_ivp(rhs, (0.0, end), [phi0, 0.0], method="DOP853", rtol=tol, atol=tol, dense_output=True)
        if sol.status < 0:
            raise StepFailure(f"phase integration to t={end} failed: {sol.message}")
        pieces.append(sol.sol)
    forward, backward = pieces

    def evaluator(t):
        phi = np.empty_like(t)
        P = np.empty_like(t)
        for mask, dense in ((t >= 0, forward), (t < 0, backward)):
            if not np.any(mask):
                continue
            if dense is None:
                phi[mask], P[mask] = phi0, 0.0
                continue
            y = dense(t[mask])
            phi[mask], P[mask] = y[0], y[1]
        return phi, P

    log.info(f"Phase trajectory integrated on [{t0:.6g}, {t1:.6g}] from phi0={phi0}")
    return PhaseTrajectory(jp, phi0, np.linspace(t0, t1, n), evaluator, (t0, t1))


def riccati_residual(jp: JosephsonParams, exp_iphi: Callable, ts, h: float = 1e-2) -> np.ndarray:
    """|phi' + sin(phi) - f| with phi' from a five-point difference of e^{i phi}."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    vals = [exp_iphi(ts + j * h) for j in (-2, -1, 1, 2)]
    d = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
    Phi = exp_iphi(ts)
    phi_dot = (d / Phi).imag
    sin_phi = ((Phi - 1 / Phi) / 2j).real
    return np.abs(phi_dot + sin_phi - jp.drive(ts))


# ---------------------------------------------------------------------------
# Period shift
# ---------------------------------------------------------------------------

@dataclass
class PeriodConstants:
    """x1, x2 at +-T/2 and the shift coefficients kappa_+-, gamma."""
    a_plus: complex
    a_minus: complex
    b_plus: complex
    b_minus: complex
    cos_phi0: float

    @property
    def kappa_plus(self) -> complex:
        return (self.a_plus ** 2 + self.b_plus ** 2) / 2

    @property
    def kappa_minus(self) -> complex:
        return (self.a_minus ** 2 + self.b_minus ** 2) / 2

    @property
    def gamma(self) -> complex:
        return (self.a_plus * self.b_minus - self.b_plus * self.a_minus) / 2j


def period_constants(traj: PhaseTrajectory) -> PeriodConstants:
    T = traj.jp.T
    if not traj.covers(-T / 2, T / 2):
        raise InvalidParams("trajectory must cover [-T/2, T/2]")
    c0 = math.cos(traj.phi0)
    if abs(c0) < GENERIC_TOL:
        raise SecantSingular(f"cos(phi(0)) = {c0}")
    X = traj.vector(np.array([T / 2, -T / 2]))
    return PeriodConstants(X[0, 0], X[0, 1], X[1, 0], X[1, 1], c0)


def _partner(traj: PhaseTrajectory, t: np.ndarray) -> np.ndarray:
    return S_MAT @ traj.vector(-t)


def shift_vectors(traj: PhaseTrajectory, t: np.ndarray, direction: int, pc: Optional[PeriodConstants] = None) -> np.ndarray:
    """X(t + direction*T) for t in [-T/2, T/2]."""
    pc = period_constants(traj) if pc is None else pc
    X, Y = traj.vector(t), _partner(traj, t)
    if direction > 0:
        return (pc.kappa_plus * X + 1j * pc.gamma * Y) / pc.cos_phi0
    return (pc.kappa_minus * X - 1j * pc.gamma * Y) / pc.cos_phi0


def extend_phase(traj: PhaseTrajectory, n: Optional[int] = None) -> PhaseTrajectory:
    """
    Extend a trajectory on [-T/2, T/2] to [-3T/2, 3T/2] without integrating.

    The phase increment phi(t +- T) - phi(t) is unwrapped on a fine grid and
    stitched to the known values at t = +-T/2.
    """
    jp = traj.jp
    T = jp.T
    pc = period_constants(traj)
    grid = np.linspace(-T / 2, T / 2, 2049)
    phi_grid, _ = traj.at(grid)
    phi_half = traj.at(np.array([-T / 2, T / 2]))[0]

    increments = {}
    offsets = {}
    for direction in (1, -1):
        Z = shift_vectors(traj, grid, direction, pc)
        old = np.exp(1j * phi_grid)
        theta = np.unwrap(np.angle(Z[0] / Z[1] / old))
        # stitch: phi(T/2) = phi(-T/2 + T) and phi(-T/2) = phi(T/2 - T)
        if direction > 0:
            target, idx = phi_half[1] - phi_half[0], 0
        else:
            target, idx = phi_half[0] - phi_half[1], -1
        k = round((target - theta[idx]) / (2 * math.pi))
        increments[direction] = theta + 2 * math.pi * k
        offsets[direction] = int(k)

    def evaluator(t):
        phi = np.empty_like(t)
        P = np.empty_like(t)
        inner = np.abs(t) <= T / 2
        if np.any(inner):
            phi[inner], P[inner] = traj.at(t[inner])
        for direction, mask in ((1, t > T / 2), (-1, t < -T / 2)):
            if not np.any(mask):
                continue
            s = np.clip(t[mask] - direction * T, -T / 2, T / 2)
            Z = shift_vectors(traj, s, direction, pc)
            phi_s, _ = traj.at(s)
            theta = np.angle(Z[0] / Z[1] / np.exp(1j * phi_s))
            ref = np.interp(s, grid, increments[direction])
            theta = theta + 2 * math.pi * np.round((ref - theta) / (2 * math.pi))
            phi[mask] = phi_s + theta
            P[mask] = np.log(Z[0] * Z[1]).real
        return phi, P

    n = n if n is not None else 3 * len(traj.t_grid)
    log.info(f"Trajectory extended algebraically to [{-1.5 * T:.6g}, {1.5 * T:.6g}]")
    return PhaseTrajectory(jp, traj.phi0, np.linspace(-1.5 * T, 1.5 * T, n), evaluator,
                           (-1.5 * T, 1.5 * T), wrap_offset=offsets[1])


def phase_monodromy_matrix(traj: PhaseTrajectory) -> np.ndarray:
    """
    Monodromy in the basis E~ generated by the trajectory itself (see
    basis_from_trajectory); built from phi(0), phi(+-T/2), P(+-T/2) only.
    """
    pc = period_constants(traj)
    beta_plus = (pc.kappa_plus + pc.kappa_minus) / 2
    beta_minus = (pc.kappa_plus - pc.kappa_minus) / 2
    g = pc.gamma
    jp = traj.jp
    sign = (-1) ** int(round(jp.ell_real)) if jp.integer_order else cmath.exp(1j * math.pi * jp.ell_real)
    return sign / pc.cos_phi0 * np.array([
        [beta_plus, 1j * (beta_minus + g)],
        [1j * (g - beta_minus), beta_plus],
    ], dtype=complex)


# ---------------------------------------------------------------------------
# Forward and inverse maps
# ---------------------------------------------------------------------------

def phi_from_values(alpha: float, ell: int, at: CoverPoint, here, there) -> complex:
    """-i z^-ell (c E+ + i s E-)(z) / (c E+ - i s E-)(1/z), c, s = cos, sin of alpha/2."""
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    num = c * here[0] + 1j * s * here[1]
    den = c * there[0] - 1j * s * there[1]
    if abs(den) < POLE_TOL:
        raise PoleHit(f"denominator {abs(den):.3e} at {at}")
    return -1j * at.project() ** (-ell) * num / den


def ep_from_values(alpha: float, mu: complex, at: CoverPoint, here, there, one) -> complex:
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    z = at.project()
    norm = c * c * one[0] ** 2 + s * s * one[1] ** 2
    num = c * here[0] + 1j * s * here[1]
    den = c * there[0] - 1j * s * there[1]
    return np.exp(mu * (2 - z - 1 / z)) * num * den / norm


def phi_from_basis(alpha: float, basis: EigenBasis, at: CoverPoint) -> complex:
    here = basis.jets(at)[:, 0]
    there = basis.jets(invert(at))[:, 0]
    return phi_from_values(alpha, basis.params.ell, at, here, there)


def eP_from_basis(alpha: float, basis: EigenBasis, at: CoverPoint) -> complex:
    here = basis.jets(at)[:, 0]
    there = basis.jets(invert(at))[:, 0]
    return ep_from_values(alpha, basis.params.mu_c, at, here, there, basis.jets(ONE)[:, 0])


def alpha_for(phi0: float) -> float:
    """alpha reproducing phi(0) = phi0 with unit-normalized E+-."""
    return phi0 + math.pi / 2


def holomorphic_riccati_residual(alpha: float, basis: EigenBasis, at: CoverPoint) -> complex:
    """Phi' + (2 i w)^-1 z^-1 (Phi^2 - 1) - (l/z + mu(1 + z^-2)) Phi, with Phi' from exact jets."""
    params = basis.params
    ell, mu, tw = params.ell, params.mu_c, params.tw
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    coeff_num = np.array([c, 1j * s])
    coeff_den = np.array([c, -1j * s])
    z = at.project()
    here, there = basis.jets(at), basis.jets(invert(at))
    F, dF = coeff_num @ here[:, 0], coeff_num @ here[:, 1]
    G, dG = coeff_den @ there[:, 0], coeff_den @ there[:, 1]
    Phi = -1j * z ** (-ell) * F / G
    dPhi = Phi * (-ell / z + dF / F + dG / (z * z * G))
    return dPhi + (Phi * Phi - 1) / (1j * tw * z) - (-ell / z + mu * (1 + 1 / (z * z))) * Phi


def theta_C_holomorphic(alpha: float, basis: EigenBasis, at: CoverPoint) -> complex:
    """-1/Phi(1/z); the same function as the forward map with alpha -> -alpha."""
    return -1 / phi_from_basis(alpha, basis, invert(at))


def track_sqrt(values: Sequence[complex]) -> np.ndarray:
    """Square roots continued along sampled values, principal at the first one."""
    values = np.asarray(values, dtype=complex)
    out = np.empty_like(values)
    out[0] = np.sqrt(values[0])
    for j in range(1, len(values)):
        step = np.angle(values[j] / values[j - 1])
        if abs(step) > math.pi / 2:
            raise BranchLoss(f"phase step {step:.3f} between samples {j - 1} and {j}")
        r = np.sqrt(values[j])
        out[j] = r if abs(r - out[j - 1]) <= abs(r + out[j - 1]) else -r
    return out


def _check_initial(phi_one: complex):
    for target in (1j, -1j):
        if abs(phi_one - target) < 1e-8:
            raise DegenerateInitial(f"Phi(1) = {phi_one}: one eigenfunction vanishes identically")


def basis_from_phi(ell: float, mu: float, path: Sequence[CoverPoint], phi_here, phi_there,
                   ep_here, ep_there) -> np.ndarray:
    """
    E~+- along a path starting at the lifted unit, from Phi and E_P at the
    path points and at their inverses. Square roots are tracked along the path.
    """
    if path[0] != ONE:
        raise InvalidParams("path must start at the lifted unit")
    _check_initial(complex(phi_here[0]))
    root_phi_here = track_sqrt(phi_here)
    root_phi_there = track_sqrt(phi_there)
    root_ep_here = track_sqrt(ep_here)
    root_ep_there = track_sqrt(ep_there)
    out = np.empty((len(path), 2), dtype=complex)
    for j, p in enumerate(path):
        z = p.project()
        h = 0.5 * np.exp(mu * (z + 1 / z - 2) / 2) * cover_pow(p, ell / 2)
        u = root_ep_here[j] * root_phi_here[j]
        v = root_ep_there[j] / root_phi_there[j]
        out[j, 0] = h * (EPS * u + EPS.conjugate() * v)
        out[j, 1] = h * (EPS.conjugate() * u + EPS * v)
    return out


def _circle_h(jp: JosephsonParams, t: np.ndarray) -> np.ndarray:
    return 0.5 * np.exp(jp.mu * (np.cos(jp.omega * t) - 1)) * np.exp(0.5j * jp.ell_real * jp.omega * t)


def basis_from_vectors(jp: JosephsonParams, t: np.ndarray, x_here: np.ndarray, x_mirror: np.ndarray) -> np.ndarray:
    """E~+- at (1, omega t) from x1(t) and x2(-t); shape (n, 2)."""
    h = _circle_h(jp, t)
    plus = h * (EPS * x_here[0] + EPS.conjugate() * x_mirror[1])
    minus = h * (EPS.conjugate() * x_here[0] + EPS * x_mirror[1])
    return np.stack([plus, minus], axis=-1)


def basis_from_trajectory(traj: PhaseTrajectory, ts) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return basis_from_vectors(traj.jp, ts, traj.vector(ts), traj.vector(-ts))


# ---------------------------------------------------------------------------
# Circle solutions and phase maps
# ---------------------------------------------------------------------------

class CircleSolution:
    """
    The solution a X + b Y over a base trajectory, normalized so that
    z1 z2 = 1 at t = 0. phi and P follow from z1/z2 and z1 z2.
    """

    def __init__(self, base: PhaseTrajectory, a: complex, b: complex):
        self.base = base
        self.a, self.b = complex(a), complex(b)
        z0 = self._raw(np.array([0.0]))[:, 0]
        self.norm = complex(z0[0] * z0[1])
        scale = abs(self.a) ** 2 + abs(self.b) ** 2
        if scale == 0 or abs(self.norm) < 1e-12 * scale:
            raise DegenerateConstants(f"z1 z2(0) = {self.norm} vanishes")

    @classmethod
    def from_trajectory(cls, traj: PhaseTrajectory) -> "CircleSolution":
        return cls(traj, 1, 0)

    @property
    def jp(self) -> JosephsonParams:
        return self.base.jp

    def _raw(self, t: np.ndarray) -> np.ndarray:
        return self.a * self.base.vector(t) + self.b * _partner(self.base, t)

    def vector(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self._raw(t) / np.sqrt(self.norm)

    def Phi(self, t) -> np.ndarray:
        z = self._raw(np.atleast_1d(np.asarray(t, dtype=float)))
        return z[0] / z[1]

    def eP(self, t) -> np.ndarray:
        z = self._raw(np.atleast_1d(np.asarray(t, dtype=float)))
        return z[0] * z[1] / self.norm

    @property
    def phi0(self) -> float:
        return float(np.angle(self.Phi(0.0)[0]))

    def sample(self, ts) -> dict:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        Phi = self.Phi(ts)
        return {"t": ts, "phi": np.unwrap(np.angle(Phi)), "P": np.log(self.eP(ts)).real, "Phi": Phi}

    def partner_coeffs(self) -> Tuple[complex, complex]:
        """Coefficients of S Z(-t) = a Y - b X."""
        return -self.b, self.a

    def shifted(self, direction: int) -> "CircleSolution":
        """The same solution read at t + direction*T (t within the base span)."""
        pc = period_constants(self.base)
        # X(t+T) = (k X + i g Y)/c0 and Y(t+T) = S X(-t-T) = (k' Y + i g X)/c0 with k' the other kappa
        if direction > 0:
            kx, ky, g = pc.kappa_plus, pc.kappa_minus, 1j * pc.gamma
        else:
            kx, ky, g = pc.kappa_minus, pc.kappa_plus, -1j * pc.gamma
        a = (self.a * kx + self.b * g) / pc.cos_phi0
        b = (self.a * g + self.b * ky) / pc.cos_phi0
        return CircleSolution(self.base, a, b)


def theta_C_phase(sol: CircleSolution) -> CircleSolution:
    """phi(t) -> pi - phi(-t), i.e. (a, b) -> (-i b, i a)."""
    return CircleSolution(sol.base, -1j * sol.b, 1j * sol.a)


def theta_C_circle(traj_phi: Callable, t):
    """Circle form of the Theta_C map on a phase function."""
    return math.pi - traj_phi(-np.asarray(t))


def _half_root(x1: complex, x2: complex) -> complex:
    r = cmath.sqrt(x1 * x2)
    if abs(r) < GENERIC_TOL:
        raise DegenerateConstants(f"e^P = {x1 * x2} vanishes at a half period")
    return r


def uvw_constants(ell: int, delta_plus: complex, delta_minus: complex,
                  x0: Sequence[complex], x_plus: Sequence[complex], x_minus: Sequence[complex]) -> dict:
    """
    Closed-form Theta phase constants from the vector (x1, x2) at t = 0, T/2
    and -T/2, where x1 = e^{(P + i phi)/2} and x2 = e^{(P - i phi)/2}.

        u+- = e^{i phi(T/2)/2} +- (-1)^ell i e^{-i phi(T/2)/2}
        v+- = (-1)^ell e^{i phi(-T/2)/2} +- i e^{-i phi(-T/2)/2}
        w+- = cos(phi(0)/2) +- sin(phi(0)/2)
        U   = 2 e^{P(T/2)/2} (D+ u+ w+ - i D- u- w-)
        V   = D+ w+ (e^{P(T/2)/2} u+ + e^{P(-T/2)/2} v+)
              + i D- w- (e^{P(T/2)/2} u- + e^{P(-T/2)/2} v-)

    The two halves of V agree whenever the E+- values at (-1)_c and (-1)_p
    obey the boundary cross-ratio relation; `v_defect` is their difference.
    """
    sign = (-1) ** ell
    r_plus = _half_root(x_plus[0], x_plus[1])
    r_minus = _half_root(x_minus[0], x_minus[1])
    u_plus = (x_plus[0] + sign * 1j * x_plus[1]) / r_plus
    u_minus = (x_plus[0] - sign * 1j * x_plus[1]) / r_plus
    v_plus = (sign * x_minus[0] + 1j * x_minus[1]) / r_minus
    v_minus = (sign * x_minus[0] - 1j * x_minus[1]) / r_minus
    cos_half = (x0[0] + x0[1]) / 2
    sin_half = (x0[0] - x0[1]) / 2j
    w_plus, w_minus = cos_half + sin_half, cos_half - sin_half
    U = 2 * r_plus * (delta_plus * u_plus * w_plus - 1j * delta_minus * u_minus * w_minus)
    v_right = r_plus * (delta_plus * w_plus * u_plus + 1j * delta_minus * w_minus * u_minus)
    v_left = r_minus * (delta_plus * w_plus * v_plus + 1j * delta_minus * w_minus * v_minus)
    return {
        "u_plus": complex(u_plus), "u_minus": complex(u_minus),
        "v_plus": complex(v_plus), "v_minus": complex(v_minus),
        "w_plus": complex(w_plus), "w_minus": complex(w_minus),
        "U": complex(U), "V": complex(v_right + v_left),
        "v_defect": float(abs(v_right - v_left)),
    }


def uvw_from_phase(ell: int, delta_plus: complex, delta_minus: complex, phi0: float,
                   phi_half: Tuple[float, float], P_half: Tuple[float, float]) -> dict:
    """uvw_constants from phi(0), (phi(T/2), phi(-T/2)) and (P(T/2), P(-T/2))."""
    def vec(phi, P):
        return (cmath.exp((P + 1j * phi) / 2), cmath.exp((P - 1j * phi) / 2))

    return uvw_constants(ell, delta_plus, delta_minus, vec(phi0, 0.0),
                         vec(phi_half[0], P_half[0]), vec(phi_half[1], P_half[1]))


@dataclass
class ThetaPhaseConstants:
    """Everything the phase maps need, computed from one circle solution."""
    kappa_plus: complex
    kappa_minus: complex
    beta_plus: complex
    beta_minus: complex
    gamma_phase: complex
    u_plus: complex
    u_minus: complex
    v_plus: complex
    v_minus: complex
    w_plus: complex
    w_minus: complex
    U: complex
    V: complex
    v_defect: float
    e_one: np.ndarray       # E~+- at 1
    e_c: np.ndarray         # E~+- at (1, pi)
    e_p: np.ndarray         # E~+- at (1, -pi)
    m_A: complex
    n_A: complex
    m_B: complex
    n_B: complex
    matrix_A: np.ndarray
    matrix_B: np.ndarray

    def mn(self, which: str) -> Tuple[complex, complex]:
        return (self.m_A, self.n_A) if which == "A" else (self.m_B, self.n_B)

    def closed_form_mn(self, which: str) -> Tuple[complex, complex]:
        """(V, U) for Theta_A and (U, V) for Theta_B; proportional to mn(which)."""
        return (self.V, self.U) if which == "A" else (self.U, self.V)

    def to_json(self) -> dict:
        def mat(X):
            return [[cpair(x) for x in row] for row in X]

        return {
            "kappa_plus": cpair(self.kappa_plus), "kappa_minus": cpair(self.kappa_minus),
            "beta_plus": cpair(self.beta_plus), "beta_minus": cpair(self.beta_minus),
            "gamma_phase": cpair(self.gamma_phase),
            "u_plus": cpair(self.u_plus), "u_minus": cpair(self.u_minus),
            "v_plus": cpair(self.v_plus), "v_minus": cpair(self.v_minus),
            "w_plus": cpair(self.w_plus), "w_minus": cpair(self.w_minus),
            "U": cpair(self.U), "V": cpair(self.V), "v_defect": self.v_defect,
            "e_one": [cpair(x) for x in self.e_one],
            "e_c": [cpair(x) for x in self.e_c],
            "e_p": [cpair(x) for x in self.e_p],
            "m_A": cpair(self.m_A), "n_A": cpair(self.n_A),
            "m_B": cpair(self.m_B), "n_B": cpair(self.n_B),
            "matrix_A": mat(self.matrix_A), "matrix_B": mat(self.matrix_B),
        }


def theta_phase_constants(sol: CircleSolution, ps: Optional[PolySet] = None) -> ThetaPhaseConstants:
    """
    Constants of the Theta_A / Theta_B phase maps for `sol`, from its values
    at t = 0, +-T/2 only. Needs integer order.
    """
    jp = sol.jp
    hp = params_to_heun(jp)
    ps = build_polys(hp) if ps is None else ps
    T = jp.T
    x = sol.vector(np.array([0.0, T / 2, -T / 2]))
    a_plus, a_minus = x[0, 1], x[0, 2]
    b_plus, b_minus = x[1, 1], x[1, 2]
    c0 = (x[0, 0] ** 2 + x[1, 0] ** 2) / 2     # cos(phi(0)) for a real solution
    if abs(c0) < GENERIC_TOL:
        raise SecantSingular(f"cos(phi(0)) = {c0}")
    kappa_plus = (a_plus ** 2 + b_plus ** 2) / 2
    kappa_minus = (a_minus ** 2 + b_minus ** 2) / 2
    gamma = (a_plus * b_minus - b_plus * a_minus) / 2j

    pref = 0.5 * np.exp(-2 * jp.mu)
    il = 1j ** hp.ell
    e_one = np.array([EPS * x[0, 0] + EPS.conjugate() * x[1, 0],
                      EPS.conjugate() * x[0, 0] + EPS * x[1, 0]]) / 2
    e_c = pref * il * np.array([EPS * a_plus + EPS.conjugate() * b_minus,
                                EPS.conjugate() * a_plus + EPS * b_minus])
    e_p = pref * il.conjugate() * np.array([EPS * a_minus + EPS.conjugate() * b_plus,
                                            EPS.conjugate() * a_minus + EPS * b_plus])
    if np.min(np.abs(e_one)) < GENERIC_TOL:
        raise DegenerateInitial(f"E~(1) = {e_one}")
    missing = np.full(2, np.nan, dtype=complex)
    bd = BoundaryData(e_one, e_c, e_p, missing, missing, complex(hp.mu_c))
    XA, XB = matrices_AB(bd, ps)
    base = np.array([1, 1j])
    mn = {}
    for name, X in (("A", XA), ("B", XB)):
        xp, yp = base @ X
        mn[name] = (xp - 1j * yp, xp + 1j * yp)
    uvw = uvw_constants(hp.ell, ps.delta_plus, ps.delta_minus, x[:, 0], x[:, 1], x[:, 2])
    return ThetaPhaseConstants(
        kappa_plus, kappa_minus, (kappa_plus + kappa_minus) / 2, (kappa_plus - kappa_minus) / 2, gamma,
        uvw["u_plus"], uvw["u_minus"], uvw["v_plus"], uvw["v_minus"], uvw["w_plus"], uvw["w_minus"],
        uvw["U"], uvw["V"], uvw["v_defect"],
        e_one, e_c, e_p, mn["A"][0], mn["A"][1], mn["B"][0], mn["B"][1], XA, XB,
    )


def theta_AB_phase(which: str, sol: CircleSolution, constants: Optional[ThetaPhaseConstants] = None,
                   ps: Optional[PolySet] = None, closed_form: bool = False) -> CircleSolution:
    """
    Phase image of Theta_A or Theta_B: Z -> m Z - i n S Z(-t), with (m, n)
    from the operator's matrix in the basis E~ that `sol` itself generates,
    or from (U, V) when `closed_form` is set. Both give the same image.

    e^P of the image at t = 0 is m^2 + n^2 - 2 m n sin(phi(0)) for a
    normalized `sol`; DegenerateConstants when it vanishes.
    """
    if which not in ("A", "B"):
        raise ValueError(f"which must be 'A' or 'B', got {which!r}")
    constants = theta_phase_constants(sol, ps) if constants is None else constants
    m, n = constants.closed_form_mn(which) if closed_form else constants.mn(which)
    x1, x2 = sol.vector(0.0)[:, 0]
    denom = (m * m + n * n) * x1 * x2 + 1j * m * n * (x1 * x1 - x2 * x2)
    if abs(denom) < GENERIC_TOL * (abs(m) ** 2 + abs(n) ** 2):
        raise DegenerateConstants(f"m^2 + n^2 - 2 m n sin(phi(0)) = {denom} for Theta_{which}")
    a, b = sol.a, sol.b
    new_a = m * a + 1j * n * b
    new_b = m * b - 1j * n * a
    return CircleSolution(sol.base, new_a, new_b)


# ---------------------------------------------------------------------------
# Cross-checks through the Heun layer
# ---------------------------------------------------------------------------

def heun_unit_monodromy(traj: PhaseTrajectory) -> np.ndarray:
    """Phase-side monodromy rewritten for E+- with E+-(1) = 1."""
    e_one = basis_from_trajectory(traj, [0.0])[0]
    if np.min(np.abs(e_one)) < GENERIC_TOL:
        raise DegenerateInitial(f"E~(1) = {e_one}")
    D = np.diag(e_one)
    return np.linalg.inv(D) @ phase_monodromy_matrix(traj) @ D


def quarter_period_check(jp: JosephsonParams, basis: EigenBasis, traj: PhaseTrajectory,
                         ts: Sequence[float]) -> float:
    """
    Phi at t + T/2 rebuilt from E+- on |t| < T/4 and the values at t = +-T/4
    only, compared with the trajectory. Returns the max deviation.
    """
    ps = basis.polys
    bd = collect_boundary_data(basis)
    c, p = continuation_constants(bd, ps)
    quarter = BoundaryData(bd.one, c, p, bd.i, bd.minus_i, bd.mu)
    A, B = matrices_AB(quarter, ps)
    alpha = alpha_for(traj.phi0)
    worst = 0.0
    for t in ts:
        if abs(t) >= jp.T / 4:
            raise OutOfDomain(f"t = {t} is outside the quarter period")
        at = CoverPoint(1.0, jp.omega * t)
        here = basis.jets(at)[:, 0]
        there = basis.jets(invert(at))[:, 0]
        upper, mirrored = left_half_values(here, there, at, A, B, ps)
        target = CoverPoint(1.0, jp.omega * t + math.pi)
        Phi = phi_from_values(alpha, basis.params.ell, target, upper, mirrored)
        worst = max(worst, abs(Phi - traj.exp_iphi(t + jp.T / 2)[0]))
    return worst
