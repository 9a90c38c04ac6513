"""
Shared test fixtures.

Session-scoped eigenbases for a few reference parameter sets (integration is
the slow part, so every module reuses them), two independent oracles and an
HTTP client over the ASGI app.

Oracles:
- taylor_jet: continuation of the sDCHE by local power series along the
  log-linear path from 1 (no adaptive integrator involved)
- rk4_phase: fixed-step RK4 for the Josephson phase
"""
import math

import numpy as np
import pytest
import sympy
from httpx import ASGITransport, AsyncClient

from src.heunsym.cover import ONE, CoverPoint
from src.heunsym.josephson import heun_to_params, integrate_phase
from src.heunsym.main import app
from src.heunsym.monodromy import monodromy_report
from src.heunsym.polys import HeunParams
from src.heunsym.solver import eigenbasis

# ell = 1 closed forms hold for these; maps to A = 0.4472..., B = -0.4472..., omega = 0.4472...
REF = HeunParams(1, sympy.Integer(1), sympy.Rational(1, 2))
ELL2 = HeunParams(2, sympy.Rational(3, 5), sympy.Rational(-1, 3))
COMPLEX = HeunParams(1, 0.8 + 0.3j, 0.6)


@pytest.fixture(scope="session")
def ref_basis():
    return eigenbasis(REF)


@pytest.fixture(scope="session")
def ell2_basis():
    return eigenbasis(ELL2)


@pytest.fixture(scope="session")
def complex_basis():
    return eigenbasis(COMPLEX)


@pytest.fixture(scope="session")
def ref_report(ref_basis):
    return monodromy_report(ref_basis)


@pytest.fixture(scope="session")
def ref_josephson():
    return heun_to_params(REF)


@pytest.fixture(scope="session")
def ref_trajectory(ref_josephson):
    return integrate_phase(ref_josephson, 0.3)


@pytest.fixture
async def client():
    """HTTP test client bound to the app, no network."""
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as ac:
        yield ac


def heun_json(params: HeunParams) -> dict:
    """Request body for the Heun endpoints."""
    return {"ell": params.ell, "lam": str(params.lam), "mu": str(params.mu)}


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def _taylor_step(params: HeunParams, zc: complex, value: complex, deriv: complex, h: complex, order: int = 40):
    l1 = params.l + 1
    mu, lam = params.mu_c, params.lam_c
    b0, b1, b2 = l1 * zc + mu * (1 - zc * zc), l1 - 2 * mu * zc, -mu
    c0, c1 = lam - mu * l1 * zc, -mu * l1
    e = [value, deriv]
    for n in range(order):
        prev = e[n - 1] if n >= 1 else 0
        acc = (
            2 * zc * (n + 1) * n * e[n + 1] + n * (n - 1) * e[n]
            + b0 * (n + 1) * e[n + 1] + b1 * n * e[n] + b2 * (n - 1) * prev
            + c0 * e[n] + c1 * prev
        )
        e.append(-acc / (zc * zc * (n + 2) * (n + 1)))
    v = sum(c * h ** k for k, c in enumerate(e))
    d = sum(k * c * h ** (k - 1) for k, c in enumerate(e) if k)
    return v, d


def taylor_jet(params: HeunParams, target: CoverPoint, value: complex, deriv: complex,
               start: CoverPoint = ONE):
    """(E, E') at target for Cauchy data at start, by local power series."""
    w0, w1 = start.w, target.w
    n = max(1, math.ceil(abs(w1 - w0) / 0.15))
    zs = [np.exp(w0 + (w1 - w0) * k / n) for k in range(n + 1)]
    for zc, zn in zip(zs[:-1], zs[1:]):
        value, deriv = _taylor_step(params, zc, value, deriv, zn - zc)
    return value, deriv


def rk4_phase(jp, phi0: float, t_end: float, steps: int = 20000):
    """phi(t_end) and P(t_end) by fixed-step RK4."""
    h = t_end / steps
    y = np.array([phi0, 0.0])

    def f(t, y):
        return np.array([jp.B + jp.A * math.cos(jp.omega * t) - math.sin(y[0]), math.cos(y[0])])

    t = 0.0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y[0], y[1]
