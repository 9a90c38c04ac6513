"""
Pydantic schemas for the HTTP endpoints.

Naming convention:
- *Request = what the client sends
- *Response = what the server returns

Complex numbers travel as [re, im]. Heun parameters accept numbers or
strings; strings such as "1/3" or "1/2+1/4j" are parsed exactly.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field

from src.heunsym.config import TOL
from src.heunsym.josephson import JosephsonParams
from src.heunsym.polys import HeunParams, parse_number

Number = Union[int, float, str]
Pair = List[float]
Matrix = List[List[Pair]]


# --- Heun side ---

class HeunParamsRequest(BaseModel):
    """Parameters of the sDCHE. two_omega defaults to (lambda + mu^2)^(-1/2)."""
    ell: int = Field(description="Order, l = -ell, ell >= 1")
    lam: Number = Field(description="lambda")
    mu: Number = Field(description="mu, nonzero")
    two_omega: Optional[Number] = Field(None, description="2 omega; omit for the normalized choice")

    def to_params(self) -> HeunParams:
        def value(x):
            return parse_number(x) if isinstance(x, str) else x

        two_omega = None if self.two_omega is None else complex(value(self.two_omega))
        return HeunParams(self.ell, value(self.lam), value(self.mu), two_omega)


class PolysResponse(BaseModel):
    """Polynomials p, q, r, s and the constants Delta, Delta_+-, plus the exact identity report."""
    polys: dict
    identities: dict
    delta_pm: Optional[dict] = Field(None, description="Only for normalized parameters")


class MonodromyRequest(HeunParamsRequest):
    tol: float = Field(TOL, description="Integrator relative tolerance")


class MonodromyResponse(BaseModel):
    """Matrices of Theta_A, Theta_B and the monodromy in the E+- basis."""
    A: Matrix
    B: Matrix
    M: Matrix
    det_M: Pair
    det_M_error: float
    generic: bool
    boundary: dict
    residuals: Dict[str, float]
    passed: bool


class LaurentRequest(MonodromyRequest):
    N: Optional[int] = Field(None, description="Starting truncation; doubles until the tail decays")


class LaurentResponse(BaseModel):
    """Monodromy eigen-combinations and their two-sided series."""
    eigen: dict
    plus: dict
    minus: dict


# --- Josephson side ---

class JosephsonRequest(BaseModel):
    """phi' + sin(phi) = B + A cos(omega t) with phi(0) = phi0."""
    A: float
    B: float
    omega: float = Field(gt=0)
    phi0: float = 0.0
    tol: float = Field(TOL, description="Integrator relative tolerance")
    n: int = Field(201, ge=3, description="Grid size of the returned samples")

    def to_params(self) -> JosephsonParams:
        return JosephsonParams(self.A, self.B, self.omega)


class PhaseMonodromyResponse(BaseModel):
    """
    Monodromy read off one period of the phase, in the basis the trajectory
    generates. M_heun and constants are present for integer order only.
    """
    params: dict
    M_phase: Matrix
    M_heun: Optional[Matrix] = None
    constants: Optional[dict] = None


class ExtendResponse(BaseModel):
    """Trajectory on [-3T/2, 3T/2] built from one period without integrating."""
    params: dict
    t: List[float]
    phi: List[float]
    P: List[float]
    wrap_offset: int
