"""
Universal cover of the punctured plane, semilog model.

A point is a pair (rho, phi) with rho > 0 and phi an unbounded argument
accumulator. Projection is rho * e^{i phi}. The canonical lifts of
z -> -1/z, -z, 1/z and the monodromy shift act on pairs:

    A: (rho, phi) -> (1/rho, pi - phi)
    B: (rho, phi) -> (rho,   pi + phi)
    C: (rho, phi) -> (1/rho, -phi)
    M^k: (rho, phi) -> (rho, phi + 2 pi k)

In w = ln(rho) + i*phi coordinates every lift is affine,
(sigma, phi) -> (s*sigma, s*phi + n*pi) with s = +-1 and integer n, which is
how compositions are reduced to canonical form.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from src.heunsym.config import POINT_ATOL


@dataclass(frozen=True)
class CoverPoint:
    rho: float
    phi: float

    def __post_init__(self):
        if not self.rho > 0 or not math.isfinite(self.rho) or not math.isfinite(self.phi):
            raise ValueError(f"CoverPoint needs rho > 0 and finite phi, got ({self.rho}, {self.phi})")

    @property
    def w(self) -> complex:
        """Log coordinate ln(rho) + i*phi."""
        return complex(math.log(self.rho), self.phi)

    @classmethod
    def from_w(cls, w: complex) -> "CoverPoint":
        return cls(math.exp(w.real), w.imag)

    def project(self) -> complex:
        return project(self)

    def to_json(self) -> dict:
        return {"rho": self.rho, "phi": self.phi}


ONE = CoverPoint(1.0, 0.0)
I_HAT = CoverPoint(1.0, math.pi / 2)
MINUS_I_HAT = CoverPoint(1.0, -math.pi / 2)
MINUS_ONE_C = CoverPoint(1.0, math.pi)
MINUS_ONE_P = CoverPoint(1.0, -math.pi)


class LiftKind(str, Enum):
    ID = "Id"
    A = "A"
    B = "B"
    C = "C"


# (s, n) of the affine action of each kind
_AFFINE = {
    LiftKind.ID: (1, 0),
    LiftKind.A: (-1, 1),
    LiftKind.B: (1, 1),
    LiftKind.C: (-1, 0),
}


@dataclass(frozen=True)
class LiftMap:
    """
    The lift M^shift o kind: on points, apply M^shift first, then kind.

    M_shift(k) is LiftMap(ID, k); the plain lifts have shift 0.
    """
    kind: LiftKind
    shift: int = 0

    @classmethod
    def m_shift(cls, k: int) -> "LiftMap":
        return cls(LiftKind.ID, k)

    def affine(self) -> tuple[int, int]:
        s, n = _AFFINE[self.kind]
        return s, n + 2 * self.shift * s

    @classmethod
    def from_affine(cls, s: int, n: int) -> "LiftMap":
        if s == 1:
            if n % 2 == 0:
                return cls(LiftKind.ID, n // 2)
            return cls(LiftKind.B, (n - 1) // 2)
        if n % 2 == 0:
            return cls(LiftKind.C, -n // 2)
        return cls(LiftKind.A, (1 - n) // 2)

    def __str__(self) -> str:
        if self.shift == 0:
            return self.kind.value
        if self.kind == LiftKind.ID:
            return f"M^{self.shift}"
        return f"M^{self.shift}o{self.kind.value}"


ID = LiftMap(LiftKind.ID)
A = LiftMap(LiftKind.A)
B = LiftMap(LiftKind.B)
C = LiftMap(LiftKind.C)


def project(p: CoverPoint) -> complex:
    return p.rho * cmath.exp(1j * p.phi)


def apply_lift(m: LiftMap, p: CoverPoint) -> CoverPoint:
    s, n = m.affine()
    rho = p.rho if s == 1 else 1.0 / p.rho
    return CoverPoint(rho, s * p.phi + n * math.pi)


def compose_lifts(m1: LiftMap, m2: LiftMap) -> LiftMap:
    """
    Canonical form of the operator word m1 o m2.

    Acting on function arguments the word pulls back, so on points it means
    "apply m1, then m2": compose_lifts(A, B) = M^-1 o C, compose_lifts(B, C) = M o A.
    """
    s1, n1 = m1.affine()
    s2, n2 = m2.affine()
    return LiftMap.from_affine(s1 * s2, s2 * n1 + n2)


def shift(p: CoverPoint, k: int) -> CoverPoint:
    """M^k applied to a point."""
    return CoverPoint(p.rho, p.phi + 2 * math.pi * k)


def invert(p: CoverPoint) -> CoverPoint:
    """The C lift, written 1/z-hat."""
    return CoverPoint(1.0 / p.rho, -p.phi)


def cover_pow(p: CoverPoint, gamma: complex) -> complex:
    """exp(gamma * (ln rho + i phi)); the only way non-integer powers are taken."""
    return cmath.exp(gamma * p.w)


def isclose(p: CoverPoint, q: CoverPoint, atol: float = POINT_ATOL) -> bool:
    return abs(p.rho - q.rho) <= atol and abs(p.phi - q.phi) <= atol
