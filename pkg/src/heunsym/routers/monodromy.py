"""
Monodromy router.

POST /monodromy  → A, B, M, det M, boundary data and residuals
POST /laurent    → monodromy eigen-combinations + both Laurent series
"""
from fastapi import APIRouter

from src.heunsym.errors import HeunSymError
from src.heunsym.laurent import laurent_pair
from src.heunsym.monodromy import monodromy_report
from src.heunsym.routers import http_error
from src.heunsym.schemas import LaurentRequest, LaurentResponse, MonodromyRequest, MonodromyResponse
from src.heunsym.solver import eigenbasis

router = APIRouter(tags=["monodromy"])


@router.post("/monodromy", response_model=MonodromyResponse)
def monodromy(req: MonodromyRequest):
    """
    Matrices of Theta_A, Theta_B and the monodromy from five boundary values.

    Input: Heun parameters + tol
    Output: matrices as 2x2 arrays of [re, im], det M, residuals, passed
    """
    try:
        basis = eigenbasis(req.to_params(), req.tol)
        report = monodromy_report(basis)
    except HeunSymError as exc:
        raise http_error(exc)
    return MonodromyResponse(**report.to_json())


@router.post("/laurent", response_model=LaurentResponse)
def laurent(req: LaurentRequest):
    """
    Eigen-combinations of M and their series sum_k g_k z^{k+gamma}.

    Input: Heun parameters + tol + optional starting N
    Output: eigen, plus, minus (coefficients ordered k = -N..N)
    """
    try:
        basis = eigenbasis(req.to_params(), req.tol)
        report = monodromy_report(basis, with_loop=False)
        pair = laurent_pair(basis, report.M, report.boundary, req.N)
    except HeunSymError as exc:
        raise http_error(exc)
    return LaurentResponse(**pair.to_json())
