"""
Polynomial router: the p, q, r, s system of one parameter set.

POST /polys  → PolySet JSON + exact identity report (+ Delta_pm when normalized)
"""
from fastapi import APIRouter

from src.heunsym.errors import HeunSymError
from src.heunsym.polys import build_polys, delta_pm, verify_poly_system
from src.heunsym.routers import http_error
from src.heunsym.schemas import HeunParamsRequest, PolysResponse

router = APIRouter(tags=["polys"])


@router.post("/polys", response_model=PolysResponse)
def polys(req: HeunParamsRequest):
    """
    Build the polynomial system and check its identities.

    Input: ell, lam, mu (numbers or exact strings), optional two_omega
    Output: polys, identities, delta_pm

    Exact inputs give exactly zero residuals; failures are reported, not raised.
    """
    try:
        ps = build_polys(req.to_params())
        report = verify_poly_system(ps)
        pm = delta_pm(ps).to_json() if ps.params.normalized else None
    except HeunSymError as exc:
        raise http_error(exc)
    return PolysResponse(polys=ps.to_json(), identities=report.to_json(), delta_pm=pm)
