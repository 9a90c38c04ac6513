"""
Josephson router: phase-side views of the same theory.

POST /josephson/monodromy  → monodromy from one period of phi (+ Heun form, Theta constants)
POST /josephson/extend     → phi and P on [-3T/2, 3T/2] from [-T/2, T/2]
"""
from fastapi import APIRouter

from src.heunsym.errors import HeunSymError
from src.heunsym.josephson import (
    CircleSolution,
    extend_phase,
    heun_unit_monodromy,
    integrate_phase,
    phase_monodromy_matrix,
    theta_phase_constants,
)
from src.heunsym.routers import http_error, matrix_json
from src.heunsym.schemas import ExtendResponse, JosephsonRequest, PhaseMonodromyResponse

router = APIRouter(prefix="/josephson", tags=["josephson"])


@router.post("/monodromy", response_model=PhaseMonodromyResponse)
def phase_monodromy(req: JosephsonRequest):
    """
    Integrate one period and read off the monodromy.

    Input: A, B, omega, phi0
    Output: M_phase; for integer B/omega also M_heun and the Theta phase constants
    """
    try:
        jp = req.to_params()
        traj = integrate_phase(jp, req.phi0, tol=req.tol, n=req.n)
        M_phase = phase_monodromy_matrix(traj)
        M_heun, constants = None, None
        if jp.integer_order:
            M_heun = matrix_json(heun_unit_monodromy(traj))
            constants = theta_phase_constants(CircleSolution.from_trajectory(traj)).to_json()
    except HeunSymError as exc:
        raise http_error(exc)
    return PhaseMonodromyResponse(params=jp.to_json(), M_phase=matrix_json(M_phase),
                                  M_heun=M_heun, constants=constants)


@router.post("/extend", response_model=ExtendResponse)
def extend(req: JosephsonRequest):
    """
    Extend a one-period trajectory by the period-shift formulas.

    Input: A, B, omega, phi0, n (grid size of the base period)
    Output: t, phi, P on 3n points of [-3T/2, 3T/2]
    """
    try:
        jp = req.to_params()
        ext = extend_phase(integrate_phase(jp, req.phi0, tol=req.tol, n=req.n))
    except HeunSymError as exc:
        raise http_error(exc)
    return ExtendResponse(params=jp.to_json(), t=ext.t_grid.tolist(), phi=ext.phi.tolist(),
                          P=ext.P.tolist(), wrap_offset=ext.wrap_offset)
