"""
HTTP routers. Library errors become HTTPException: 422 for bad or
degenerate input, 500 when the integrator gives up.
"""
from fastapi import HTTPException

from src.heunsym.errors import HeunSymError, StepFailure


def http_error(exc: HeunSymError) -> HTTPException:
    status = 500 if isinstance(exc, StepFailure) else 422
    return HTTPException(status_code=status, detail=f"{exc.tag}: {exc}")


def matrix_json(X) -> list:
    return [[[complex(x).real, complex(x).imag] for x in row] for row in X]
