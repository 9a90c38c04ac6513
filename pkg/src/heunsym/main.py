"""
heunsym HTTP service: the symmetry toolkit behind a FastAPI app.

Scripting clients post parameters and get back polynomials, matrices,
series coefficients and phase trajectories as JSON.
"""
from fastapi import FastAPI

from src.heunsym import __version__
from src.heunsym.routers import josephson, monodromy, polys

app = FastAPI(
    title="heunsym",
    description="Symmetries, monodromy and Laurent solutions of the special double confluent Heun equation.",
    version=__version__,
)

app.include_router(polys.router)
app.include_router(monodromy.router)
app.include_router(josephson.router)


@app.get("/health")
def health():
    """Liveness check."""
    return {"status": "ok", "version": __version__}
