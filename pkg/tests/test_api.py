"""
Tests for the HTTP service.

Covers:
- GET /health
- POST /polys (exact string parameters, degenerate input → 422)
- POST /monodromy, POST /laurent
- POST /josephson/monodromy (integer and non-integer order), /josephson/extend
"""
from tests.conftest import REF, heun_json


async def test_health(client):
    """The health endpoint reports the version."""
    resp = await client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


async def test_polys_exact(client):
    """Exact parameters give zero identity residuals and Delta_pm."""
    resp = await client.post("/polys", json=heun_json(REF))
    assert resp.status_code == 200
    data = resp.json()
    assert data["polys"]["ell"] == 1
    assert data["identities"]["passed"] is True
    assert data["delta_pm"]["exponent"] == 2


async def test_polys_fraction_strings(client):
    """Strings such as 3/5 are parsed exactly."""
    resp = await client.post("/polys", json={"ell": 2, "lam": "3/5", "mu": "-1/3"})
    assert resp.status_code == 200
    assert resp.json()["identities"]["exact"] is True


async def test_polys_degenerate(client):
    """lambda + mu^2 = 0 is a 422 carrying the error tag."""
    resp = await client.post("/polys", json={"ell": 1, "lam": "-1/4", "mu": "1/2"})
    assert resp.status_code == 422
    assert resp.json()["detail"].startswith("degenerate-params:")


async def test_polys_invalid_ell(client):
    """ell = 0 is refused."""
    resp = await client.post("/polys", json={"ell": 0, "lam": 1, "mu": 0.5})
    assert resp.status_code == 422


async def test_polys_non_normalized(client):
    """An explicit two_omega away from the normalized value omits Delta_pm."""
    resp = await client.post("/polys", json={"ell": 1, "lam": 1, "mu": 0.5, "two_omega": 3.0})
    assert resp.status_code == 200
    assert resp.json()["delta_pm"] is None


async def test_monodromy(client):
    """Matrices come back as 2x2 arrays of [re, im] with det M = 1."""
    resp = await client.post("/monodromy", json=heun_json(REF))
    assert resp.status_code == 200
    data = resp.json()
    assert len(data["M"]) == 2 and len(data["M"][1]) == 2
    assert data["det_M_error"] < 1e-10
    assert data["passed"] is True


async def test_monodromy_not_normalized(client):
    """Matrix representations need the normalized 2 omega."""
    resp = await client.post("/monodromy", json={"ell": 1, "lam": 1, "mu": 0.5, "two_omega": 3.0})
    assert resp.status_code == 422


async def test_laurent(client):
    """Both series are returned with 2N + 1 coefficients."""
    resp = await client.post("/laurent", json={**heun_json(REF), "N": 64})
    assert resp.status_code == 200
    data = resp.json()
    for side in ("plus", "minus"):
        assert len(data[side]["coeffs"]) == 2 * data[side]["N"] + 1
    assert "Lambda_plus" in data["eigen"]


async def test_josephson_monodromy_integer_order(client):
    """Integer B/omega adds the Heun-side matrix and the Theta phase constants."""
    omega = 1 / 5 ** 0.5
    resp = await client.post("/josephson/monodromy", json={"A": omega, "B": -omega, "omega": omega, "phi0": 0.3})
    assert resp.status_code == 200
    data = resp.json()
    assert data["params"]["integer_order"] is True
    assert data["M_heun"] is not None
    assert {"m_B", "u_plus", "v_minus", "w_plus", "U", "V"} <= set(data["constants"])


async def test_josephson_monodromy_non_integer(client):
    """Non-integer order returns the phase matrix only."""
    resp = await client.post("/josephson/monodromy", json={"A": 1.0, "B": 0.3, "omega": 1.1})
    assert resp.status_code == 200
    data = resp.json()
    assert data["M_heun"] is None
    assert data["constants"] is None
    assert len(data["M_phase"]) == 2


async def test_josephson_extend(client):
    """Extension returns 3n samples over three periods."""
    resp = await client.post("/josephson/extend", json={"A": 1.0, "B": 0.3, "omega": 1.1, "phi0": 0.2, "n": 51})
    assert resp.status_code == 200
    data = resp.json()
    assert len(data["t"]) == len(data["phi"]) == len(data["P"]) == 153
    assert isinstance(data["wrap_offset"], int)


async def test_josephson_secant_singular(client):
    """phi0 = pi/2 makes the period formulas singular."""
    resp = await client.post("/josephson/monodromy", json={"A": 1.0, "B": 0.3, "omega": 1.1, "phi0": 1.5707963267948966})
    assert resp.status_code == 422
    assert resp.json()["detail"].startswith("secant-singular:")


async def test_josephson_bad_omega(client):
    """omega must be positive."""
    resp = await client.post("/josephson/extend", json={"A": 1.0, "B": 0.3, "omega": -1.0})
    assert resp.status_code == 422
