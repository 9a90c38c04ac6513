"""
Tests for the Josephson bridge.

Parameter maps and their refusals, phase integration against RK4, the
forward and inverse maps against the sDCHE eigenbasis, algebraic extension
over three periods, phase-side monodromy, Theta phase maps, degenerate
initial phases, CSV export.
"""
import dataclasses
import math

import numpy as np
import pytest

from src.heunsym.cover import ONE, CoverPoint, invert
from src.heunsym.errors import (
    BranchLoss,
    DegenerateConstants,
    DegenerateInitial,
    InvalidParams,
    NonIntegerOrder,
    NonPositiveSum,
    SecantSingular,
)
from src.heunsym.josephson import (
    CircleSolution,
    JosephsonParams,
    alpha_for,
    basis_from_phi,
    basis_from_trajectory,
    eP_from_basis,
    extend_phase,
    heun_to_params,
    heun_unit_monodromy,
    holomorphic_riccati_residual,
    integrate_phase,
    params_to_heun,
    period_constants,
    phase_monodromy_matrix,
    phi_from_basis,
    quarter_period_check,
    riccati_residual,
    theta_AB_phase,
    theta_C_holomorphic,
    theta_C_phase,
    theta_phase_constants,
    track_sqrt,
    uvw_from_phase,
)
from src.heunsym.polys import HeunParams, build_polys
from tests.conftest import REF, rk4_phase

NON_INTEGER = JosephsonParams(A=1.0, B=0.3, omega=1.1)


def complex_riccati(jp, Phi, ts, h=1e-2):
    """|Phi' - i Phi (f - sin phi)| with sin phi = (Phi - 1/Phi)/2i; valid for complex phases."""
    ts = np.asarray(ts, dtype=float)
    vals = [Phi(ts + j * h) for j in (-2, -1, 1, 2)]
    d = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
    P = Phi(ts)
    return np.abs(d - 1j * P * (jp.drive(ts) - (P - 1 / P) / 2j))


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

def test_heun_to_params_reference(ref_josephson):
    """lambda + mu^2 = 5/4 gives omega = 1/sqrt(5), A = omega, B = -omega."""
    omega = 1 / math.sqrt(5)
    assert ref_josephson.omega == pytest.approx(omega)
    assert ref_josephson.A == pytest.approx(omega)
    assert ref_josephson.B == pytest.approx(-omega)
    assert ref_josephson.integer_order


def test_params_round_trip(ref_josephson):
    """Josephson parameters map back to ell = 1, lambda = 1, mu = 1/2."""
    hp = params_to_heun(ref_josephson)
    assert hp.ell == 1
    assert complex(hp.lam_c) == pytest.approx(1.0)
    assert complex(hp.mu_c) == pytest.approx(0.5)
    assert hp.normalized


def test_non_integer_order():
    """B/omega off the negative integers has no Heun counterpart."""
    assert not NON_INTEGER.integer_order
    with pytest.raises(NonIntegerOrder):
        params_to_heun(NON_INTEGER)
    assert params_to_heun(NON_INTEGER, strict=False) is None


def test_non_positive_sum():
    """lambda + mu^2 must be real positive."""
    with pytest.raises(NonPositiveSum):
        heun_to_params(HeunParams(1, -1, 0.5))


def test_complex_mu_refused():
    """A purely imaginary mu with positive sum still has no real A."""
    with pytest.raises(InvalidParams):
        heun_to_params(HeunParams(1, 1, 0.5j))


@pytest.mark.parametrize("A, B, omega", [(0.0, 0.3, 1.0), (1.0, 0.3, 0.0), (1.0, float("nan"), 1.0)])
def test_invalid_josephson_params(A, B, omega):
    """A = 0, omega <= 0 and non-finite values are refused."""
    with pytest.raises(InvalidParams):
        JosephsonParams(A, B, omega)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("sign", [1, -1])
def test_integrate_phase_matches_rk4(ref_josephson, ref_trajectory, sign):
    """Dense output at +-T/2 agrees with fixed-step RK4."""
    t_end = sign * ref_josephson.T / 2
    phi, P = rk4_phase(ref_josephson, 0.3, t_end)
    got_phi, got_P = ref_trajectory.at(t_end)
    assert got_phi[0] == pytest.approx(phi, abs=1e-9)
    assert got_P[0] == pytest.approx(P, abs=1e-9)


def test_trajectory_span(ref_trajectory, ref_josephson):
    """Evaluation outside the span and spans without 0 are refused."""
    with pytest.raises(ValueError):
        ref_trajectory.at(ref_josephson.T)
    with pytest.raises(InvalidParams):
        integrate_phase(ref_josephson, 0.3, t_span=(1.0, 2.0))


def test_trajectory_solves_riccati(ref_josephson, ref_trajectory):
    """e^{i phi} from the trajectory satisfies the phase equation."""
    ts = np.linspace(-6.5, 6.5, 9)
    assert np.max(riccati_residual(ref_josephson, ref_trajectory.exp_iphi, ts)) < 1e-7


def test_csv_export(ref_trajectory):
    """Trajectory CSV has a header and one row per grid point."""
    lines = ref_trajectory.to_csv().strip().splitlines()
    assert lines[0] == "t,phi,P,re_exp_iphi,im_exp_iphi"
    assert len(lines) == len(ref_trajectory.t_grid) + 1
    middle = [float(x) for x in lines[1 + len(ref_trajectory.t_grid) // 2].split(",")]
    assert middle[0] == pytest.approx(0.0, abs=1e-12)
    assert middle[1] == pytest.approx(0.3)


# ---------------------------------------------------------------------------
# Forward and inverse maps
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("phi0", [-1.0, 0.3, 1.2])
def test_forward_map_reproduces_phase(ref_basis, ref_josephson, phi0):
    """Phi(e^{i omega t}) built from E+- equals e^{i phi(t)} for alpha = phi0 + pi/2."""
    traj = integrate_phase(ref_josephson, phi0)
    alpha = alpha_for(phi0)
    for t in (-5.0, -1.2, 0.0, 2.5, 6.8):
        at = CoverPoint(1.0, ref_josephson.omega * t)
        assert abs(phi_from_basis(alpha, ref_basis, at) - traj.exp_iphi(t)[0]) < 1e-7


def test_forward_map_energy(ref_basis, ref_josephson, ref_trajectory):
    """The E_P companion equals e^{P(t)}."""
    alpha = alpha_for(0.3)
    for t in (-3.0, 4.1):
        at = CoverPoint(1.0, ref_josephson.omega * t)
        assert abs(eP_from_basis(alpha, ref_basis, at) - math.exp(ref_trajectory.at(t)[1][0])) < 1e-7


def test_holomorphic_riccati(ref_basis):
    """Off the circle Phi solves the holomorphic Riccati equation."""
    for at in (CoverPoint(1.7, 0.4), CoverPoint(0.6, -2.2)):
        assert abs(holomorphic_riccati_residual(alpha_for(0.3), ref_basis, at)) < 1e-8


def test_theta_c_holomorphic(ref_basis):
    """-1/Phi(1/z) is the forward map with alpha reversed."""
    alpha = alpha_for(0.3)
    at = CoverPoint(1.3, 0.7)
    assert abs(theta_C_holomorphic(alpha, ref_basis, at) - phi_from_basis(-alpha, ref_basis, at)) < 1e-8


def test_inverse_map_recovers_eigenbasis(ref_basis):
    """E~+- rebuilt from Phi and E_P are multiples of E+- along a path."""
    alpha = alpha_for(0.3)
    path = [ONE] + [CoverPoint(1.0 + 0.4 * s, 2.5 * s) for s in np.linspace(0.005, 1.0, 200)]
    phi_here = [phi_from_basis(alpha, ref_basis, p) for p in path]
    phi_there = [phi_from_basis(alpha, ref_basis, invert(p)) for p in path]
    ep_here = [eP_from_basis(alpha, ref_basis, p) for p in path]
    ep_there = [eP_from_basis(alpha, ref_basis, invert(p)) for p in path]
    rebuilt = basis_from_phi(1, 0.5, path, phi_here, phi_there, ep_here, ep_there)
    assert rebuilt[0, 0] == pytest.approx(math.cos(0.15 + math.pi / 4))
    assert rebuilt[0, 1] == pytest.approx(math.cos(0.15 - math.pi / 4))
    for j in (50, 120, 200):
        want = ref_basis.jets(path[j])[:, 0]
        assert np.allclose(rebuilt[j] / rebuilt[0], want, rtol=1e-7, atol=1e-9)


def test_trajectory_basis_is_eigenbasis(ref_basis, ref_josephson, ref_trajectory):
    """E~+- generated by the trajectory on the circle are multiples of E+-."""
    ts = np.array([-4.0, 1.0, 5.5])
    got = basis_from_trajectory(ref_trajectory, ts)
    e0 = basis_from_trajectory(ref_trajectory, [0.0])[0]
    for row, t in zip(got, ts):
        want = ref_basis.jets(CoverPoint(1.0, ref_josephson.omega * t))[:, 0]
        assert np.allclose(row / e0, want, rtol=1e-7, atol=1e-9)


def test_degenerate_initial_phase(ref_josephson):
    """phi(0) = +-pi/2 kills one eigenfunction and the period formulas."""
    for phi0 in (math.pi / 2, -math.pi / 2):
        traj = integrate_phase(ref_josephson, phi0)
        with pytest.raises(DegenerateInitial):
            heun_unit_monodromy(traj)
        with pytest.raises(SecantSingular):
            period_constants(traj)
    with pytest.raises(DegenerateInitial):
        basis_from_phi(1, 0.5, [ONE], [1j], [1j], [1.0], [1.0])


def test_track_sqrt():
    """Square roots follow the path; a jump of more than pi/2 is refused."""
    values = np.exp(1j * np.linspace(0, 4 * math.pi, 400))
    roots = track_sqrt(values)
    assert np.allclose(roots, np.exp(0.5j * np.linspace(0, 4 * math.pi, 400)))
    with pytest.raises(BranchLoss):
        track_sqrt([1.0, -1.0])


# ---------------------------------------------------------------------------
# Extension and monodromy
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("jp", [heun_to_params(REF), NON_INTEGER], ids=["ell1", "non_integer"])
def test_extension_matches_integration(jp):
    """Algebraic extension to [-3T/2, 3T/2] agrees with direct integration."""
    T = jp.T
    base = integrate_phase(jp, 0.2)
    extended = extend_phase(base)
    direct = integrate_phase(jp, 0.2, t_span=(-1.5 * T, 1.5 * T))
    ts = np.linspace(-1.5 * T, 1.5 * T, 61)
    phi_ext, P_ext = extended.at(ts)
    phi_dir, P_dir = direct.at(ts)
    assert np.max(np.abs(phi_ext - phi_dir)) < 1e-7
    assert np.max(np.abs(P_ext - P_dir)) < 1e-7


def test_extension_wrap_offset():
    """The stitched forward increment is a whole number of turns away from the raw angle."""
    base = integrate_phase(NON_INTEGER, 0.2)
    extended = extend_phase(base)
    assert isinstance(extended.wrap_offset, int)
    assert extended.covers(-1.5 * NON_INTEGER.T, 1.5 * NON_INTEGER.T)


def test_phase_monodromy_matches_heun(ref_report, ref_trajectory):
    """The monodromy from phi(0), phi(+-T/2), P(+-T/2) equals M."""
    assert np.allclose(heun_unit_monodromy(ref_trajectory), ref_report.M, atol=1e-7)
    assert abs(np.linalg.det(phase_monodromy_matrix(ref_trajectory)) - 1) < 1e-8


def test_shifted_solution(ref_josephson, ref_trajectory):
    """CircleSolution.shifted(+-1) reads the solution one period later or earlier."""
    T = ref_josephson.T
    direct = integrate_phase(ref_josephson, 0.3, t_span=(-1.5 * T, 1.5 * T))
    sol = CircleSolution.from_trajectory(ref_trajectory)
    ts = np.array([-2.0, 0.5, 3.0])
    for direction in (1, -1):
        got = sol.shifted(direction).Phi(ts)
        assert np.allclose(got, direct.exp_iphi(ts + direction * T), atol=1e-7)


def test_quarter_period_check(ref_josephson, ref_basis, ref_trajectory):
    """Phi at t + T/2 follows from quarter-period data."""
    assert quarter_period_check(ref_josephson, ref_basis, ref_trajectory, [-2.0, 0.0, 1.5]) < 1e-7
    with pytest.raises(ValueError):
        quarter_period_check(ref_josephson, ref_basis, ref_trajectory, [ref_josephson.T / 4])


# ---------------------------------------------------------------------------
# Theta phase maps
# ---------------------------------------------------------------------------

def test_circle_solution_normalization(ref_trajectory):
    """The base solution reproduces e^{i phi} and e^P."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    ts = np.linspace(-6.0, 6.0, 7)
    phi, P = ref_trajectory.at(ts)
    assert np.allclose(sol.Phi(ts), np.exp(1j * phi), atol=1e-12)
    assert np.allclose(sol.eP(ts), np.exp(P), atol=1e-12)
    assert sol.phi0 == pytest.approx(0.3)


def test_theta_c_phase(ref_trajectory):
    """Theta_C sends phi(t) to pi - phi(-t)."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    image = theta_C_phase(sol)
    ts = np.linspace(-6.0, 6.0, 7)
    phi, _ = ref_trajectory.at(-ts)
    assert np.allclose(image.Phi(ts), np.exp(1j * (math.pi - phi)), atol=1e-10)


def test_theta_a_twice_is_identity(ref_trajectory):
    """Theta_A o Theta_A = -Delta leaves the phase unchanged."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    twice = theta_AB_phase("A", theta_AB_phase("A", sol))
    ts = np.linspace(-6.0, 6.0, 7)
    assert np.allclose(twice.Phi(ts), sol.Phi(ts), atol=1e-8)


def test_theta_b_twice_is_period_shift(ref_trajectory):
    """Theta_B o Theta_B = Delta M advances the phase by one period."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    twice = theta_AB_phase("B", theta_AB_phase("B", sol))
    ts = np.linspace(-6.0, 6.0, 7)
    assert np.allclose(twice.Phi(ts), sol.shifted(1).Phi(ts), atol=1e-8)


@pytest.mark.parametrize("which", ["A", "B", "C"])
def test_theta_images_solve_riccati(ref_josephson, ref_trajectory, which):
    """Every Theta phase image is again a solution of the phase equation."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    image = theta_C_phase(sol) if which == "C" else theta_AB_phase(which, sol)
    ts = np.linspace(-6.5, 6.5, 9)
    assert np.max(complex_riccati(ref_josephson, image.Phi, ts)) < 1e-6


def test_theta_constants_match_heun_matrices(ref_report, ref_trajectory):
    """The phase-side Theta_A matrix, conjugated to unit E+-, equals A; (V, U) is proportional to (m_A, n_A)."""
    constants = theta_phase_constants(CircleSolution.from_trajectory(ref_trajectory))
    D = np.diag(constants.e_one)
    assert np.allclose(np.linalg.inv(D) @ constants.matrix_A @ D, ref_report.A, atol=1e-7)
    assert set(constants.to_json()) >= {"m_A", "n_A", "m_B", "n_B", "matrix_A", "matrix_B",
                                        "u_plus", "u_minus", "v_plus", "v_minus", "w_plus", "w_minus",
                                        "U", "V"}

    U, V = constants.U, constants.V
    scale = abs(U) * abs(V)
    assert abs(constants.m_A * U - constants.n_A * V) < 1e-8 * max(1.0, scale)
    assert abs(constants.m_B * V - constants.n_B * U) < 1e-8 * max(1.0, scale)
    hp = params_to_heun(ref_trajectory.jp)
    eps = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    factor = 1j ** hp.ell * eps / (2 * math.sqrt(2) * hp.tw * constants.w_plus * constants.w_minus)
    assert abs(constants.m_A - factor * V) < 1e-8 * max(1.0, abs(constants.m_A))
    assert abs(constants.n_A - factor * U) < 1e-8 * max(1.0, abs(constants.n_A))


def test_uvw_from_five_scalars(ref_trajectory):
    """u, v, w, U, V follow from phi(0), phi(+-T/2) and P(+-T/2) alone."""
    constants = theta_phase_constants(CircleSolution.from_trajectory(ref_trajectory))
    hp = params_to_heun(ref_trajectory.jp)
    ps = build_polys(hp)
    T = ref_trajectory.jp.T
    phi, P = ref_trajectory.at(np.array([T / 2, -T / 2]))
    uvw = uvw_from_phase(hp.ell, ps.delta_plus, ps.delta_minus, ref_trajectory.phi0,
                         (phi[0], phi[1]), (P[0], P[1]))
    for key in ("u_plus", "u_minus", "v_plus", "v_minus", "w_plus", "w_minus", "U", "V"):
        assert abs(uvw[key] - getattr(constants, key)) < 1e-10 * max(1.0, abs(uvw[key]))
    assert constants.w_plus == pytest.approx(math.cos(0.15) + math.sin(0.15))
    assert constants.w_minus == pytest.approx(math.cos(0.15) - math.sin(0.15))
    assert abs(constants.u_plus * constants.u_minus - 2 * math.cos(phi[0])) < 1e-9


def test_v_halves_agree(ref_trajectory):
    """The T/2 and -T/2 halves of V coincide on a real solution."""
    constants = theta_phase_constants(CircleSolution.from_trajectory(ref_trajectory))
    assert constants.v_defect < 1e-8 * max(1.0, abs(constants.V))


@pytest.mark.parametrize("which", ["A", "B"])
def test_closed_form_phase_map_matches_matrix_route(ref_trajectory, which):
    """The (U, V) image and the (m, n) image are the same phase."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    ts = np.linspace(-6.0, 6.0, 7)
    closed = theta_AB_phase(which, sol, closed_form=True)
    assert np.allclose(closed.Phi(ts), theta_AB_phase(which, sol).Phi(ts), atol=1e-8)


@pytest.mark.parametrize("which", ["A", "B"])
def test_closed_form_degenerate_denominator(ref_trajectory, which):
    """V = U (sin phi(0) + i cos phi(0)) zeroes U^2 + V^2 - 2UV sin phi(0) and is refused."""
    sol = CircleSolution.from_trajectory(ref_trajectory)
    constants = theta_phase_constants(sol)
    phi0 = ref_trajectory.phi0
    bad = dataclasses.replace(constants, V=constants.U * complex(math.sin(phi0), math.cos(phi0)))
    with pytest.raises(DegenerateConstants):
        theta_AB_phase(which, sol, bad, closed_form=True)


def test_theta_ab_phase_rejects_c(ref_trajectory):
    """theta_AB_phase handles A and B only."""
    with pytest.raises(ValueError):
        theta_AB_phase("C", CircleSolution.from_trajectory(ref_trajectory))


def test_theta_phase_needs_integer_order():
    """Non-integer order has no Theta_A / Theta_B phase maps."""
    sol = CircleSolution.from_trajectory(integrate_phase(NON_INTEGER, 0.2))
    with pytest.raises(NonIntegerOrder):
        theta_phase_constants(sol)
