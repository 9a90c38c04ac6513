"""
heunsym command line.

Usage:
  heunsym polys      --ell 1 --lambda 1 --mu 1/2
  heunsym verify     [--skip continuation,laurent] [--delta-sign -1]
  heunsym monodromy  --ell 1 --lambda 1 --mu 0.5
  heunsym continue   --points 10 --format csv
  heunsym laurent    --N 128
  heunsym josephson  --A 1 --B 0.3 --omega 1.1 --phi0 0.2 --extend

Parameters come either as a Heun group (--ell/--lambda/--mu/--two-omega) or
as a Josephson group (--A/--B/--omega); mixing the two is a usage error.
With --out DIR every artifact is written to DIR; otherwise the primary
artifact goes to stdout.

Exit codes: 0 success, 1 verification failure, 2 usage, 3 module error,
4 integrator failure. Failures print one line on stderr:
`heunsym-error <tag>: <message>`.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from src.heunsym import __version__
from src.heunsym.config import BUDGET, LOG_DATEFMT, LOG_FORMAT, LOG_LEVEL, SEED, THREADS, TOL
from src.heunsym.cover import CoverPoint
from src.heunsym.errors import HeunSymError, InvalidParams, NoDecay, NonPositiveSum
from src.heunsym.josephson import (
    CircleSolution,
    JosephsonParams,
    alpha_for,
    extend_phase,
    heun_to_params,
    heun_unit_monodromy,
    integrate_phase,
    params_to_heun,
    phase_monodromy_matrix,
    phi_from_basis,
    theta_AB_phase,
    theta_C_phase,
    theta_phase_constants,
)
from src.heunsym.laurent import (
    build_series,
    eigen_anchor,
    eval_series,
    laurent_pair,
    recurrence_residuals,
    series_exponent,
    single_valuedness_residual,
)
from src.heunsym.monodromy import continue_anywhere, monodromy_report
from src.heunsym.polys import (
    HeunParams,
    build_polys,
    cpair,
    delta_constancy_check,
    delta_pm,
    parse_number,
    verify_poly_system,
)
from src.heunsym.routers import matrix_json
from src.heunsym.solver import (
    EigenBasis,
    ThetaImage,
    eigen_residual,
    eigenbasis,
    polylocal_residual,
    random_points,
    random_solutions,
    sdche_residual,
    verify_compositions,
    wronskian,
)

log = logging.getLogger("heunsym")

SECTIONS = ("polys", "delta_pm", "solver", "compositions", "monodromy", "continuation", "laurent",
            "josephson", "theta_phase")
DEFAULT_HEUN = ("1", "1", "1/2")


class HeunSymParser(argparse.ArgumentParser):
    """argparse with the machine-readable error line and exit code 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"heunsym-error usage: {message}", file=sys.stderr)
        sys.exit(2)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    heun: Optional[HeunParams] = None
    josephson: Optional[JosephsonParams] = None
    phi0: float = 0.0
    alpha: Optional[float] = None
    tol: float = TOL
    budget: float = BUDGET
    seed: int = SEED
    out: Optional[Path] = None
    fmt: str = "json"
    skip: List[str] = field(default_factory=list)
    delta_sign: int = 1
    N: Optional[int] = None
    points: int = 10
    extend: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        heun_given = any(getattr(args, k) is not None for k in ("ell", "lam", "mu", "two_omega"))
        jos_given = any(getattr(args, k) is not None for k in ("A", "B", "omega"))
        if heun_given and jos_given:
            raise InvalidParams("Heun parameters (--ell/--lambda/--mu) and Josephson parameters "
                                "(--A/--B/--omega) are mutually exclusive")
        heun, jos = None, None
        if jos_given:
            if None in (args.A, args.B, args.omega):
                raise InvalidParams("--A, --B and --omega must be given together")
            jos = JosephsonParams(args.A, args.B, args.omega)
            if jos.integer_order:
                heun = params_to_heun(jos)
        else:
            ell = 1 if args.ell is None else args.ell
            lam = parse_number(args.lam if args.lam is not None else DEFAULT_HEUN[1])
            mu = parse_number(args.mu if args.mu is not None else DEFAULT_HEUN[2])
            two_omega = None if args.two_omega is None else complex(parse_number(args.two_omega))
            heun = HeunParams(ell, lam, mu, two_omega)

        skip = [s for s in (getattr(args, "skip", None) or "").split(",") if s]
        unknown = set(skip) - set(SECTIONS)
        if unknown:
            raise InvalidParams(f"unknown --skip sections {sorted(unknown)}; choose from {list(SECTIONS)}")
        if args.delta_sign not in (1, -1):
            raise InvalidParams("--delta-sign must be 1 or -1")
        return cls(
            command=args.command, heun=heun, josephson=jos, phi0=args.phi0, alpha=args.alpha,
            tol=args.tol, budget=args.budget, seed=args.seed,
            out=Path(args.out) if args.out else None, fmt=args.format, skip=skip,
            delta_sign=args.delta_sign, N=args.N, points=args.points, extend=args.extend,
        )

    def require_heun(self) -> HeunParams:
        if self.heun is None:
            raise InvalidParams(f"`{self.command}` needs integer order: B/omega must be a negative integer")
        return self.heun


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _json_default(x):
    if isinstance(x, (complex, np.complexfloating)):
        return cpair(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json_text(payload) -> str:
    return json.dumps(payload, indent=2, default=_json_default) + "\n"


def csv_text(header: List[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def emit(cfg: RunConfig, artifacts: Dict[str, str]):
    """Write artifacts to --out, or print the one matching --format to stdout."""
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        for name, text in artifacts.items():
            (cfg.out / name).write_text(text)
            log.info(f"Wrote {cfg.out / name}")
        return
    wanted = [name for name in artifacts if name.endswith("." + cfg.fmt)]
    if not wanted:
        raise InvalidParams(f"`{cfg.command}` has no {cfg.fmt} output")
    sys.stdout.write(artifacts[wanted[0]])


def parallel_map(fn: Callable, items) -> list:
    """Evaluate independent samples on a thread pool; results keep input order."""
    items = list(items)
    with ThreadPoolExecutor(max_workers=max(1, min(THREADS, len(items) or 1))) as pool:
        return list(pool.map(fn, items))


def sheet_points(n: int, rng: np.random.Generator, sheets=range(-2, 3)) -> List[CoverPoint]:
    """n random points spread round-robin over the given sheets."""
    sheets = list(sheets)
    out = []
    for j in range(n):
        k = sheets[j % len(sheets)]
        out.extend(random_points(1, rng, phi_span=(2 * math.pi * k - math.pi, 2 * math.pi * k + math.pi)))
    return out


# ---------------------------------------------------------------------------
# Checks shared by verify and the artifact commands
# ---------------------------------------------------------------------------

def continuation_rows(basis: EigenBasis, points: List[CoverPoint], report=None) -> list:
    report = monodromy_report(basis, with_loop=False) if report is None else report

    def row(p):
        alg = continue_anywhere(basis, p, report.boundary, basis.polys, report.M)
        ode = basis.jets(p)[:, 0]
        diff = float(np.max(np.abs(alg - ode)))
        return [p.rho, p.phi, alg[0].real, alg[0].imag, alg[1].real, alg[1].imag,
                ode[0].real, ode[0].imag, ode[1].real, ode[1].imag, diff]

    return parallel_map(row, points)


CONTINUATION_COLUMNS = ["rho", "phi", "re_alg_Ep", "im_alg_Ep", "re_alg_Em", "im_alg_Em",
                        "re_ode_Ep", "im_ode_Ep", "re_ode_Em", "im_ode_Em", "abs_diff"]


def laurent_checks(basis: EigenBasis, pair, rng: np.random.Generator) -> Dict[str, float]:
    """Series against integrated values at |z| in {0.5, 1, 2}, single-valuedness, recurrence."""
    out: Dict[str, float] = {}
    for sign, name in ((1, "plus"), (-1, "minus")):
        ls = pair.solution(sign)
        combo = pair.eigen.combo(sign)
        worst = 0.0
        for rho in (0.5, 1.0, 2.0):
            p = CoverPoint(rho, float(rng.uniform(-math.pi, math.pi)))
            ode = complex(combo @ basis.jets(p)[:, 0])
            worst = max(worst, abs(eval_series(ls, p) - ode) / max(abs(ode), 1e-300))
        out[f"series_vs_ode_{name}"] = worst
        out[f"single_valued_{name}"] = single_valuedness_residual(basis, pair.eigen, sign, CoverPoint(1.3, 0.4))
        out[f"recurrence_{name}"] = recurrence_residuals(ls)
    return out


def formal_series_control(basis: EigenBasis, pair) -> bool:
    """True when an exponent shifted by 0.1 is refused as a formal series."""
    gamma = series_exponent(pair.eigen, 1) + 0.1
    try:
        build_series(basis.params, gamma, eigen_anchor(basis, pair.eigen, 1))
    except NoDecay:
        return True
    return False


def forward_map_residual(basis: EigenBasis, jp: JosephsonParams, phi0: float,
                         alpha: Optional[float], tol: float, n: int = 21) -> float:
    """max |Phi(1, omega t) - e^{i phi(t)}| over t in (-T/2, T/2)."""
    traj = integrate_phase(jp, phi0, tol=tol)
    alpha = alpha_for(phi0) if alpha is None else alpha
    ts = np.linspace(-jp.T / 2, jp.T / 2, n + 2)[1:-1]
    values = parallel_map(lambda t: phi_from_basis(alpha, basis, CoverPoint(1.0, jp.omega * t)), ts)
    return float(np.max(np.abs(np.array(values) - traj.exp_iphi(ts))))


def extension_rows(jp: JosephsonParams, phi0: float, tol: float, n: int = 601):
    """Extended trajectory vs direct integration on [-3T/2, 3T/2]."""
    T = jp.T
    base = integrate_phase(jp, phi0, tol=tol)
    ext = extend_phase(base, n=n)
    direct = integrate_phase(jp, phi0, (-1.5 * T, 1.5 * T), tol=tol)
    phi_ode, _ = direct.at(ext.t_grid)
    diff = np.abs(ext.phi - phi_ode)
    rows = [[t, a, b, d] for t, a, b, d in zip(ext.t_grid, ext.phi, phi_ode, diff)]
    return ext, rows, float(np.max(diff))


def theta_phase_residuals(jp: JosephsonParams, phi0: float, tol: float, n: int = 9) -> Dict[str, float]:
    """Theta_C/A/B phase maps: involution, square root of the monodromy, closed form vs matrix route."""
    traj = integrate_phase(jp, phi0, tol=tol)
    sol = CircleSolution.from_trajectory(traj)
    ts = np.linspace(-0.4 * jp.T, 0.4 * jp.T, n)
    constants = theta_phase_constants(sol)

    def gap(x, y):
        return float(np.max(np.abs(x.Phi(ts) - y.Phi(ts))))

    phi_mirror, _ = traj.at(-ts)
    return {
        "theta_C": float(np.max(np.abs(theta_C_phase(sol).Phi(ts) - np.exp(1j * (math.pi - phi_mirror))))),
        "theta_A_twice": gap(theta_AB_phase("A", theta_AB_phase("A", sol)), sol),
        "theta_B_twice": gap(theta_AB_phase("B", theta_AB_phase("B", sol)), sol.shifted(1)),
        "closed_form_A": gap(theta_AB_phase("A", sol, constants, closed_form=True),
                             theta_AB_phase("A", sol, constants)),
        "closed_form_B": gap(theta_AB_phase("B", sol, constants, closed_form=True),
                             theta_AB_phase("B", sol, constants)),
        "v_halves": constants.v_defect / max(1.0, abs(constants.V)),
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_polys(cfg: RunConfig) -> int:
    ps = build_polys(cfg.require_heun())
    report = verify_poly_system(ps)
    payload = {"polys": ps.to_json(), "identities": report.to_json()}
    if ps.params.normalized:
        payload["delta_pm"] = delta_pm(ps).to_json()
    emit(cfg, {"polys.json": to_json_text(payload)})
    failures = report.failures(cfg.budget)
    if failures:
        log.warning(f"Polynomial identities failed: {failures}")
        return 1
    return 0


def _section(residuals: Dict[str, float], budget: float, **extra) -> dict:
    worst = max(residuals.values()) if residuals else 0.0
    failed = sorted(k for k, v in residuals.items() if not v <= budget)
    return {"status": "failed" if failed else "passed", "max": worst,
            "failures": failed, "residuals": residuals, **extra}


def cmd_verify(cfg: RunConfig) -> int:
    """Run every identity family and report pass/fail per section."""
    params = cfg.require_heun()
    rng = np.random.default_rng(cfg.seed)
    sections: Dict[str, dict] = {}

    def skipped(name: str) -> bool:
        if name in cfg.skip:
            sections[name] = {"status": "skipped"}
            return True
        return False

    ps = build_polys(params)
    if not skipped("polys"):
        report = verify_poly_system(ps)
        res = dict(report.residuals)
        res["delta_constancy"] = delta_constancy_check(ps, [p.project() for p in random_points(5, rng)])
        sections["polys"] = _section(res, cfg.budget, degrees_ok=report.degrees_ok)
        if not report.degrees_ok:
            sections["polys"]["status"] = "failed"

    basis = eigenbasis(params, cfg.tol, ps)
    mono = None
    if not skipped("delta_pm"):
        if not params.normalized:
            sections["delta_pm"] = {"status": "skipped", "reason": "two_omega is not the normalized choice"}
        else:
            pm = delta_pm(ps)
            mono = monodromy_report(basis, with_loop=False)
            res = {
                "product_relation": min(pm.residual_plus2, pm.residual_minus2) / max(1.0, abs(pm.product)),
                "det_A": abs(np.linalg.det(mono.A) - ps.delta_c) / max(1.0, abs(ps.delta_c)),
            }
            sections["delta_pm"] = _section(res, cfg.budget, exponent=pm.exponent)

    if not skipped("solver"):
        points = random_points(10, rng)
        res = {
            "eigen": max(parallel_map(lambda p: eigen_residual(basis, p), points)),
            "polylocal": max(parallel_map(lambda p: polylocal_residual(basis, p), points)),
        }
        w = [wronskian(basis.plus, basis.minus, p) for p in points[:5]]
        res["wronskian_constancy"] = float(max(abs(x - w[0]) for x in w))
        images = [ThetaImage(which, s) for s in random_solutions(basis, 3, rng) for which in "ABC"]
        res["theta_images_solve"] = max(
            abs(sdche_residual(params, img, p)) / max(1.0, abs(img.value(p)))
            for img in images for p in random_points(5, rng)
        )
        sections["solver"] = _section(res, cfg.budget)

    if not skipped("compositions"):
        comp = verify_compositions(basis, seed=cfg.seed, delta_sign=cfg.delta_sign, budget=cfg.budget)
        sections["compositions"] = _section(comp.residuals, cfg.budget, flags=comp.flags,
                                            delta_sign=cfg.delta_sign)

    if not skipped("monodromy"):
        mono = monodromy_report(basis)
        sections["monodromy"] = _section(mono.residuals(), cfg.budget, generic=mono.generic)

    if not skipped("continuation"):
        mono = monodromy_report(basis, with_loop=False) if mono is None else mono
        rows = continuation_rows(basis, sheet_points(10, rng), mono)
        sections["continuation"] = _section({"max_abs_diff": max(r[-1] for r in rows)}, 10 * cfg.budget)

    if not skipped("laurent"):
        mono = monodromy_report(basis, with_loop=False) if mono is None else mono
        pair = laurent_pair(basis, mono.M, mono.boundary, cfg.N)
        res = laurent_checks(basis, pair, rng)
        res["formal_control"] = 0.0 if formal_series_control(basis, pair) else 1.0
        res["Lambda_product"] = abs(pair.eigen.Lambda_plus * pair.eigen.Lambda_minus - 1)
        sections["laurent"] = _section(res, cfg.budget)

    jp, reason = None, None
    try:
        if not params.normalized:
            raise NonPositiveSum("two_omega is not the normalized choice")
        jp = heun_to_params(params)
    except (NonPositiveSum, InvalidParams) as exc:
        reason = str(exc)

    if not skipped("josephson"):
        if jp is None:
            sections["josephson"] = {"status": "skipped", "reason": reason}
        else:
            res = {"forward_map": forward_map_residual(basis, jp, cfg.phi0, cfg.alpha, cfg.tol)}
            traj = integrate_phase(jp, cfg.phi0, tol=cfg.tol)
            mono = monodromy_report(basis, with_loop=False) if mono is None else mono
            res["phase_monodromy"] = float(np.max(np.abs(heun_unit_monodromy(traj) - mono.M)))
            res["extension"] = extension_rows(jp, cfg.phi0, cfg.tol)[2]
            sections["josephson"] = _section(res, 10 * cfg.budget, params=jp.to_json())

    if not skipped("theta_phase"):
        if jp is None:
            sections["theta_phase"] = {"status": "skipped", "reason": reason}
        else:
            res = theta_phase_residuals(jp, cfg.phi0, cfg.tol)
            sections["theta_phase"] = _section(res, 10 * cfg.budget)

    passed = all(s["status"] != "failed" for s in sections.values())
    payload = {"version": __version__, "params": params.to_json(), "budget": cfg.budget,
               "seed": cfg.seed, "passed": passed, "sections": sections}
    emit(cfg, {"verify.json": to_json_text(payload)})
    if not passed:
        failed = [k for k, s in sections.items() if s["status"] == "failed"]
        print(f"heunsym-error verification-failed: sections {failed}", file=sys.stderr)
        return 1
    return 0


def cmd_monodromy(cfg: RunConfig) -> int:
    basis = eigenbasis(cfg.require_heun(), cfg.tol)
    report = monodromy_report(basis)
    emit(cfg, {"monodromy.json": to_json_text(report.to_json(cfg.budget))})
    return 0


def cmd_continue(cfg: RunConfig) -> int:
    basis = eigenbasis(cfg.require_heun(), cfg.tol)
    rng = np.random.default_rng(cfg.seed)
    rows = continuation_rows(basis, sheet_points(cfg.points, rng))
    payload = {
        "params": basis.params.to_json(),
        "max_abs_diff": max(r[-1] for r in rows),
        "points": [dict(zip(CONTINUATION_COLUMNS, r)) for r in rows],
    }
    emit(cfg, {"continue.json": to_json_text(payload), "continue.csv": csv_text(CONTINUATION_COLUMNS, rows)})
    return 0


def cmd_laurent(cfg: RunConfig) -> int:
    basis = eigenbasis(cfg.require_heun(), cfg.tol)
    report = monodromy_report(basis, with_loop=False)
    pair = laurent_pair(basis, report.M, report.boundary, cfg.N)
    payload = pair.to_json()
    payload["checks"] = laurent_checks(basis, pair, np.random.default_rng(cfg.seed))
    payload["tail_ratio"] = {"plus": pair.plus.tail_ratio(), "minus": pair.minus.tail_ratio()}
    emit(cfg, {"laurent.json": to_json_text(payload)})
    return 0


def cmd_josephson(cfg: RunConfig) -> int:
    jp = cfg.josephson if cfg.josephson is not None else heun_to_params(cfg.require_heun())
    traj = integrate_phase(jp, cfg.phi0, tol=cfg.tol)
    payload = {"params": jp.to_json(), "phi0": cfg.phi0, "M_phase": matrix_json(phase_monodromy_matrix(traj))}
    hp = params_to_heun(jp, strict=False)
    if hp is not None:
        basis = eigenbasis(hp, cfg.tol)
        heun_M = monodromy_report(basis, with_loop=False).M
        phase_M = heun_unit_monodromy(traj)
        payload["M_heun"] = matrix_json(heun_M)
        payload["M_phase_unit"] = matrix_json(phase_M)
        payload["monodromy_agreement"] = float(np.max(np.abs(phase_M - heun_M)))
        payload["forward_map_residual"] = forward_map_residual(basis, jp, cfg.phi0, cfg.alpha, cfg.tol)
        payload["theta_constants"] = theta_phase_constants(CircleSolution.from_trajectory(traj)).to_json()

    artifacts = {}
    if cfg.extend:
        ext, rows, worst = extension_rows(jp, cfg.phi0, cfg.tol)
        payload["extension_max_diff"] = worst
        payload["wrap_offset"] = ext.wrap_offset
        artifacts["josephson_extended.csv"] = ext.to_csv()
        artifacts["josephson_extension_diff.csv"] = csv_text(["t", "phi_ext", "phi_ode", "abs_diff"], rows)
    artifacts = {"josephson.json": to_json_text(payload), "josephson_trajectory.csv": traj.to_csv(), **artifacts}
    emit(cfg, artifacts)
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "polys": cmd_polys,
    "verify": cmd_verify,
    "monodromy": cmd_monodromy,
    "continue": cmd_continue,
    "laurent": cmd_laurent,
    "josephson": cmd_josephson,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    heun = common.add_argument_group("Heun parameters (default ell=1, lambda=1, mu=1/2)")
    heun.add_argument("--ell", type=int, default=None, help="order l = -ell, ell >= 1")
    heun.add_argument("--lambda", dest="lam", default=None, help="lambda; exact forms like 1/3 or 1+1/2j accepted")
    heun.add_argument("--mu", default=None, help="mu, nonzero")
    heun.add_argument("--two-omega", dest="two_omega", default=None, help="2 omega (default: normalized)")
    jos = common.add_argument_group("Josephson parameters")
    jos.add_argument("--A", type=float, default=None)
    jos.add_argument("--B", type=float, default=None)
    jos.add_argument("--omega", type=float, default=None)
    jos.add_argument("--phi0", type=float, default=0.0, help="phi(0) (default: 0)")
    jos.add_argument("--alpha", type=float, default=None, help="forward-map angle (default: phi0 + pi/2)")
    run = common.add_argument_group("run")
    run.add_argument("--tol", type=float, default=TOL, help=f"integrator tolerance (default: {TOL})")
    run.add_argument("--budget", type=float, default=BUDGET, help=f"residual budget (default: {BUDGET})")
    run.add_argument("--seed", type=int, default=SEED, help=f"sample seed (default: {SEED})")
    run.add_argument("--out", default=None, help="directory for all artifacts (default: primary to stdout)")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--points", type=int, default=10, help="sample points for `continue`")
    run.add_argument("--skip", default=None, help=f"comma-separated sections of `verify`: {','.join(SECTIONS)}")
    run.add_argument("--delta-sign", dest="delta_sign", type=int, default=1,
                     help="-1 flips Delta in the composition rules (negative control)")
    run.add_argument("--N", type=int, default=None, help="starting truncation for `laurent`")
    run.add_argument("--extend", action="store_true", help="`josephson`: also extend to [-3T/2, 3T/2]")
    run.add_argument("--verbose", "-v", action="store_true", help="log at INFO level")

    parser = HeunSymParser(prog="heunsym", description="Symmetry toolkit for the special double confluent Heun equation.")
    parser.add_argument("--version", action="version", version=f"heunsym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=HeunSymParser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().splitlines()[0])
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else getattr(logging, LOG_LEVEL.upper(), logging.WARNING),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
        stream=sys.stderr,
    )
    try:
        try:
            cfg = RunConfig.from_args(args)
        except ValueError as exc:
            print(f"heunsym-error usage: {exc}", file=sys.stderr)
            return 2
        return COMMANDS[cfg.command](cfg)
    except HeunSymError as exc:
        log.debug(f"{type(exc).__name__} in `{args.command}`", exc_info=True)
        print(f"heunsym-error {exc.tag}: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
