"""
Batch front end: algebra self-tests, squaring checks, solution-family
residual suites and the radial ODE.

Every command prints one JSON object per report entry on stdout, followed by
a summary object. Logs go to stderr. Exit codes: 0 when every entry passes,
1 on a residual failure, 2 on usage or configuration errors.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, TextIO

from config import get_log_level, get_thread_count, get_tolerance
from errors import ConstraintViolation, ContractViolation, UnknownFamily
from family_factory import SolutionFamilyFactory, parse_params
from geometry import GEOMETRY_TOL
from multivector import Signature
from radial import RadialParams
from reports import Report, ReportEntry, ReportSummary
from spinors import BILINEAR, HERMITIAN, KINDS
from suites import algebra_checks, ode_entries, run_suite, squares_checks

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinform", description="Verify spinor squares and supergravity solutions.")
    sub = parser.add_subparsers(dest="command", required=True)

    algebra = sub.add_parser("algebra", help="Invariant suite of the exterior algebra for one signature")
    algebra.add_argument("--p", type=int, required=True)
    algebra.add_argument("--q", type=int, required=True)
    algebra.add_argument("--samples", type=int, default=100)
    algebra.add_argument("--seed", type=int, default=0)
    algebra.add_argument("--tol", type=float, default=None, help="Relative tolerance (default: SPINFORM_TOL)")

    squares = sub.add_parser("squares", help="Representation, pairing and squaring checks for one signature")
    squares.add_argument("--p", type=int, required=True)
    squares.add_argument("--q", type=int, required=True)
    squares.add_argument("--ell", type=int, choices=(1, -1), default=None, help="Branch label for odd dimension")
    squares.add_argument("--s", type=int, choices=(1, -1), default=1, help="Adjoint type of the pairings")
    squares.add_argument("--kind", choices=KINDS + ("both",), default="both")
    squares.add_argument("--samples", type=int, default=100)
    squares.add_argument("--seed", type=int, default=0)
    squares.add_argument("--tol", type=float, default=None)

    verify = sub.add_parser("verify", help="Residual suite of a named solution family")
    verify.add_argument("--family", required=True)
    verify.add_argument("--params", default=None, help="k=v,k=v or a JSON/TOML parameter file")
    verify.add_argument("--points", type=int, default=100)
    verify.add_argument("--tol", type=float, default=GEOMETRY_TOL)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--perturb", default=None, help="Deformation such as H=0.1")

    ode = sub.add_parser("ode", help="Integrate the radial reduction of the six-dimensional system")
    ode.add_argument("--lambda", dest="lam", type=float, required=True)
    ode.add_argument("--e", type=float, required=True)
    ode.add_argument("--c", type=float, default=1.0)
    ode.add_argument("--m1", type=float, default=0.0)
    ode.add_argument("--m2", type=float, default=0.0)
    ode.add_argument("--rho-star", dest="rho_star", type=float, default=-1.0)
    ode.add_argument("--F0", dest="F0", type=float, default=None, help="Initial dilaton (default: closed form)")
    ode.add_argument("--r0", type=float, default=None)
    ode.add_argument("--r1", type=float, default=None)
    ode.add_argument("--step", type=float, default=1e-3)
    ode.add_argument("--out", default=None, help="Trajectory JSON output path")
    return parser


def emit(report: Report, stream: TextIO) -> None:
    for entry in report.entries:
        stream.write(json.dumps(entry.model_dump(), sort_keys=True) + "\n")
    summary = {"summary": report.summary.model_dump(), "artifacts": report.artifacts}
    stream.write(json.dumps(summary, sort_keys=True) + "\n")


def make_report(command: str, seed: int, entries: List[ReportEntry], artifacts: Optional[Dict[str, Any]] = None) -> Report:
    return Report(entries=entries, summary=ReportSummary.of(command, seed, entries), artifacts=artifacts or {})


def _run(checks, seed: int, params: Dict[str, Any]) -> List[ReportEntry]:
    threads = get_thread_count()
    if threads == 1:
        return run_suite(checks, seed, params)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return run_suite(checks, seed, params, executor=pool)


def cmd_algebra(args: argparse.Namespace) -> Report:
    sig = Signature(args.p, args.q)
    tol = get_tolerance() if args.tol is None else args.tol
    checks = algebra_checks(sig, args.samples, tol)
    entries = _run(checks, args.seed, {"p": args.p, "q": args.q, "samples": args.samples})
    return make_report("algebra", args.seed, entries)


def cmd_squares(args: argparse.Namespace) -> Report:
    sig = Signature(args.p, args.q)
    if args.ell is not None and not sig.is_odd:
        raise ContractViolation(f"--ell only applies to odd dimension, got {sig}")
    tol = get_tolerance() if args.tol is None else args.tol
    kinds = (HERMITIAN, BILINEAR) if args.kind == "both" else (args.kind,)
    checks = squares_checks(sig, kinds, args.samples, tol, ell=args.ell, s=args.s)
    params = {"p": args.p, "q": args.q, "ell": args.ell, "s": args.s, "kind": args.kind, "samples": args.samples}
    return make_report("squares", args.seed, _run(checks, args.seed, params))


def cmd_verify(args: argparse.Namespace, factory: Optional[SolutionFamilyFactory] = None) -> Report:
    factory = factory or SolutionFamilyFactory()
    params = parse_params(args.params)
    perturb = {k: float(v) for k, v in parse_params(args.perturb).items()}
    checks = factory.build_checks(args.family, params, args.points, args.tol, perturb)
    return make_report("verify", args.seed, _run(checks, args.seed, {}))


def cmd_ode(args: argparse.Namespace) -> Report:
    params = RadialParams(lam=args.lam, e=args.e, c=args.c, m1=args.m1, m2=args.m2, rho_star=args.rho_star)
    entries, trajectory = ode_entries(params, args.r0, args.r1, args.step, args.F0)
    artifacts: Dict[str, Any] = {"trajectory_points": len(trajectory.r)}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([state.model_dump() for state in trajectory.records()], fh, indent=2)
        artifacts["trajectory"] = args.out
        logger.info(f"Trajectory written to {args.out}")
    return make_report("ode", 0, entries, artifacts)


COMMANDS = {
    "algebra": cmd_algebra,
    "squares": cmd_squares,
    "verify": cmd_verify,
    "ode": cmd_ode,
}


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    logging.basicConfig(level=get_log_level(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        report = COMMANDS[args.command](args)
    except ConstraintViolation as e:
        logger.error(str(e))
        stdout.write(json.dumps({"error": str(e), "violations": e.violations}, sort_keys=True) + "\n")
        return EXIT_FAILED
    except (ContractViolation, UnknownFamily) as e:
        logger.error(str(e))
        stdout.write(json.dumps({"error": str(e)}, sort_keys=True) + "\n")
        return EXIT_USAGE

    emit(report, stdout)
    if not report.summary.all_passed:
        logger.warning(f"{report.summary.failed} of {report.summary.total} checks failed: {report.summary.failed_checks}")
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
