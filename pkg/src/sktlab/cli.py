"""Command line front end.

Exit codes: 0 success, 2 solver failure, 3 configuration error,
4 runtime invariant violation (positivity or finiteness breach).
"""

from __future__ import annotations

import argparse
import sys

from .backend import backend_name
from .config import ConfigError, parse_config
from .evolution import NonFiniteError, PositivityBreachError, SolverError
from .harness import (
    run_boundedness_audit,
    run_consistency_test,
    run_convergence_study,
    run_dual_solve,
    run_local_simulation,
    run_nonlocal_simulation,
    write_boundedness_outputs,
    write_consistency_outputs,
    write_convergence_outputs,
    write_dual_outputs,
    write_simulation_outputs,
)

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3
EXIT_INVARIANT = 4


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="path to a key=value config file")
    sub.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sktlab",
        description="Cross-diffusion lab: nonlocal and local runs, dual solves, "
        "operator checks, convergence studies.",
    )
    parser.add_argument(
        "--backend",
        action="store_true",
        help="print the active compute backend and exit",
    )
    subs = parser.add_subparsers(dest="command")
    for name in (
        "simulate-nonlocal",
        "simulate-local",
        "dual-solve",
        "consistency-test",
        "lemma4-audit",
        "convergence-study",
    ):
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "convergence-study":
            sub.add_argument(
                "--jobs",
                type=int,
                default=1,
                help="run the per-scale cases in this many worker processes",
            )
    return parser


def _dispatch(args: argparse.Namespace) -> None:
    config = parse_config(args.config)
    if args.command == "simulate-nonlocal":
        traj, report = run_nonlocal_simulation(config)
        write_simulation_outputs(args.out, traj, report, "simulate-nonlocal")
        print(
            f"simulate-nonlocal: {report['steps']} steps to t={report['final_time']:.6g}, "
            f"entropy {report['entropy_initial']:.6g} -> {report['entropy_final']:.6g}"
        )
    elif args.command == "simulate-local":
        traj, report = run_local_simulation(config)
        write_simulation_outputs(args.out, traj, report, "simulate-local")
        print(
            f"simulate-local: {report['steps']} steps to t={report['final_time']:.6g}, "
            f"entropy {report['entropy_initial']:.6g} -> {report['entropy_final']:.6g}"
        )
    elif args.command == "dual-solve":
        solution, report = run_dual_solve(config)
        write_dual_outputs(args.out, solution, report)
        print(
            f"dual-solve: {report['slab_count']} slabs, "
            f"{report['iterations']} iterations, min value {report['min_value']:.6g}"
        )
    elif args.command == "consistency-test":
        report = run_consistency_test(config)
        write_consistency_outputs(args.out, report)
        errs = ", ".join("%.3g" % e for e in report.max_errors)
        print(f"consistency-test[{report.function}]: max errors {errs}")
    elif args.command == "lemma4-audit":
        report = run_boundedness_audit(config)
        write_boundedness_outputs(args.out, report)
        print(
            f"lemma4-audit: ratio spread {report.max_over_min:.4g} "
            f"({'within' if report.bounded else 'OUTSIDE'} factor 4)"
        )
    elif args.command == "convergence-study":
        report = run_convergence_study(config, jobs=args.jobs)
        write_convergence_outputs(args.out, report)
        errs = ", ".join("%.3g" % e for e in report.e_total)
        print(f"convergence-study: errors {errs}")
    else:
        raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        print(backend_name())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        _dispatch(args)
    except (PositivityBreachError, NonFiniteError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:  # ConfigError, resolution preconditions, bad values
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
