"""Command line front end.

Three subcommands:

* ``solve``: read a market document, run the fixed-point solver, write a
  result document. Exit 0 on convergence, 2 when the iteration limit was
  hit, 1 on invalid input.
* ``diagnose``: print the contraction diagnostics of a market as JSON.
* ``validate``: run the oracle checks that apply to a market (Monte Carlo
  for logit sides, coordinate search for tiny markets) and print one
  PASS/FAIL line each. Exit 0 iff every check passed.

Output files are deterministic: rerunning a command with identical inputs
produces byte-identical documents.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from tumatch.diagnostics import DiagnosticsReport, diagnostics_report
from tumatch.io import MarketFileError, dumps_canonical, load_market, load_wages, save_result
from tumatch.kernels import KernelError
from tumatch.market import Logit, SpecError, scaled_payoffs
from tumatch.oracle import OracleError, brute_force_equilibrium, mc_logit_probs
from tumatch.solver import NumericsError, SolveOptions, solve

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2

# Agreement required between the solver and the coordinate-search oracle.
_WAGE_AGREEMENT = 1e-7

# At most this many rows/columns per side get a Monte Carlo check.
_MAX_MC_CHECKS = 3


class _UsageError(Exception):
    """Raised instead of argparse's default sys.exit on bad usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tumatch",
        description="Equilibrium wages and matches for two-sided matching markets.",
    )
    commands = parser.add_subparsers(
        dest="command", required=True, metavar="command", parser_class=_Parser
    )

    cmd = commands.add_parser("solve", help="compute equilibrium wages and matches")
    cmd.add_argument("--input", required=True, help="market document to read")
    cmd.add_argument("--output", required=True, help="result document to write")
    cmd.add_argument("--tol", type=float, default=1e-10,
                     help="stop once the update norm drops below this (default 1e-10)")
    cmd.add_argument("--max-iter", type=int, default=100000,
                     help="iteration limit (default 100000)")
    cmd.add_argument("--init", default="zeros", metavar="SOURCE",
                     help="'zeros' or a JSON file with a \"wages\" matrix")
    cmd.add_argument("--trace", type=int, default=0, metavar="N",
                     help="keep every N-th trace entry in the result (default none)")

    cmd = commands.add_parser("diagnose", help="print contraction diagnostics as JSON")
    cmd.add_argument("--input", required=True, help="market document to read")
    cmd.add_argument("--at", default="zeros", metavar="SOURCE",
                     help="'zeros' or a JSON file with a \"wages\" matrix")
    cmd.add_argument("--samples", type=int, default=100,
                     help="contraction ratio sample pairs (default 100)")
    cmd.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")

    cmd = commands.add_parser("validate", help="run the applicable oracle checks")
    cmd.add_argument("--input", required=True, help="market document to read")
    cmd.add_argument("--draws", type=int, default=1000000,
                     help="Monte Carlo draws per check (default 1000000)")
    cmd.add_argument("--seed", type=int, default=0, help="simulation seed (default 0)")
    return parser


def _cmd_solve(args) -> int:
    spec = load_market(args.input)
    initial = None if args.init == "zeros" else load_wages(args.init)
    options = SolveOptions(
        tolerance=args.tol,
        max_iterations=args.max_iter,
        initial_wages=initial,
        trace_every=args.trace,
    )
    result = solve(spec, options)
    save_result(args.output, result, options)
    status = "converged" if result.converged else "hit the iteration limit"
    print(
        f"{status} after {result.iterations} iterations; "
        f"update norm {result.final_update_norm:.3e}, "
        f"clearing residual {result.final_clearing_residual:.3e}; "
        f"wrote {args.output}"
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _report_document(report: DiagnosticsReport) -> dict:
    return {
        "jacobian_inf_norm": report.jacobian_inf_norm,
        "contraction_ratio_samples": report.contraction_ratio_samples.tolist(),
        "elasticities": {
            "worker": report.elasticities.worker.tolist(),
            "firm": report.elasticities.firm.tolist(),
        },
        "margins": {
            "worker": report.elasticity_check.worker_margin.tolist(),
            "firm": report.elasticity_check.firm_margin.tolist(),
        },
        "contraction_condition_ok": report.elasticity_check.ok,
        "step_scalars": {
            "worker": report.scalars.worker.tolist(),
            "firm": report.scalars.firm.tolist(),
        },
    }


def _cmd_diagnose(args) -> int:
    spec = load_market(args.input)
    at = None if args.at == "zeros" else load_wages(args.at)
    report = diagnostics_report(spec, wages=at, samples=args.samples, seed=args.seed)
    sys.stdout.write(dumps_canonical(_report_document(report)))
    return EXIT_OK


def _spread_indices(count: int) -> list:
    if count <= _MAX_MC_CHECKS:
        return list(range(count))
    return [0, count // 2, count - 1]


def _cmd_validate(args) -> int:
    spec = load_market(args.input)
    zeros = np.zeros((spec.num_worker_types, spec.num_firm_types))
    worker_payoffs, firm_payoffs = scaled_payoffs(spec, zeros)
    checks = []

    seed = args.seed
    if isinstance(spec.worker_model, Logit):
        for x in _spread_indices(spec.num_worker_types):
            report = mc_logit_probs(worker_payoffs[x], args.draws, seed)
            checks.append((
                f"mc-worker-{x + 1}",
                report.ok,
                f"max gap {report.max_abs_gap:.2e}, bound {report.standard_error_bound:.2e}",
            ))
            seed += 1
    if isinstance(spec.firm_model, Logit):
        for y in _spread_indices(spec.num_firm_types):
            report = mc_logit_probs(firm_payoffs[:, y], args.draws, seed)
            checks.append((
                f"mc-firm-{y + 1}",
                report.ok,
                f"max gap {report.max_abs_gap:.2e}, bound {report.standard_error_bound:.2e}",
            ))
            seed += 1
    if spec.num_worker_types * spec.num_firm_types <= 4:
        reference = brute_force_equilibrium(spec)
        result = solve(spec)
        gap = float(np.max(np.abs(result.wages - reference)))
        checks.append((
            "equilibrium-coordinate-search",
            result.converged and gap <= _WAGE_AGREEMENT,
            f"max wage gap {gap:.2e}, bound {_WAGE_AGREEMENT:.0e}",
        ))

    if not checks:
        print("no oracle checks apply to this market")
        return EXIT_OK
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_INPUT_ERROR


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "diagnose":
            return _cmd_diagnose(args)
        return _cmd_validate(args)
    except (MarketFileError, SpecError, KernelError, OracleError, NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
