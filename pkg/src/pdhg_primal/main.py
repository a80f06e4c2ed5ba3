#!/usr/bin/env python3
"""
pdhg-primal - primal-only PDHG runs, bound audits, consensus and oracles
"""

import argparse
import logging
import os
import sys
import traceback
from typing import List, Optional

import numpy as np

from pdhg_primal.enums.solver_variant import SolverVariant
from pdhg_primal.errors import ConfigurationError
from pdhg_primal.models.solver_config import SolverConfig
from pdhg_primal.models.step_sizes import StepSizes
from pdhg_primal.services.diagnostics import audit_theorem1, audit_theorem2
from pdhg_primal.services.distributed import (ConsensusProblem, load_graph, run_consensus,
                                              run_consensus_pdhg_baseline)
from pdhg_primal.services.manifest_loader import parse_manifest
from pdhg_primal.services.matrix_io import load_vector
from pdhg_primal.services.oracle import certify, solve_least_squares, solve_penalized, solve_qp_kkt
from pdhg_primal.services.problem import ConstrainedProblem
from pdhg_primal.services.solvers import resolve_step_sizes, run
from pdhg_primal.services.trace_io import read_trace, write_audit, write_json, write_trace

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_REJECTED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdhg-primal",
                                     description="Primal-only PDHG for min g over argmin 1/2 ||Ax - b||^2")
    parser.add_argument("--verbose", "-v", action="store_true", help="log progress and show tracebacks")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="run one scheme and write its trace")
    solve.add_argument("--manifest", required=True)
    solve.add_argument("--variant", default="primal", choices=[v.value for v in SolverVariant])
    solve.add_argument("--tau", type=float)
    solve.add_argument("--sigma", type=float)
    solve.add_argument("--lambda", dest="lam", type=float)
    solve.add_argument("--tau0", type=float, default=1.0)
    solve.add_argument("--max-iters", type=int, default=1000)
    solve.add_argument("--record-every", type=int, default=1)
    solve.add_argument("--x0", help="vector file or comma-separated values")
    solve.add_argument("--seed", type=int, default=42, help="seed of the norm estimate")
    solve.add_argument("--snapshots", action="store_true", help="also keep x and s per record")
    solve.add_argument("--out", default="trace.csv")

    audit = commands.add_parser("audit", help="compare a trace with its closed-form bounds")
    audit.add_argument("--trace", required=True)
    audit.add_argument("--manifest", required=True)
    audit.add_argument("--theorem", type=int, choices=[1, 2])
    audit.add_argument("--out", default="audit.csv")

    consensus = commands.add_parser("consensus", help="run decentralized consensus")
    consensus.add_argument("--manifest", required=True)
    consensus.add_argument("--graph", help="edge-list file replacing the manifest graph")
    consensus.add_argument("--variant", default="primal", choices=["primal", "pdhg"])
    consensus.add_argument("--lambda", dest="lam", type=float)
    consensus.add_argument("--tau", type=float)
    consensus.add_argument("--max-iters", type=int, default=1000)
    consensus.add_argument("--record-every", type=int, default=1)
    consensus.add_argument("--out", default="consensus.csv")

    oracle = commands.add_parser("oracle", help="reference solutions")
    oracle.add_argument("--manifest", required=True)
    oracle.add_argument("--mode", default="lsq", choices=["lsq", "kkt", "penalized"])
    oracle.add_argument("--rho", type=float)
    oracle.add_argument("--out", default="oracle.json")
    return parser


def _banner(title: str) -> None:
    print("═" * 55)
    print(f"  {title}")
    print("═" * 55)
    print()


def _constrained(path: str) -> ConstrainedProblem:
    problem = parse_manifest(path)
    if not isinstance(problem, ConstrainedProblem):
        raise ConfigurationError(f"{path} describes a consensus problem; use the consensus command")
    return problem


def _parse_x0(value: Optional[str], n: int) -> Optional[np.ndarray]:
    if value is None:
        return None
    if os.path.exists(value):
        x0 = load_vector(value, "x0")
    else:
        try:
            x0 = np.array([float(part) for part in value.split(",")])
        except ValueError as ex:
            raise ConfigurationError(f"--x0 is neither a file nor a comma-separated list: {value}") from ex
    if x0.shape != (n,):
        raise ConfigurationError(f"--x0 has length {x0.size}, the problem has n={n}")
    return x0


def command_solve(args) -> int:
    _banner("pdhg-primal - solve")
    problem = _constrained(args.manifest)
    print(f"✓ Loaded {problem!r}")

    config = SolverConfig(seed=args.seed, accel_tau0=args.tau0, record_every=args.record_every)
    variant = SolverVariant(args.variant)
    step_sizes = resolve_step_sizes(variant, problem, tau=args.tau, sigma=args.sigma,
                                    lam=args.lam, config=config)
    x0 = _parse_x0(args.x0, problem.n)
    trace = run(variant, problem, step_sizes, x0=x0, max_iters=args.max_iters,
                record_every=args.record_every, snapshots=args.snapshots, config=config,
                tau0=args.tau0)
    write_trace(trace, args.out)

    final = trace.final
    print(f"✓ {variant.value}: {final.k} iterations, tau={step_sizes.tau:.6g}, "
          f"sigma={step_sizes.sigma:.6g}")
    print(f"  f(s)-f* = {final.f_s - trace.metadata['fstar']:.3e}, "
          f"||As-b|| = {final.residual_s:.3e}, g(s) = {final.g_s:.12g}")
    print(f"Output saved to: {args.out}")
    return EXIT_OK


def command_audit(args) -> int:
    _banner("pdhg-primal - bound audit")
    problem = _constrained(args.manifest)
    trace = read_trace(args.trace)
    metadata = trace.metadata
    if not metadata:
        raise ConfigurationError(f"{args.trace} has no metadata sidecar; rerun solve to produce one")

    variant = SolverVariant(metadata.get("variant", "primal"))
    theorem = args.theorem or (2 if variant.is_accelerated else 1)
    x0 = np.asarray(metadata.get("x0", np.zeros(problem.n)), dtype=float)
    certificates = certify(problem, x0)
    print(f"✓ Certificates: D_x={certificates.d_x:.6g}, D_y={certificates.d_y}, "
          f"g*={certificates.g_star:.12g}")

    if theorem == 1:
        step_sizes = StepSizes(tau=metadata["tau"], sigma=metadata["sigma"])
        rows = audit_theorem1(trace, certificates, step_sizes)
    else:
        rows = audit_theorem2(trace, certificates, metadata["lambda"],
                              tau0=metadata.get("tau0", 1.0), gamma=metadata.get("gamma", 1.0))
    write_audit(rows, args.out)

    violated = [row for row in rows if not row.satisfied]
    if violated:
        print(f"⚠ {len(violated)} of {len(rows)} rows violate their bound "
              f"(first: {violated[0].quantity} at k={violated[0].k})")
    else:
        print(f"✓ All {len(rows)} rows satisfied")
    print(f"Output saved to: {args.out}")
    return EXIT_OK


def command_consensus(args) -> int:
    _banner("pdhg-primal - consensus")
    problem = parse_manifest(args.manifest)
    if not isinstance(problem, ConsensusProblem):
        raise ConfigurationError(f"{args.manifest} is not a consensus manifest")
    if args.graph:
        problem = ConsensusProblem(load_graph(args.graph), problem.local_functions)
    print(f"✓ Loaded {problem!r}")

    runner = run_consensus if args.variant == "primal" else run_consensus_pdhg_baseline
    trace, communications = runner(problem, lam=args.lam, tau=args.tau, max_iters=args.max_iters,
                                   record_every=args.record_every)
    trace.metadata["communications"] = communications
    write_trace(trace, args.out)

    print(f"✓ {args.variant}: {trace.final.k} iterations, {communications} communications")
    print(f"  consensus gap = {trace.final.get('consensus_gap'):.3e}")
    print(f"Output saved to: {args.out}")
    return EXIT_OK


def command_oracle(args) -> int:
    _banner("pdhg-primal - oracle")
    problem = _constrained(args.manifest)
    if args.mode == "lsq":
        x_ls, f_star = solve_least_squares(problem.A, problem.b)
        result = {"mode": "lsq", "x_ls": x_ls, "f_star": f_star}
    elif args.mode == "kkt":
        form = problem.g.quadratic_form()
        if form is None:
            raise ConfigurationError("--mode kkt needs a quadratic-type g")
        q, c, const = form
        if not np.linalg.eigvalsh(q)[0] > 0:
            raise ConfigurationError(f"--mode kkt needs a strongly convex g; "
                                     f"'{problem.g.family.value}' has a singular quadratic part")
        solution = solve_qp_kkt(q, c, problem.A, problem.b, const=const)
        result = {"mode": "kkt", "x_star": solution.x_star, "u_star": solution.u_star,
                  "g_star": solution.g_star, "D_y": solution.d_y}
    else:
        if args.rho is None:
            raise ConfigurationError("--mode penalized needs --rho")
        x_hat = solve_penalized(problem, args.rho)
        result = {"mode": "penalized", "rho": args.rho, "x_hat": x_hat,
                  "objective": problem.g.value(x_hat) + args.rho * problem.f_value(x_hat)}
    write_json(result, args.out)
    print(f"✓ {args.mode} oracle finished")
    print(f"Output saved to: {args.out}")
    return EXIT_OK


COMMANDS = {
    "solve": command_solve,
    "audit": command_audit,
    "consensus": command_consensus,
    "oracle": command_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as ex:
        print(f"✗ Rejected configuration: {ex}")
        return EXIT_REJECTED
    except Exception as ex:
        print(f"✗ Error: {ex}")
        if args.verbose:
            traceback.print_exc()
        return EXIT_FAILURE


def start():
    """Main entry point for the script"""
    sys.exit(main())


if __name__ == "__main__":
    start()
