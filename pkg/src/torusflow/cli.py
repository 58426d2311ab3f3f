"""Command-line front end.

Subcommands: solve | windings | basis | sweep | decompose | check | gen.
Exit codes: 0 solutions found / success, 1 input error, 2 internal or
numerical error, 3 no solution, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .errors import (
    AcyclicGraphError,
    CyclicGraphError,
    GammaError,
    InputError,
    MissingDataError,
    SingularityError,
    TorusFlowError,
    UnknownCaseError,
    WeightError,
)
from .flows import (
    FlowNetworkProblem,
    decompose_flow,
    solve_all,
    verify_solution,
)
from .graphs import WeightedGraph, fundamental_cycle_basis, minimum_cycle_basis
from .powerflow import PowerCase, builtin_case, case_to_problem, ptc
from .torus import (
    count_feasible_winding_vectors,
    feasible_winding_bounds,
    feasible_winding_vectors,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2
EXIT_NO_SOLUTION = 3
EXIT_VERIFY = 4

_INPUT_ERRORS = (
    InputError,
    UnknownCaseError,
    MissingDataError,
    GammaError,
    SingularityError,
    WeightError,
    AcyclicGraphError,
    CyclicGraphError,
    json.JSONDecodeError,
    OSError,
    KeyError,
    ValueError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusflow",
        description="Compute, localize, and certify all solutions of flow "
        "network problems on the n-torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", nargs="?", help="problem JSON file")
            p.add_argument("--case", help="built-in case name instead of a file")
        p.add_argument("--gamma", type=float, default=None, help="angle bound")
        p.add_argument("--rho", type=float, default=1e-10, help="flow tolerance")
        p.add_argument(
            "--basis",
            choices=("fundamental", "minimum"),
            default="fundamental",
            help="cycle basis kind",
        )
        p.add_argument(
            "--format", choices=("json", "csv"), default="json", help="output format"
        )
        p.add_argument("--jobs", type=int, default=1, help="parallel winding solves")
        p.add_argument("--out", help="output path (default: stdout)")

    p_solve = sub.add_parser("solve", help="compute all solutions with certificates")
    common(p_solve)
    p_solve.add_argument("--scale", type=float, default=1.0, help="scale the supply vector")

    p_wind = sub.add_parser("windings", help="list feasible winding vectors")
    common(p_wind)

    p_basis = sub.add_parser("basis", help="emit the cycle basis")
    common(p_basis)

    p_sweep = sub.add_parser("sweep", help="PTC/congestion sweep over windings")
    common(p_sweep)
    p_sweep.add_argument("--tol", type=float, default=1e-6, help="PTC bisection tolerance")
    p_sweep.add_argument("--case-data", help="external data file for rts24-mod")

    p_dec = sub.add_parser("decompose", help="cutset/cycle decomposition of a flow")
    common(p_dec)
    p_dec.add_argument("solution", help="solution JSON file")

    p_check = sub.add_parser("check", help="re-verify a solution file")
    common(p_check)
    p_check.add_argument("solution", help="solution JSON file")

    p_gen = sub.add_parser("gen", help="generate a problem JSON file")
    common(p_gen, with_input=False)
    p_gen.add_argument("--gen-case", help="built-in case to convert to a problem")
    p_gen.add_argument("--nodes", type=int, default=6, help="random graph size")
    p_gen.add_argument("--extra-edges", type=int, default=2, help="edges beyond a tree")
    p_gen.add_argument("--seed", type=int, default=0, help="generation seed")
    p_gen.add_argument("--p-scale", type=float, default=0.3, help="supply magnitude")
    return parser


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_problem(args) -> FlowNetworkProblem:
    gamma = args.gamma
    if args.case:
        case = builtin_case(args.case, data_path=getattr(args, "case_data", None))
        if gamma is None:
            raise InputError("--gamma is required with --case")
        return case_to_problem(case, gamma)
    if not args.input:
        raise InputError("give a problem file or --case NAME")
    doc = json.loads(Path(args.input).read_text())
    problem = serialize.problem_from_dict(doc)
    if gamma is not None and gamma != problem.gamma:
        problem = FlowNetworkProblem(
            graph=problem.graph,
            flow_functions=problem.flow_functions,
            p=problem.p,
            gamma=gamma,
        )
    return problem


def _make_basis(graph: WeightedGraph, kind: str):
    if kind == "minimum":
        return minimum_cycle_basis(graph)
    return fundamental_cycle_basis(graph)


def _cmd_solve(args) -> int:
    problem = _load_problem(args)
    if args.scale != 1.0:
        problem = problem.with_supply(args.scale * problem.p)
    if problem.graph.cycle_space_dim == 0:
        basis = None
        solutions = solve_all(problem, rho=args.rho, jobs=args.jobs)
    else:
        basis = _make_basis(problem.graph, args.basis)
        solutions = solve_all(problem, rho=args.rho, basis=basis, jobs=args.jobs)
    if args.format == "csv":
        if basis is None:
            basis = fundamental_cycle_basis(problem.graph) if problem.graph.cycle_space_dim else None
        if basis is None:
            raise InputError("CSV solve output needs a cyclic graph")
        text = serialize.solutions_csv(solutions, problem, basis)
    else:
        doc = {
            "problem": serialize.problem_to_dict(problem),
            "rho": args.rho,
            "basis": serialize.basis_to_dict(basis) if basis is not None else None,
            "solution_count": len(solutions),
            "solutions": [serialize.solution_to_dict(s, basis) for s in solutions],
        }
        text = serialize.dumps_canonical(doc)
    _write(text, args.out)
    return EXIT_OK if solutions else EXIT_NO_SOLUTION


def _cmd_windings(args) -> int:
    problem = _load_problem(args)
    g = problem.graph
    if g.cycle_space_dim == 0:
        doc = {
            "acyclic": True,
            "note": "acyclic: unique-solution regime",
            "candidates": 1,
        }
        _write(serialize.dumps_canonical(doc), args.out)
        return EXIT_OK
    basis = _make_basis(g, args.basis)
    bounds = feasible_winding_bounds(basis, problem.gamma)
    rows = [
        {"nodes": list(c.nodes), "length": c.length, "bound": b}
        for c, b in zip(basis.cycles, bounds)
    ]
    doc = {
        "basis": serialize.basis_to_dict(basis),
        "gamma": problem.gamma,
        "cycles": rows,
        "candidates": count_feasible_winding_vectors(basis, problem.gamma),
    }
    if args.format == "csv":
        lines = [serialize.csv_line(["cycle", "length", "bound"])]
        for row in rows:
            lines.append(
                serialize.csv_line(
                    ["-".join(map(str, row["nodes"])), row["length"], row["bound"]]
                )
            )
        lines.append(serialize.csv_line(["candidates", doc["candidates"], ""]))
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(serialize.dumps_canonical(doc), args.out)
    return EXIT_OK


def _cmd_basis(args) -> int:
    problem = _load_problem(args)
    basis = _make_basis(problem.graph, args.basis)
    doc = serialize.basis_to_dict(basis)
    doc["vectors"] = [[int(v) for v in c.vector] for c in basis.cycles]
    doc["lengths"] = list(basis.lengths)
    _write(serialize.dumps_canonical(doc), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if not args.case and not args.input:
        raise InputError("sweep needs --case NAME or a case JSON file")
    if args.case:
        case = builtin_case(args.case, data_path=args.case_data)
    else:
        case = PowerCase.from_dict(json.loads(Path(args.input).read_text()))
    gamma = args.gamma
    if gamma is None:
        gamma = math.pi / 2 - 0.01
    problem = case_to_problem(case, gamma)
    basis = _make_basis(problem.graph, args.basis)
    results = [
        ptc(case, u, gamma, tol=args.tol, rho=args.rho, basis=basis)
        for u in feasible_winding_vectors(basis, gamma)
    ]
    k = basis.size
    if args.format == "csv":
        header = [f"u_{i}" for i in range(k)] + ["P", "exists", "congestion"] + [
            f"loop_flow_{i}" for i in range(k)
        ]
        lines = [serialize.csv_line(header)]
        for res in results:
            for sample in res.curve:
                loops = list(sample.loop_flows) or [None] * k
                lines.append(
                    serialize.csv_line(
                        [int(x) for x in res.u]
                        + [sample.scale, sample.exists, sample.congestion]
                        + loops
                    )
                )
        _write("\n".join(lines) + "\n", args.out)
    else:
        doc = {
            "case": case.name or "file",
            "gamma": gamma,
            "basis": serialize.basis_to_dict(basis),
            "results": [
                {
                    "u": [int(x) for x in res.u],
                    "ptc": res.ptc,
                    "curve": [
                        {
                            "P": s.scale,
                            "exists": s.exists,
                            "congestion": s.congestion,
                            "loop_flows": list(s.loop_flows),
                        }
                        for s in res.curve
                    ],
                }
                for res in results
            ],
        }
        _write(serialize.dumps_canonical(doc), args.out)
    return EXIT_OK


def _cmd_decompose(args) -> int:
    problem = _load_problem(args)
    _, f, _ = serialize.solution_from_dict(
        json.loads(Path(args.solution).read_text())
    )
    if f.shape != (problem.graph.m,):
        raise InputError("flow length does not match the graph")
    f_cut, f_cyc = decompose_flow(problem.graph, f)
    doc = {
        "f": list(f),
        "f_cut": list(f_cut),
        "f_cyc": list(f_cyc),
        "balance_residual": float(
            np.max(np.abs(problem.graph.incidence @ f - problem.p))
        ),
    }
    if problem.graph.cycle_space_dim > 0:
        basis = _make_basis(problem.graph, args.basis)
        doc["basis_fingerprint"] = basis.fingerprint
        doc["loop_flows"] = [float(c.vector @ f) for c in basis.cycles]
    _write(serialize.dumps_canonical(doc), args.out)
    return EXIT_OK


def _cmd_check(args) -> int:
    problem = _load_problem(args)
    u, f, theta = serialize.solution_from_dict(
        json.loads(Path(args.solution).read_text())
    )
    basis = (
        _make_basis(problem.graph, args.basis)
        if problem.graph.cycle_space_dim > 0
        else None
    )
    if basis is not None and u.shape != (basis.size,):
        raise InputError("winding vector length does not match the basis")
    report = verify_solution(problem, basis, f, theta, u)
    ok = report.within_tolerance() and report.winding_deviation <= 1e-6
    doc = {
        "ok": ok,
        "balance_residual": report.balance_residual,
        "physics_residual": report.physics_residual,
        "constraint_margin": report.constraint_margin,
        "winding_deviation": report.winding_deviation,
        "boundary": report.boundary,
    }
    _write(serialize.dumps_canonical(doc), args.out)
    if not ok:
        flagged = []
        if report.balance_residual >= 1e-8:
            flagged.append(f"balance residual {report.balance_residual:.3e}")
        if report.physics_residual >= 1e-8:
            flagged.append(f"physics residual {report.physics_residual:.3e}")
        if report.constraint_margin < -1e-9:
            flagged.append(f"constraint margin {report.constraint_margin:.3e}")
        if report.winding_deviation > 1e-6:
            flagged.append(f"winding mismatch {report.winding_deviation:.3e}")
        print("verification failed: " + "; ".join(flagged), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_gen(args) -> int:
    gamma = args.gamma if args.gamma is not None else 1.4
    if args.gen_case:
        case = builtin_case(args.gen_case)
        problem = case_to_problem(case, gamma)
    else:
        rng = np.random.default_rng(args.seed)
        n = max(2, args.nodes)
        edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
        existing = {(min(a, b), max(a, b)) for a, b in edges}
        attempts = 0
        while len(edges) < n - 1 + args.extra_edges and attempts < 1000:
            attempts += 1
            a, b = sorted(rng.integers(0, n, size=2).tolist())
            if a == b or (a, b) in existing:
                continue
            existing.add((a, b))
            edges.append((a, b))
        weights = rng.uniform(0.5, 1.5, size=len(edges))
        graph = WeightedGraph.from_edges(n, edges, weights)
        p = rng.normal(size=n)
        p = args.p_scale * (p - p.mean())
        problem = FlowNetworkProblem.single_family(
            graph, serialize.flow_family_from_dict({"family": "sin"}), p, gamma
        )
    _write(serialize.dumps_canonical(serialize.problem_to_dict(problem)), args.out)
    return EXIT_OK


_DISPATCH = {
    "solve": _cmd_solve,
    "windings": _cmd_windings,
    "basis": _cmd_basis,
    "sweep": _cmd_sweep,
    "decompose": _cmd_decompose,
    "check": _cmd_check,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TorusFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
