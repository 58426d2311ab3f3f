"""Acceptance suite: one test per release criterion.

Run with `pytest tests/test_acceptance.py -v` (each PASSED/FAILED line is
the per-criterion verdict) or with `-s` for the timed pass lines.
"""
import math
import time

import numpy as np
import pytest

import oracles
from conftest import (
    balanced_vector,
    complete_graph,
    grid_2x3,
    random_connected_graph,
    ring_graph,
    sin_problem,
    splay_state,
    square_with_diagonal,
    triangle,
)
from torusflow import (
    ElasticEnergy,
    acyclic_solve,
    builtin_case,
    case_to_problem,
    cycle_projection,
    energy,
    explicit_cycle_basis,
    fundamental_cycle_basis,
    gradient,
    loop_flow,
    phases_equal_mod_rotation,
    projection_iteration,
    ptc,
    solve_all,
    solve_elastic,
    winding_number,
)
from torusflow.cli import main as cli_main
from torusflow.elastic import ElasticNetworkProblem

TWO_PI = 2 * math.pi


def _report(number: int, detail: str, started: float) -> None:
    print(f"criterion {number:02d} PASS: {detail} [{time.perf_counter() - started:.3f}s]")


def test_criterion_01_triangle_winding_numbers():
    basis = fundamental_cycle_basis(triangle())
    sigma = basis.cycles[0]
    phi = np.array([0.0, math.pi / 3, 2 * math.pi / 3])
    psi = np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3])
    winding_number(sigma, phi)  # warm NumPy dispatch before timing
    start = time.perf_counter()
    w_phi = winding_number(sigma, phi)
    w_psi = winding_number(sigma, psi)
    elapsed = time.perf_counter() - start
    assert w_phi == 0
    assert w_psi == 1
    assert elapsed < 1e-3
    _report(1, f"w(phi)=0, w(psi)=1 in {elapsed * 1e6:.0f}us", start)


def test_criterion_02_kirchhoff_angle_law_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    graphs = [triangle(), square_with_diagonal(), ring_graph(5), complete_graph(4), grid_2x3()]
    for g in graphs:
        basis = fundamental_cycle_basis(g)
        theta = rng.uniform(-math.pi, math.pi, (10_000, g.n))
        idx = np.asarray(g.edges)
        delta = np.mod(theta[:, idx[:, 0]] - theta[:, idx[:, 1]] + math.pi, TWO_PI) - math.pi
        ok = np.all(np.abs(delta + math.pi) > 1e-9, axis=1)
        raw = delta[ok] @ basis.matrix.T / TWO_PI
        w = np.rint(raw)
        assert np.max(np.abs(raw - w)) < 1e-9
        bounds = np.array([(c.length + 1) // 2 - 1 for c in basis.cycles])
        assert np.all(np.abs(w) <= bounds)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _report(2, "5 graphs x 10^4 samples, |raw - round| < 1e-9", start)


def test_criterion_03_square_with_diagonal_exclusion():
    start = time.perf_counter()
    g = square_with_diagonal()
    basis = explicit_cycle_basis(g, [(0, 1, 3), (1, 2, 3)])
    step = TWO_PI / 60
    vals = -math.pi + step * (np.arange(60) + 0.5)
    t2, t3, t4 = np.meshgrid(vals, vals, vals, indexing="ij")
    theta = np.stack([np.zeros_like(t2), t2, t3, t4], -1).reshape(-1, 4)
    idx = np.asarray(g.edges)
    delta = np.mod(theta[:, idx[:, 0]] - theta[:, idx[:, 1]] + math.pi, TWO_PI) - math.pi
    ok = np.all(np.abs(delta + math.pi) > 1e-9, axis=1)
    image = set(map(tuple, np.rint(delta[ok] @ basis.matrix.T / TWO_PI).astype(int)))
    assert (1, 1) not in image
    assert (-1, -1) not in image
    assert image == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)}
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _report(3, f"{int(ok.sum())} grid points, image has 7 cells", start)


def test_criterion_04_projection_matrix_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    for _ in range(50):
        g = random_connected_graph(rng, int(rng.integers(3, 13)))
        D = rng.uniform(0.1, 5.0, g.m)
        P = cycle_projection(g, D).matrix
        B = g.incidence
        assert np.max(np.abs(P @ P - P)) < 1e-10
        assert abs(np.trace(P) - g.cycle_space_dim) < 1e-8
        assert np.max(np.abs(B @ P)) < 1e-10
        dab = (D * g.weight_vector)[:, None] * B.T
        assert np.max(np.abs(P @ dab)) < 1e-10
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _report(4, "50 random graphs, all four identities < 1e-10/1e-8", start)


def test_criterion_05_contraction_certificate():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    runs = 0
    problems = [
        (sin_problem(ring_graph(5), np.zeros(5), 1.4), [[-1], [0], [1]]),
        (sin_problem(ring_graph(5), balanced_vector(rng, 5, 0.2), 1.4), [[0], [1]]),
        (
            sin_problem(square_with_diagonal(), balanced_vector(rng, 4, 0.3), 1.45),
            [[0, 0], [1, 0], [0, -1], [1, -1]],
        ),
        (case_to_problem(builtin_case("expo(2)"), 1.4), [[0, 0], [1, 1], [-1, 1]]),
        (
            case_to_problem(builtin_case("ring12-asym"), math.pi / 2 - 0.01).with_supply(
                0.8 * case_to_problem(builtin_case("ring12-asym"), 1.4).p
            ),
            [[0], [1]],
        ),
    ]
    for problem, windings in problems:
        basis = fundamental_cycle_basis(problem.graph)
        for u in windings:
            _, report = projection_iteration(problem, basis, u)
            assert report.contraction_verified
            for a, b in zip(report.weighted_steps, report.weighted_steps[1:]):
                assert b <= report.rate * a + 1e-12
            runs += 1
    _report(5, f"{runs} iteration runs, geometric bound holds pairwise", start)


def test_criterion_06_pentagon_triple():
    prob = sin_problem(ring_graph(5), np.zeros(5), 1.4)
    basis = fundamental_cycle_basis(prob.graph)
    solve_all(prob, rho=1e-10, basis=basis)  # warm caches before timing
    start = time.perf_counter()
    sols = solve_all(prob, rho=1e-10, basis=basis)
    elapsed = time.perf_counter() - start
    assert [int(s.u[0]) for s in sols] == [-1, 0, 1]
    s1 = sols[2]
    assert phases_equal_mod_rotation(s1.theta, splay_state(5), 1e-7)
    assert loop_flow(basis.cycles[0], s1.f) == pytest.approx(4.755283, abs=1e-6)
    assert elapsed < 0.1
    _report(6, "3 solutions, splay at u=1, loop flow 4.755283", start)


def test_criterion_07_exponential_family():
    start = time.perf_counter()
    sols2 = solve_all(case_to_problem(builtin_case("expo(2)"), 1.4))
    assert len(sols2) == 9
    sols3 = solve_all(case_to_problem(builtin_case("expo(3)"), 1.4))
    assert len(sols3) == 27
    elapsed = time.perf_counter() - start
    assert elapsed < 2.0
    _report(7, "expo(2) -> 9 solutions, expo(3) -> 27", start)


def test_criterion_08_brute_force_completeness():
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    g = triangle()
    basis = fundamental_cycle_basis(g)
    steps = 400
    grid_tol = TWO_PI / steps
    for trial in range(20):
        prob = sin_problem(g, balanced_vector(rng, 3, 0.25), 1.45)
        sols = solve_all(prob, basis=basis)
        solved = {tuple(int(x) for x in s.u): s for s in sols}
        cells = oracles.grid_cell_minima(prob, basis, steps=steps)
        for u, (residual, theta) in cells.items():
            if u in solved:
                assert residual < 0.05
                assert phases_equal_mod_rotation(solved[u].theta, theta, grid_tol)
            else:
                assert residual > 0.1
        assert (0, ) not in cells or (0,) in solved  # small p always solvable at u=0
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _report(8, "20 random p, grid minima match solve_all per cell", start)


def test_criterion_09_acyclic_closed_form():
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 11))
        g = random_connected_graph(rng, n, extra_edges=0)
        p_hat = balanced_vector(rng, n, 1.0)
        prob = sin_problem(g, p_hat, 1.2)
        ratios = prob.cutset_flow / g.weight_vector
        nz = np.abs(ratios) > 1e-12
        if not np.any(nz):
            continue
        crit = float(np.min(math.sin(1.2) / np.abs(ratios[nz])))
        sol = acyclic_solve(prob.with_supply(crit * (1 - 1e-6) * p_hat))
        assert sol is not None
        assert sol.report.balance_residual < 1e-9
        assert sol.report.physics_residual < 1e-9
        assert sol.report.constraint_margin >= -1e-9
        assert acyclic_solve(prob.with_supply(crit * (1 + 1e-6) * p_hat)) is None
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(9, "20 random trees solved at 1e-9; threshold separates at 1e-6", start)


def test_criterion_10_elastic_equivalence():
    start = time.perf_counter()
    g = ring_graph(5)
    crit = solve_elastic(g, ElasticEnergy.spacing_potential(), np.zeros(5), 1.4)
    flow_sols = solve_all(sin_problem(g, np.zeros(5), 1.4))
    assert len(crit) == 3 == len(flow_sols)
    for theta, sol in zip(crit, flow_sols):
        assert phases_equal_mod_rotation(theta, sol.theta, 1e-7)
    prob = ElasticNetworkProblem.single_energy(
        g, ElasticEnergy.spacing_potential(), np.zeros(5), 1.4
    )
    rng = np.random.default_rng(10)
    for _ in range(50):
        theta = rng.uniform(-1.0, 1.0, 5)
        fd = oracles.central_difference_gradient(lambda t: energy(prob, t), theta)
        assert np.max(np.abs(gradient(prob, theta) - fd)) < 1e-5
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(10, "3 shared critical points; 50 gradient FD checks at 1e-5", start)


def test_criterion_11_ring12_ptc_ordering():
    start = time.perf_counter()
    gamma = math.pi / 2 - 0.01
    tol = 1e-7

    sym = {}
    for u in (-2, -1, 0, 1, 2):
        sym[u] = ptc(builtin_case("ring12-sym"), [u], gamma, tol=tol).ptc
        oracle = oracles.ring_two_path_ptc(12, 11, 5, u, gamma)
        assert sym[u] == pytest.approx(oracle, abs=1e-4)
    assert sym[0] == max(sym.values())
    for u in (1, 2):
        assert sym[u] == pytest.approx(sym[-u], abs=1e-5)

    asym = {}
    for u in (-1, 0, 1):
        asym[u] = ptc(builtin_case("ring12-asym"), [u], gamma, tol=tol).ptc
        oracle = oracles.ring_two_path_ptc(12, 11, 2, u, gamma)
        assert asym[u] == pytest.approx(oracle, abs=1e-4)
    # winding +1 here is the paper's -1 under the mirrored orientation
    assert asym[1] > asym[0]
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _report(11, "sym mirror at 1e-5, oracle match at 1e-4, asym argmax |u|=1", start)


def test_criterion_12_determinism_parallel_equivalence(tmp_path):
    start = time.perf_counter()
    cases = ["pentagon", "ring12-sym", "ring12-asym", "expo(2)", "expo(3)"]
    for name in cases:
        out1 = tmp_path / f"{name}-1.json"
        out8 = tmp_path / f"{name}-8.json"
        args = ["solve", "--case", name, "--gamma", "1.4", "--rho", "1e-10"]
        assert cli_main(args + ["--jobs", "1", "--out", str(out1)]) in (0, 3)
        assert cli_main(args + ["--jobs", "8", "--out", str(out8)]) in (0, 3)
        assert out1.read_bytes() == out8.read_bytes()
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _report(12, f"{len(cases)} built-in cases byte-identical at jobs 1 vs 8", start)


@pytest.mark.skipif(
    "TORUSFLOW_RTS24_CASE" not in __import__("os").environ,
    reason="needs a user-supplied 24-bus case file (TORUSFLOW_RTS24_CASE)",
)
def test_optional_rts24_two_solutions():
    import os

    case = builtin_case("rts24-mod", data_path=os.environ["TORUSFLOW_RTS24_CASE"])
    prob = case_to_problem(case, 1.5)
    sols = solve_all(prob, rho=1e-6)
    assert len(sols) == 2
    assert np.array_equal(sols[0].u, np.zeros(11)) or np.array_equal(
        sols[1].u, np.zeros(11)
    )
    nonzero = sols[0].u if np.any(sols[0].u) else sols[1].u
    assert np.count_nonzero(nonzero) == 1
    assert np.max(np.abs(nonzero)) == 1
