"""Independent brute-force oracles used to freeze expected test values.

Everything here recomputes results from first principles (candidate
enumeration, exhaustive search, dense grids, closed-form scalar analysis)
so it shares no code path with the library being tested.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def arc_difference(alpha: float, beta: float) -> float:
    """Signed shortest-arc difference by candidate enumeration."""
    best = None
    for k in range(-3, 4):
        cand = alpha - beta + TWO_PI * k
        if best is None or abs(cand) < abs(best) - 1e-15:
            best = cand
    if abs(abs(best) - math.pi) < 1e-12:
        best = -math.pi  # the [-pi, pi) convention assigns the tie to -pi
    return best


def all_simple_cycles(n: int, edges) -> list[frozenset[int]]:
    """Every simple cycle of a small graph, as an edge-index set.

    Checks all edge subsets: a subset is a simple cycle iff it is nonempty,
    connected, and every touched node has degree exactly 2.
    """
    m = len(edges)
    cycles = []
    for mask in range(1, 1 << m):
        chosen = [e for e in range(m) if mask >> e & 1]
        degree: dict[int, int] = {}
        for e in chosen:
            i, j = edges[e]
            degree[i] = degree.get(i, 0) + 1
            degree[j] = degree.get(j, 0) + 1
        if any(d != 2 for d in degree.values()):
            continue
        nodes = sorted(degree)
        adj = {v: [] for v in nodes}
        for e in chosen:
            i, j = edges[e]
            adj[i].append(j)
            adj[j].append(i)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) == len(nodes):
            cycles.append(frozenset(chosen))
    return cycles


def cycle_vector_of_edge_set(n: int, edges, edge_set: frozenset[int]) -> np.ndarray:
    """A signed vector for an (unoriented) simple-cycle edge set."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in edge_set:
        i, j = edges[e]
        adj.setdefault(i, []).append((e, j))
        adj.setdefault(j, []).append((e, i))
    start = min(adj)
    vec = np.zeros(len(edges))
    prev, cur = None, start
    while True:
        options = [t for t in adj[cur] if t[1] != prev or len(adj[cur]) == 1]
        e, nxt = options[0]
        vec[e] = 1.0 if edges[e] == (cur, nxt) else -1.0
        prev, cur = cur, nxt
        if cur == start:
            break
    return vec


def exhaustive_minimum_basis_length(n: int, edges) -> int:
    """Minimal total length over all cycle bases, by exhaustive search."""
    m = len(edges)
    k = m - n + 1
    cycles = all_simple_cycles(n, edges)
    vectors = [cycle_vector_of_edge_set(n, edges, c) for c in cycles]
    lengths = [len(c) for c in cycles]
    best = None
    for combo in itertools.combinations(range(len(cycles)), k):
        mat = np.array([vectors[i] for i in combo])
        if np.linalg.matrix_rank(mat) < k:
            continue
        total = sum(lengths[i] for i in combo)
        if best is None or total < best:
            best = total
    return best


def grid_cell_minima(problem, basis, steps: int = 400):
    """Dense grid search over the reduced torus, reporting per winding cell
    the smallest balance residual among angle-feasible points and its phases.

    Only practical for n <= 4.  Points violating |delta|_inf <= gamma are
    excluded, so cells with no feasible point report (inf, None).
    """
    g = problem.graph
    n, m = g.n, g.m
    step = TWO_PI / steps
    axes = [np.zeros(1)] + [
        -math.pi + step * (np.arange(steps) + 0.5) for _ in range(n - 1)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    theta = np.stack([a.ravel() for a in mesh], axis=-1)
    idx = np.asarray(g.edges)
    delta = np.mod(theta[:, idx[:, 0]] - theta[:, idx[:, 1]] + math.pi, TWO_PI) - math.pi
    feasible = np.all(np.abs(delta) <= problem.gamma, axis=1)
    feasible &= np.all(np.abs(delta + math.pi) > 1e-9, axis=1)
    theta, delta = theta[feasible], delta[feasible]

    flows = np.empty_like(delta)
    for e, fn in enumerate(problem.flow_functions):
        flows[:, e] = g.weights[e] * np.asarray(fn.evaluate(delta[:, e]), dtype=float)
    residual = np.max(np.abs(flows @ g.incidence.T - problem.p), axis=1)

    raw = delta @ basis.matrix.T / TWO_PI
    cells = np.rint(raw).astype(int)
    out = {}
    for u in itertools.product(
        *[range(-b, b + 1) for b in _winding_box(basis, problem.gamma)]
    ):
        mask = np.all(cells == np.array(u), axis=1)
        if not np.any(mask):
            out[u] = (math.inf, None)
            continue
        sub = np.nonzero(mask)[0]
        best = sub[np.argmin(residual[sub])]
        out[u] = (float(residual[best]), theta[best])
    return out


def _winding_box(basis, gamma):
    return [int(math.floor(gamma * c.length / TWO_PI)) for c in basis.cycles]


def ring_two_path_ptc(n: int, supply: int, demand: int, u: int, gamma: float):
    """Closed-form PTC for a unit-weight sine ring with one source/sink pair.

    Solutions put a uniform flow f1 = sin(a) on the k1 edges of the
    ascending path supply->demand and f2 = sin(b) on the remaining k2
    edges, with k1 a - k2 b = -2 pi u and f1 + f2 = P; P is maximized at
    the largest feasible b.
    """
    k1 = (demand - supply) % n
    k2 = n - k1
    top = min(gamma, (gamma * k1 + TWO_PI * u) / k2)
    bot = max(-gamma, (-gamma * k1 + TWO_PI * u) / k2)
    if top < bot:
        return None
    phi = (-TWO_PI * u + k2 * top) / k1
    if phi < -gamma - 1e-12:
        return None
    return math.sin(phi) + math.sin(top)


def central_difference_gradient(fun, theta, step: float = 1e-6) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for i in range(theta.size):
        hi = theta.copy()
        lo = theta.copy()
        hi[i] += step
        lo[i] -= step
        out[i] = (fun(hi) - fun(lo)) / (2 * step)
    return out
