"""Weighted-graph algebra: incidence and Laplacian machinery, cycle bases,
the cycle-edge matrix, and the D-weighted cycle projection.

Conventions
-----------
* Nodes are 0-based integers, edges are ordered, oriented pairs (i, j).
* The incidence matrix B has +1 at an edge's first node and -1 at its
  second, so (B^T x)_e = x_i - x_j.
* A fundamental cycle is stored with the orientation in which its defining
  non-tree edge is traversed negatively (coefficient -1).  With the
  wrapped-difference convention of :mod:`torusflow.torus` this makes the
  winding number of a counterclockwise phase sequence positive.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from hashlib import sha256
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AcyclicGraphError,
    BasisKindError,
    InputError,
    NonIntegerWindingError,
    RankError,
    SingularityError,
    WeightError,
)

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class WeightedGraph:
    """Connected undirected graph with ordered, oriented, weighted edges."""

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if self.n < 1:
            raise InputError("graph needs at least one node")
        if len(weights) != len(edges):
            raise InputError("edges and weights must have the same length")
        seen = set()
        for i, j in edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InputError(f"edge ({i}, {j}) references a missing node")
            if i == j:
                raise InputError(f"self-loop at node {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InputError(f"duplicate undirected edge {key}")
            seen.add(key)
        if any(w <= 0.0 for w in weights):
            raise WeightError("all edge weights must be strictly positive")
        if not self._is_connected():
            raise SingularityError("graph is not connected")

    @classmethod
    def from_edges(cls, n, edges, weights=None) -> "WeightedGraph":
        edges = tuple((int(i), int(j)) for i, j in edges)
        if weights is None:
            weights = (1.0,) * len(edges)
        return cls(n=int(n), edges=edges, weights=tuple(weights))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def cycle_space_dim(self) -> int:
        return self.m - self.n + 1

    def _is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = [False] * self.n
        seen[0] = True
        queue = deque([0])
        count = 1
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    queue.append(w)
        return count == self.n

    @cached_property
    def incidence(self) -> np.ndarray:
        """n x m incidence matrix B with (B^T x)_e = x_i - x_j."""
        B = np.zeros((self.n, self.m))
        for e, (i, j) in enumerate(self.edges):
            B[i, e] = 1.0
            B[j, e] = -1.0
        return B

    @cached_property
    def weight_vector(self) -> np.ndarray:
        """Diagonal of the edge weight matrix A."""
        return np.array(self.weights)

    @cached_property
    def laplacian(self) -> np.ndarray:
        B = self.incidence
        return (B * self.weight_vector) @ B.T

    @cached_property
    def laplacian_pinv(self) -> np.ndarray:
        return deflated_pinv(self.laplacian)

    @cached_property
    def unit_laplacian_pinv(self) -> np.ndarray:
        """(B B^T)^+, the pseudoinverse ignoring edge weights."""
        B = self.incidence
        return deflated_pinv(B @ B.T)

    @cached_property
    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        """node -> list of (edge index, neighbour), in edge input order."""
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(self.n)}
        for e, (i, j) in enumerate(self.edges):
            adj[i].append((e, j))
            adj[j].append((e, i))
        return adj

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [[i, j, w] for (i, j), w in zip(self.edges, self.weights)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "WeightedGraph":
        try:
            n = int(doc["n"])
            rows = doc["edges"]
            edges = [(int(r[0]), int(r[1])) for r in rows]
            weights = [float(r[2]) if len(r) > 2 else 1.0 for r in rows]
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise InputError(f"bad graph document: {exc}") from exc
        return cls.from_edges(n, edges, weights)


def deflated_pinv(lap: np.ndarray) -> np.ndarray:
    """Pseudoinverse of a symmetric matrix whose nullspace is span{1}.

    Uses L^+ = (L + (1/n) 11^T)^{-1} - (1/n) 11^T, valid for Laplacians of
    connected graphs; avoids a full SVD.
    """
    n = lap.shape[0]
    shift = np.full((n, n), 1.0 / n)
    try:
        inv = np.linalg.inv(lap + shift)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"deflated solve failed: {exc}") from exc
    return inv - shift


def incidence_matrix(g: WeightedGraph) -> np.ndarray:
    """Signed incidence matrix of g (columns sum to zero)."""
    return g.incidence


def laplacian_pinv(g: WeightedGraph) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the weighted Laplacian B A B^T."""
    return g.laplacian_pinv


def spanning_tree(g: WeightedGraph) -> tuple[int, ...]:
    """Edge indices of the deterministic spanning tree.

    Scans edges in input order and keeps every edge that joins two distinct
    components (the first spanning tree in edge-index order), so bases built
    on top of it are reproducible.
    """
    parent = list(range(g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree: list[int] = []
    for e, (i, j) in enumerate(g.edges):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append(e)
    if len(tree) != g.n - 1:
        raise SingularityError("graph is not connected")
    return tuple(tree)


@dataclass(frozen=True)
class Cycle:
    """A simple cycle: cyclic node sequence plus its signed edge vector."""

    nodes: tuple[int, ...]
    vector: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(int(v) for v in self.nodes))
        object.__setattr__(self, "vector", np.asarray(self.vector, dtype=np.int64))

    @property
    def length(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_nodes(cls, g: WeightedGraph, nodes: Sequence[int]) -> "Cycle":
        """Build the signed vector for a node sequence (closure implied)."""
        nodes = [int(v) for v in nodes]
        if nodes[0] == nodes[-1]:
            nodes = nodes[:-1]
        if len(nodes) < 3:
            raise InputError("a cycle needs at least three nodes")
        index = {}
        for e, (i, j) in enumerate(g.edges):
            index[(i, j)] = (e, 1)
            index[(j, i)] = (e, -1)
        vec = np.zeros(g.m, dtype=np.int64)
        for a, b in zip(nodes, nodes[1:] + nodes[:1]):
            try:
                e, sign = index[(a, b)]
            except KeyError:
                raise InputError(f"no edge between consecutive nodes {a}, {b}")
            if vec[e] != 0:
                raise InputError("cycle repeats an edge")
            vec[e] = sign
        return cls(nodes=tuple(nodes), vector=vec)


@dataclass(frozen=True)
class CycleBasis:
    """A basis of m - n + 1 signed cycle vectors for Ker(B)."""

    graph: WeightedGraph
    cycles: tuple[Cycle, ...]
    kind: str  # "fundamental" | "minimum" | "explicit"
    tree_edges: tuple[int, ...] | None = None
    nontree_edges: tuple[int, ...] | None = None

    @property
    def size(self) -> int:
        return len(self.cycles)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Cycle-edge matrix: one row per basis cycle."""
        if not self.cycles:
            return np.zeros((0, self.graph.m))
        return np.array([c.vector for c in self.cycles], dtype=float)

    @cached_property
    def pinv(self) -> np.ndarray:
        return cycle_edge_pinv(self)

    @cached_property
    def lengths(self) -> tuple[int, ...]:
        return tuple(c.length for c in self.cycles)

    @cached_property
    def fingerprint(self) -> str:
        """Short hash of the cycle node sequences; tags winding vectors."""
        payload = ";".join(",".join(map(str, c.nodes)) for c in self.cycles)
        return sha256(payload.encode()).hexdigest()[:16]

    def validate(self) -> None:
        B = self.graph.incidence
        if self.size != self.graph.cycle_space_dim:
            raise RankError("wrong number of basis cycles")
        for c in self.cycles:
            bv = B.astype(np.int64) @ c.vector
            if np.any(bv != 0):
                raise RankError(f"cycle vector of {c.nodes} is not in Ker(B)")
        s = np.linalg.svd(self.matrix, compute_uv=False)
        if s.size == 0 or s[-1] <= RANK_RTOL * s[0]:
            raise RankError("cycle vectors are not linearly independent")


def explicit_cycle_basis(g: WeightedGraph, node_sequences: Iterable[Sequence[int]]) -> CycleBasis:
    """Cycle basis from user-supplied node sequences (validated)."""
    cycles = tuple(Cycle.from_nodes(g, seq) for seq in node_sequences)
    basis = CycleBasis(graph=g, cycles=cycles, kind="explicit")
    basis.validate()
    return basis


def _tree_paths(g: WeightedGraph, tree: Sequence[int]):
    """parent/parent-edge arrays for the tree, rooted at node 0."""
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(g.n)}
    for e in tree:
        i, j = g.edges[e]
        adj[i].append((e, j))
        adj[j].append((e, i))
    parent = [-1] * g.n
    parent_edge = [-1] * g.n
    order = deque([0])
    seen = [False] * g.n
    seen[0] = True
    while order:
        v = order.popleft()
        for e, w in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                parent_edge[w] = e
                order.append(w)
    return parent, parent_edge


def _tree_path_nodes(parent: list[int], a: int, b: int) -> list[int]:
    """Node path a -> b through the tree (via lowest common ancestor)."""
    up_a = [a]
    v = a
    while v != -1:
        v = parent[v]
        if v != -1:
            up_a.append(v)
    depth = {v: k for k, v in enumerate(up_a)}
    up_b = [b]
    v = b
    while v not in depth:
        v = parent[v]
        up_b.append(v)
    lca = v
    return up_a[: depth[lca] + 1] + up_b[-2::-1]


def fundamental_cycle_basis(g: WeightedGraph) -> CycleBasis:
    """One cycle per non-tree edge: the tree path closed by that edge.

    Each cycle is oriented so its defining non-tree edge has coefficient -1
    (the node sequence runs with the tree path from the edge's first node to
    its second, closing against the edge orientation).
    """
    if g.cycle_space_dim < 1:
        raise AcyclicGraphError("acyclic graph has an empty cycle basis")
    tree = spanning_tree(g)
    in_tree = set(tree)
    parent, _ = _tree_paths(g, tree)
    cycles = []
    nontree = []
    for e, (i, j) in enumerate(g.edges):
        if e in in_tree:
            continue
        nontree.append(e)
        path = _tree_path_nodes(parent, i, j)
        cycles.append(Cycle.from_nodes(g, path))
    basis = CycleBasis(
        graph=g,
        cycles=tuple(cycles),
        kind="fundamental",
        tree_edges=tuple(tree),
        nontree_edges=tuple(nontree),
    )
    basis.validate()
    return basis


def _bfs_parents(g: WeightedGraph, source: int):
    dist = [-1] * g.n
    parent = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for _, w in g.adjacency[v]:
            if dist[w] == -1:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue.append(w)
    return dist, parent


def _path_to_root(parent: list[int], v: int) -> list[int]:
    out = [v]
    while parent[out[-1]] != -1:
        out.append(parent[out[-1]])
    return out


def _orient_cycle_nodes(g: WeightedGraph, edge_set: frozenset[int]) -> list[int]:
    """Deterministic node sequence for a simple-cycle edge set."""
    touch: dict[int, list[int]] = {}
    for e in edge_set:
        i, j = g.edges[e]
        touch.setdefault(i, []).append(j)
        touch.setdefault(j, []).append(i)
    start = min(touch)
    nxt = min(touch[start])
    seq = [start, nxt]
    prev = start
    while seq[-1] != start:
        a, b = touch[seq[-1]]
        step = b if a == prev else a
        prev = seq[-1]
        seq.append(step)
    return seq[:-1]


def minimum_cycle_basis(g: WeightedGraph) -> CycleBasis:
    """Minimum-length cycle basis via Horton's candidate set.

    Candidates are the cycles C(v, e) formed by shortest paths from v to the
    endpoints of e; the shortest candidates are kept greedily under GF(2)
    independence.  Unweighted cycle length is the objective.
    """
    k = g.cycle_space_dim
    if k < 1:
        raise AcyclicGraphError("acyclic graph has an empty cycle basis")
    edge_index = {}
    for e, (i, j) in enumerate(g.edges):
        edge_index[(i, j)] = e
        edge_index[(j, i)] = e

    candidates: dict[frozenset[int], tuple] = {}
    for v in range(g.n):
        dist, parent = _bfs_parents(g, v)
        for e, (x, y) in enumerate(g.edges):
            px = _path_to_root(parent, x)
            py = _path_to_root(parent, y)
            if set(px) & set(py) != {v}:
                continue
            edges = {e}
            for path in (px, py):
                for a, b in zip(path, path[1:]):
                    edges.add(edge_index[(a, b)])
            length = dist[x] + dist[y] + 1
            if len(edges) != length:
                continue
            key = frozenset(edges)
            entry = (length, v, tuple(sorted(key)))
            if key not in candidates or entry < candidates[key]:
                candidates[key] = entry

    ordered = sorted(candidates.items(), key=lambda kv: kv[1])
    picked: list[frozenset[int]] = []
    pivots: dict[int, int] = {}  # pivot edge -> row index into reduced
    reduced: list[int] = []  # GF(2) rows as bitmasks
    for key, _ in ordered:
        row = 0
        for e in key:
            row |= 1 << e
        cur = row
        while cur:
            pivot = cur.bit_length() - 1
            if pivot not in pivots:
                break
            cur ^= reduced[pivots[pivot]]
        if cur:
            pivots[cur.bit_length() - 1] = len(reduced)
            reduced.append(cur)
            picked.append(key)
            if len(picked) == k:
                break
    if len(picked) < k:
        raise RankError("Horton candidates did not span the cycle space")

    cycles = tuple(
        Cycle.from_nodes(g, _orient_cycle_nodes(g, key)) for key in picked
    )
    basis = CycleBasis(graph=g, cycles=cycles, kind="minimum")
    basis.validate()
    return basis


def cycle_edge_pinv(basis: CycleBasis) -> np.ndarray:
    """Right pseudoinverse of the cycle-edge matrix (C C^+ = I)."""
    C = np.array([c.vector for c in basis.cycles], dtype=float)
    s = np.linalg.svd(C, compute_uv=False)
    if s.size == 0 or s[-1] <= RANK_RTOL * s[0]:
        raise RankError("cycle-edge matrix is rank deficient")
    return C.T @ np.linalg.inv(C @ C.T)


def integer_shift_solve(basis: CycleBasis, u: Sequence[int]) -> np.ndarray:
    """Integer z with C_Sigma z = u, supported on non-tree edges.

    Only fundamental bases expose the non-tree structure this relies on;
    other kinds raise BasisKindError (route through the fundamental basis).
    """
    if basis.kind != "fundamental" or basis.nontree_edges is None:
        raise BasisKindError(
            "integer shift solve needs a fundamental basis; "
            "use integer_cycle_shift to route through one"
        )
    u = np.asarray(u, dtype=np.int64)
    if u.shape != (basis.size,):
        raise InputError("winding vector has the wrong length")
    z = np.zeros(basis.graph.m, dtype=np.int64)
    for k, e in enumerate(basis.nontree_edges):
        z[e] = int(basis.cycles[k].vector[e]) * int(u[k])
    return z


def integer_cycle_shift(basis: CycleBasis, u: Sequence[int]) -> np.ndarray:
    """Integer solution of C_Sigma z = u for any basis kind.

    Non-fundamental bases are expressed over the fundamental basis of the
    same graph (C_Sigma = R C_f with integer R read off the non-tree
    columns); if R^{-1} u is not integral no integer shift exists, meaning u
    is outside the winding image, and NonIntegerWindingError is raised.
    """
    u = np.asarray(u, dtype=np.int64)
    if basis.kind == "fundamental":
        return integer_shift_solve(basis, u)
    fb = fundamental_cycle_basis(basis.graph)
    cols = list(fb.nontree_edges)
    signs = np.array([fb.cycles[k].vector[e] for k, e in enumerate(cols)])
    R = np.array([[c.vector[e] for e in cols] for c in basis.cycles]) * signs
    try:
        w = np.linalg.solve(R.astype(float), u.astype(float))
    except np.linalg.LinAlgError as exc:
        raise RankError(f"change of basis is singular: {exc}") from exc
    w_int = np.rint(w)
    if np.max(np.abs(w - w_int)) > 1e-9:
        raise NonIntegerWindingError(
            f"no integer shift for u={u.tolist()}: not in the winding image"
        )
    return integer_shift_solve(fb, w_int.astype(np.int64))


@dataclass(frozen=True)
class CycleProjection:
    """Oblique projection onto Ker(B) parallel to Img(D A B^T)."""

    matrix: np.ndarray
    weight: np.ndarray


def cycle_projection(g: WeightedGraph, D: Sequence[float] | np.ndarray) -> CycleProjection:
    """D-weighted cycle projection P_D = I - D A B^T (B D A B^T)^+ B."""
    d = np.asarray(D, dtype=float)
    if d.ndim == 2:
        d = np.diag(d)
    if d.shape != (g.m,):
        raise InputError("D must supply one positive weight per edge")
    if np.any(d <= 0.0):
        raise WeightError("D must be strictly positive on the diagonal")
    B = g.incidence
    da = d * g.weight_vector
    lap = (B * da) @ B.T
    inv = deflated_pinv(lap)
    P = np.eye(g.m) - (da[:, None] * B.T) @ inv @ B
    return CycleProjection(matrix=P, weight=d)
