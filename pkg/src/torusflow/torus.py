"""Geometry of the n-torus: wrapped differences, winding numbers and
vectors, winding-cell membership via polytopes, and candidate enumeration.

The canonical phase representative lives in [-pi, pi).  Edge differences
are delta_e = wrap(theta_i - theta_j) for an edge (i, j); a winding number
is the net number of counterclockwise turns accumulated along a cycle's
node sequence, computed as (1/2pi) v_sigma^T delta.
"""
from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .errors import (
    InputError,
    NonIntegerWindingError,
    PolytopeMembershipError,
    PuncturedTorusError,
)
from .graphs import Cycle, CycleBasis, WeightedGraph, integer_cycle_shift

TWO_PI = 2.0 * math.pi
BOUNDARY_TOL = 1e-12
WINDING_INT_TOL = 1e-6


def wrap(x):
    """Wrap angles (scalar or array) into [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


def ccw_difference(alpha: float, beta: float) -> float:
    """Signed angular difference wrap(alpha - beta) in [-pi, pi)."""
    return float(wrap(float(alpha) - float(beta)))


def canonical_phases(theta) -> np.ndarray:
    """Canonical representative of a phase vector, each entry in [-pi, pi)."""
    return wrap(theta)


def rotate(theta, s: float) -> np.ndarray:
    """Rigid rotation rot_s(theta), re-canonicalized."""
    return wrap(np.asarray(theta, dtype=float) + float(s))


def canonical_rotation(theta) -> np.ndarray:
    """Rotate so node 0 has phase 0 (representative modulo rotation)."""
    theta = np.asarray(theta, dtype=float)
    return wrap(theta - theta[0])


def edge_differences(g: WeightedGraph, theta) -> np.ndarray:
    """Wrapped differences (B^T theta)_e = wrap(theta_i - theta_j).

    Raises PuncturedTorusError when a difference has geodesic length pi
    (within 1e-12), where winding numbers are undefined.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (g.n,):
        raise InputError(f"theta must have length {g.n}")
    idx = np.asarray(g.edges, dtype=int)
    delta = wrap(theta[idx[:, 0]] - theta[idx[:, 1]])
    if np.any(np.abs(delta + math.pi) < BOUNDARY_TOL):
        bad = int(np.argmin(np.abs(delta + math.pi)))
        raise PuncturedTorusError(
            f"edge {g.edges[bad]} has difference of geodesic length pi"
        )
    return delta


def winding_number(cycle: Cycle, theta) -> int:
    """Integer winding of theta along the cycle's node sequence."""
    theta = np.asarray(theta, dtype=float)
    seq = np.array(cycle.nodes + (cycle.nodes[0],))
    steps = wrap(theta[seq[:-1]] - theta[seq[1:]])
    if np.any(np.abs(steps + math.pi) < BOUNDARY_TOL):
        raise PuncturedTorusError("cycle crosses the punctured-torus boundary")
    raw = float(np.sum(steps)) / TWO_PI
    w = round(raw)
    if abs(raw - w) > WINDING_INT_TOL:
        raise NonIntegerWindingError(
            f"raw winding {raw} is {abs(raw - w):.2e} from the nearest integer"
        )
    return int(w)


def winding_bound(cycle_length: int) -> int:
    """Largest possible |w| for a cycle of the given length."""
    return (cycle_length + 1) // 2 - 1


def winding_vector(basis: CycleBasis, theta) -> np.ndarray:
    """Componentwise winding numbers along the basis cycles."""
    delta = edge_differences(basis.graph, theta)
    return winding_vector_from_differences(basis, delta)


def winding_vector_from_differences(basis: CycleBasis, delta: np.ndarray) -> np.ndarray:
    raw = basis.matrix @ np.asarray(delta, dtype=float) / TWO_PI
    u = np.rint(raw)
    dev = np.max(np.abs(raw - u)) if raw.size else 0.0
    if dev > WINDING_INT_TOL:
        raise NonIntegerWindingError(
            f"raw winding vector {raw.tolist()} deviates {dev:.2e} from integers"
        )
    return u.astype(np.int64)


def feasible_winding_bounds(basis: CycleBasis, gamma: float) -> tuple[int, ...]:
    """Per-cycle bound floor(gamma * n_sigma / 2pi) on |u_i|."""
    if not 0.0 <= gamma < math.pi:
        raise InputError("gamma must lie in [0, pi)")
    return tuple(int(math.floor(gamma * L / TWO_PI)) for L in basis.lengths)


def count_feasible_winding_vectors(basis: CycleBasis, gamma: float) -> int:
    bounds = feasible_winding_bounds(basis, gamma)
    out = 1
    for b in bounds:
        out *= 2 * b + 1
    return out


def feasible_winding_vectors(basis: CycleBasis, gamma: float) -> Iterator[np.ndarray]:
    """All candidate winding vectors in lexicographic order."""
    bounds = feasible_winding_bounds(basis, gamma)
    ranges = [range(-b, b + 1) for b in bounds]
    for combo in itertools.product(*ranges):
        yield np.array(combo, dtype=np.int64)


def torus_to_polytope(basis: CycleBasis, theta) -> tuple[np.ndarray, np.ndarray]:
    """Map theta to its polytope coordinate: (x in 1^perp, winding vector u).

    B^T x + 2pi C^+ u reproduces the wrapped differences of theta.
    """
    g = basis.graph
    delta = edge_differences(g, theta)
    u = winding_vector_from_differences(basis, delta)
    B = g.incidence
    x = g.unit_laplacian_pinv @ (B @ (delta - TWO_PI * basis.pinv @ u))
    return x, u


def polytope_to_torus(basis: CycleBasis, x, u) -> np.ndarray:
    """Phases whose wrapped differences equal B^T x + 2pi C^+ u.

    The construction shifts x by 2pi alpha where B^T alpha = z - C^+ u and
    z is an integer solution of C z = u, then wraps.
    """
    g = basis.graph
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=np.int64)
    if x.shape != (g.n,):
        raise InputError(f"x must have length {g.n}")
    if abs(float(np.sum(x))) > 1e-9 * max(1.0, float(np.max(np.abs(x)))):
        raise PolytopeMembershipError("x is not orthogonal to the all-ones vector")
    target = g.incidence.T @ x + TWO_PI * (basis.pinv @ u)
    if np.max(np.abs(target)) >= math.pi:
        raise PolytopeMembershipError(
            "B^T x + 2pi C^+ u leaves the open cube (-pi, pi)^m"
        )
    z = integer_cycle_shift(basis, u)
    alpha = g.unit_laplacian_pinv @ (g.incidence @ (z - basis.pinv @ u))
    return wrap(x - TWO_PI * alpha)


def phases_equal_mod_rotation(a, b, tol: float = 1e-9) -> bool:
    """True when two phase vectors differ by a rigid rotation within tol."""
    d = wrap(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    aligned = wrap(d - d.flat[0])
    return bool(np.max(np.abs(aligned)) <= tol)
