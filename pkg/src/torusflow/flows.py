"""Flow network problems on the n-torus.

Implements the flow-function model with its monotonicity certificate, the
linearly-extended flow function and its inverse, the acyclic closed-form
solver, the winding fixed-point map, the contraction (projection)
iteration, the complete multi-solution solver, and flow decomposition.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BalanceError,
    ConvergenceBudgetError,
    CyclicGraphError,
    FeasibilityError,
    GammaError,
    InputError,
    NonIntegerWindingError,
    TorusFlowError,
)
from .graphs import Cycle, CycleBasis, WeightedGraph, cycle_projection, fundamental_cycle_basis
from .torus import (
    TWO_PI,
    canonical_rotation,
    edge_differences,
    feasible_winding_vectors,
    polytope_to_torus,
    wrap,
)

MIN_SLOPE = 1e-9
BALANCE_TOL = 1e-8
RESIDUAL_TOL = 1e-8
FEASIBILITY_SLACK = 1e-9
DEFAULT_RHO = 1e-10
CERT_GRID = 1001


@dataclass(frozen=True)
class Certificate:
    """Monotonicity certificate of a flow function on [-gamma, gamma]."""

    gamma: float
    lmin: float
    lmax: float
    h_gamma: float
    dh_gamma: float


@dataclass(frozen=True, eq=False)
class FlowFunction:
    """Odd 2pi-periodic C^1 scalar flow map with its derivative.

    `inner_inverse`, when given, inverts h exactly on [-gamma, gamma];
    otherwise a safeguarded bisection with Newton polish is used.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inner_inverse: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "callable"
    params: dict = field(default_factory=dict)

    def certify(self, gamma: float) -> Certificate:
        """Validate oddness and strict monotonicity on [-gamma, gamma]."""
        cache = self.__dict__.setdefault("_cert_cache", {})
        if gamma in cache:
            return cache[gamma]
        if not 0.0 <= gamma < math.pi:
            raise InputError("gamma must lie in [0, pi)")
        grid = np.linspace(-gamma, gamma, CERT_GRID) if gamma > 0 else np.zeros(1)
        vals = np.asarray(self.evaluate(grid), dtype=float)
        if np.max(np.abs(vals + vals[::-1])) > 1e-12:
            raise InputError(f"flow function {self.name!r} is not odd")
        slopes = np.asarray(self.derivative(grid), dtype=float)
        lmin = float(np.min(slopes))
        lmax = float(np.max(slopes))
        if lmax < 0.0:
            raise GammaError(
                f"flow function {self.name!r} is strictly decreasing on "
                f"[-{gamma}, {gamma}]; solve the negated problem "
                "(negated(), with -p) and report -f"
            )
        if lmin < MIN_SLOPE:
            raise GammaError(
                f"flow function {self.name!r} has min slope {lmin:.3e} "
                f"< {MIN_SLOPE} on [-{gamma}, {gamma}]; the contraction "
                "certificate fails -- try gamma <- gamma - epsilon"
            )
        cert = Certificate(
            gamma=gamma,
            lmin=lmin,
            lmax=lmax,
            h_gamma=float(self.evaluate(np.array(gamma))),
            dh_gamma=float(self.derivative(np.array(gamma))),
        )
        cache[gamma] = cert
        return cert

    def negated(self) -> "FlowFunction":
        ev, dv, inv = self.evaluate, self.derivative, self.inner_inverse
        return FlowFunction(
            evaluate=lambda y: -np.asarray(ev(y), dtype=float),
            derivative=lambda y: -np.asarray(dv(y), dtype=float),
            inner_inverse=None if inv is None else (lambda v: inv(-np.asarray(v))),
            name=f"neg({self.name})",
            params=dict(self.params),
        )

    @staticmethod
    def sin_family() -> "FlowFunction":
        return FlowFunction(
            evaluate=np.sin,
            derivative=np.cos,
            inner_inverse=lambda v: np.arcsin(np.clip(v, -1.0, 1.0)),
            name="sin",
        )

    @staticmethod
    def linear(slope: float = 1.0) -> "FlowFunction":
        slope = float(slope)
        if slope <= 0.0:
            raise InputError("linear flow family needs a positive slope")
        return FlowFunction(
            evaluate=lambda y: slope * np.asarray(y, dtype=float),
            derivative=lambda y: np.full_like(np.asarray(y, dtype=float), slope),
            inner_inverse=lambda v: np.asarray(v, dtype=float) / slope,
            name="linear",
            params={"slope": slope},
        )

    @staticmethod
    def fourier(coeffs: Sequence[float]) -> "FlowFunction":
        """Odd sine series h(y) = sum_k b_k sin(k y)."""
        b = np.asarray(list(coeffs), dtype=float)
        if b.size == 0:
            raise InputError("fourier flow family needs at least one coefficient")
        k = np.arange(1, b.size + 1)

        def ev(y):
            y = np.asarray(y, dtype=float)
            return np.sin(np.multiply.outer(y, k)) @ b

        def dv(y):
            y = np.asarray(y, dtype=float)
            return np.cos(np.multiply.outer(y, k)) @ (k * b)

        return FlowFunction(
            evaluate=ev,
            derivative=dv,
            name="custom",
            params={"fourier": [float(c) for c in b]},
        )


@dataclass(frozen=True, eq=False)
class ExtendedFlowFunction:
    """Flow function continued linearly outside [-gamma, gamma].

    The continuation has slope h'(gamma), making the map strictly
    increasing on all of R, hence globally invertible.
    """

    base: FlowFunction
    gamma: float

    @cached_property
    def cert(self) -> Certificate:
        return self.base.certify(self.gamma)

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        c = self.cert
        inner = self.base.evaluate(np.clip(y, -self.gamma, self.gamma))
        hi = c.h_gamma + c.dh_gamma * (y - self.gamma)
        lo = -c.h_gamma + c.dh_gamma * (y + self.gamma)
        return np.where(y >= self.gamma, hi, np.where(y <= -self.gamma, lo, inner))

    def inverse(self, v):
        v = np.asarray(v, dtype=float)
        c = self.cert
        out = np.empty_like(v)
        hi = v >= c.h_gamma
        lo = v <= -c.h_gamma
        mid = ~(hi | lo)
        out[hi] = self.gamma + (v[hi] - c.h_gamma) / c.dh_gamma
        out[lo] = -self.gamma + (v[lo] + c.h_gamma) / c.dh_gamma
        if np.any(mid):
            out[mid] = self._inner_inverse(v[mid])
        return out

    def _inner_inverse(self, v: np.ndarray) -> np.ndarray:
        if self.base.inner_inverse is not None:
            y = np.asarray(self.base.inner_inverse(v), dtype=float)
            return np.clip(y, -self.gamma, self.gamma)
        lo = np.full_like(v, -self.gamma)
        hi = np.full_like(v, self.gamma)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.base.evaluate(mid), dtype=float) < v
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        y = 0.5 * (lo + hi)
        for _ in range(2):
            dh = np.asarray(self.base.derivative(y), dtype=float)
            step = (np.asarray(self.base.evaluate(y), dtype=float) - v) / dh
            y = np.clip(y - step, -self.gamma, self.gamma)
        return y


def extended_inverse(h: ExtendedFlowFunction, v: float) -> float:
    """Scalar inverse of the extended flow function."""
    return float(h.inverse(np.array([float(v)]))[0])


@dataclass(frozen=True, eq=False)
class FlowNetworkProblem:
    """A flow network problem (graph, per-edge flow functions, p, gamma)."""

    graph: WeightedGraph
    flow_functions: tuple[FlowFunction, ...]
    p: np.ndarray
    gamma: float

    def __post_init__(self):
        g = self.graph
        funcs = self.flow_functions
        if isinstance(funcs, FlowFunction):
            funcs = (funcs,) * g.m
        funcs = tuple(funcs)
        if len(funcs) != g.m:
            raise InputError("need one flow function per edge")
        object.__setattr__(self, "flow_functions", funcs)
        p = np.asarray(self.p, dtype=float)
        if p.shape != (g.n,):
            raise InputError(f"p must have length {g.n}")
        if abs(float(np.sum(p))) > 1e-10 * max(1.0, float(np.max(np.abs(p)))):
            raise InputError("supply/demand vector p must sum to zero")
        object.__setattr__(self, "p", p)
        if not 0.0 <= self.gamma < math.pi:
            raise InputError("gamma must lie in [0, pi)")
        for f in funcs:
            f.certify(self.gamma)

    @classmethod
    def single_family(cls, graph, flow, p, gamma) -> "FlowNetworkProblem":
        return cls(graph=graph, flow_functions=(flow,) * graph.m, p=p, gamma=gamma)

    def with_supply(self, p) -> "FlowNetworkProblem":
        return replace(self, p=np.asarray(p, dtype=float))

    @cached_property
    def extended(self) -> tuple[ExtendedFlowFunction, ...]:
        return tuple(ExtendedFlowFunction(f, self.gamma) for f in self.flow_functions)

    @cached_property
    def lmin(self) -> np.ndarray:
        return np.array([f.certify(self.gamma).lmin for f in self.flow_functions])

    @cached_property
    def lmax(self) -> np.ndarray:
        return np.array([f.certify(self.gamma).lmax for f in self.flow_functions])

    @cached_property
    def capacity(self) -> np.ndarray:
        """Per-edge bound a_ij |h_e(gamma)| on any solution flow."""
        hg = np.array([abs(f.certify(self.gamma).h_gamma) for f in self.flow_functions])
        return self.graph.weight_vector * hg

    @cached_property
    def contraction_rate(self) -> float:
        """The infinity-norm contraction factor ||I - Lmin Lmax^{-1}||."""
        return float(np.max(1.0 - self.lmin / self.lmax))

    @cached_property
    def projection(self) -> np.ndarray:
        """Lmin-weighted cycle projection matrix."""
        return cycle_projection(self.graph, self.lmin).matrix

    @cached_property
    def cutset_flow(self) -> np.ndarray:
        """The balanced flow A B^T L^+ p, the iteration's starting point."""
        g = self.graph
        return g.weight_vector * (g.incidence.T @ (g.laplacian_pinv @ self.p))

    @cached_property
    def _edge_groups(self) -> list[tuple[ExtendedFlowFunction, np.ndarray]]:
        groups: dict[int, list[int]] = {}
        for e, f in enumerate(self.flow_functions):
            groups.setdefault(id(f), []).append(e)
        out = []
        for ids in groups.values():
            out.append((self.extended[ids[0]], np.array(ids, dtype=int)))
        return out

    def inverse_differences(self, f: np.ndarray) -> np.ndarray:
        """h_gamma^{-1}(A^{-1} f), vectorized over edges."""
        v = np.asarray(f, dtype=float) / self.graph.weight_vector
        out = np.empty_like(v)
        for ext, idx in self._edge_groups:
            out[idx] = ext.inverse(v[idx])
        return out

    def edge_flows(self, delta: np.ndarray) -> np.ndarray:
        """a_ij h_e(delta_e) for a vector of edge differences."""
        delta = np.asarray(delta, dtype=float)
        out = np.empty_like(delta)
        for e, fn in enumerate(self.flow_functions):
            out[e] = fn.evaluate(np.array(delta[e]))
        return self.graph.weight_vector * out

    def weighted_norm(self, v: np.ndarray) -> float:
        """The Lmin A weighted 2-norm used by the contraction bound."""
        la = self.lmin * self.graph.weight_vector
        return float(np.sqrt(np.sum(la * np.asarray(v) ** 2)))


@dataclass
class IterationReport:
    """Convergence record of one projection-iteration run."""

    iterations: int
    final_step: float
    rate: float
    feasible: bool = False
    infeasible_edges: tuple[int, ...] = ()
    contraction_verified: bool = True
    initial_step: float = 0.0
    weighted_steps: tuple[float, ...] = ()


@dataclass
class SolutionReport:
    """Independent residuals of a certified solution."""

    balance_residual: float
    physics_residual: float
    constraint_margin: float
    winding_deviation: float
    boundary: bool = False

    def within_tolerance(self) -> bool:
        return (
            self.balance_residual < RESIDUAL_TOL
            and self.physics_residual < RESIDUAL_TOL
            and self.constraint_margin >= -FEASIBILITY_SLACK
        )


@dataclass
class Solution:
    """A certified solution: flows, phases, winding vector, residuals."""

    f: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    report: SolutionReport
    iteration: IterationReport | None = None


def winding_fixed_point_map(
    problem: FlowNetworkProblem, basis: CycleBasis, u, f
) -> np.ndarray:
    """One application of T_u; preserves the balance constraint B f = p."""
    f = np.asarray(f, dtype=float)
    g = problem.graph
    residual = float(np.max(np.abs(g.incidence @ f - problem.p)))
    if residual >= BALANCE_TOL:
        raise BalanceError(f"f is not balanced: ||Bf - p||_inf = {residual:.3e}")
    return _apply_map(problem, basis, np.asarray(u, dtype=float), f)


def _apply_map(problem, basis, u, f):
    la = problem.lmin * problem.graph.weight_vector
    offset = TWO_PI * (basis.pinv @ u)
    return f - problem.projection @ (la * (problem.inverse_differences(f) - offset))


def projection_iteration(
    problem: FlowNetworkProblem,
    basis: CycleBasis,
    u,
    rho: float = DEFAULT_RHO,
) -> tuple[np.ndarray, IterationReport]:
    """Iterate T_u from the cutset flow until the step falls below rho.

    The iteration count is bounded by the geometric convergence estimate
    plus a safety margin of 10; exceeding twice that budget raises
    ConvergenceBudgetError (it signals violated preconditions).
    """
    if rho <= 0.0:
        raise InputError("rho must be positive")
    u = np.asarray(u, dtype=float)
    rate = problem.contraction_rate
    la = problem.lmin * problem.graph.weight_vector
    sqrt_la_min = math.sqrt(float(np.min(la)))

    f = problem.cutset_flow.copy()
    nxt = _apply_map(problem, basis, u, f)
    step_inf = float(np.max(np.abs(nxt - f))) if f.size else 0.0
    d0 = problem.weighted_norm(nxt - f)
    if d0 == 0.0 or rate == 0.0:
        budget = 11
    else:
        target = rho * sqrt_la_min / d0
        budget = 11 if target >= 1.0 else math.ceil(math.log(target) / math.log(rate)) + 10

    steps = [d0]
    contraction_ok = True
    iterations = 1
    while step_inf >= rho:
        if iterations > 2 * budget:
            raise ConvergenceBudgetError(
                f"projection iteration exceeded 2x its budget of {budget} "
                f"iterations (last step {step_inf:.3e})"
            )
        f = nxt
        nxt = _apply_map(problem, basis, u, f)
        step_inf = float(np.max(np.abs(nxt - f)))
        d = problem.weighted_norm(nxt - f)
        if d > rate * steps[-1] + 1e-12:
            contraction_ok = False
        steps.append(d)
        iterations += 1

    report = IterationReport(
        iterations=iterations,
        final_step=step_inf,
        rate=rate,
        contraction_verified=contraction_ok,
        initial_step=d0,
        weighted_steps=tuple(steps),
    )
    return nxt, report


def check_feasibility(problem: FlowNetworkProblem, f) -> tuple[bool, np.ndarray]:
    """Test |f_e| <= a_ij |h_e(gamma)| with slack; report per-edge margins."""
    margins = problem.capacity - np.abs(np.asarray(f, dtype=float))
    return bool(np.all(margins >= -FEASIBILITY_SLACK)), margins


def recover_phases(problem: FlowNetworkProblem, basis: CycleBasis, u, f) -> np.ndarray:
    """Phases of a feasible fixed-point flow, canonical modulo rotation.

    Computes the polytope coordinate x = L^+ B A (h_gamma^{-1}(A^{-1}f) -
    2pi C^+ u) and maps it back to the torus through the winding-cell
    bijection, so the returned phases reproduce the edge differences and
    carry winding vector u.
    """
    feasible, margins = check_feasibility(problem, f)
    if not feasible:
        bad = [int(e) for e in np.nonzero(margins < -FEASIBILITY_SLACK)[0]]
        raise FeasibilityError(f"flow exceeds capacity on edges {bad}")
    g = problem.graph
    u = np.asarray(u, dtype=np.int64)
    delta = problem.inverse_differences(np.asarray(f, dtype=float))
    x = g.laplacian_pinv @ (g.incidence @ (g.weight_vector * (delta - TWO_PI * (basis.pinv @ u))))
    theta = polytope_to_torus(basis, x, u)
    return canonical_rotation(theta)


def verify_solution(
    problem: FlowNetworkProblem,
    basis: CycleBasis | None,
    f,
    theta,
    u,
) -> SolutionReport:
    """Recompute all solution residuals from scratch."""
    g = problem.graph
    f = np.asarray(f, dtype=float)
    theta = np.asarray(theta, dtype=float)
    delta = edge_differences(g, theta)
    balance = float(np.max(np.abs(g.incidence @ f - problem.p)))
    physics = float(np.max(np.abs(f - problem.edge_flows(delta))))
    margin = problem.gamma - (float(np.max(np.abs(delta))) if g.m else 0.0)
    if basis is not None and basis.size:
        raw = basis.matrix @ delta / TWO_PI
        winding_dev = float(np.max(np.abs(raw - np.asarray(u, dtype=float))))
    else:
        winding_dev = 0.0
    _, margins = check_feasibility(problem, f)
    boundary = bool(np.min(margins) <= FEASIBILITY_SLACK) if g.m else False
    return SolutionReport(
        balance_residual=balance,
        physics_residual=physics,
        constraint_margin=margin,
        winding_deviation=winding_dev,
        boundary=boundary,
    )


def acyclic_solve(problem: FlowNetworkProblem) -> Solution | None:
    """Closed-form solver for trees: the unique solution or None.

    The flow is forced to A B^T L^+ p by balance alone; a solution exists
    iff every |(B^T L^+ p)_e| <= |h_e(gamma)|.
    """
    g = problem.graph
    if g.cycle_space_dim != 0:
        raise CyclicGraphError("graph has cycles; use solve_all")
    f = problem.cutset_flow
    feasible, _ = check_feasibility(problem, f)
    if not feasible:
        return None
    delta = problem.inverse_differences(f)
    x = g.laplacian_pinv @ (g.incidence @ (g.weight_vector * delta))
    theta = canonical_rotation(wrap(x))
    report = verify_solution(problem, None, f, theta, np.zeros(0, dtype=np.int64))
    if not report.within_tolerance():
        raise TorusFlowError(f"acyclic certification failed: {report}")
    it = IterationReport(iterations=0, final_step=0.0, rate=0.0, feasible=True)
    return Solution(f=f, theta=theta, u=np.zeros(0, dtype=np.int64), report=report, iteration=it)


def _solve_one_winding(problem, basis, u, rho):
    f, it = projection_iteration(problem, basis, u, rho)
    feasible, margins = check_feasibility(problem, f)
    it.feasible = feasible
    it.infeasible_edges = tuple(
        int(e) for e in np.nonzero(margins < -FEASIBILITY_SLACK)[0]
    )
    if not feasible:
        return None
    try:
        theta = recover_phases(problem, basis, u, f)
    except NonIntegerWindingError:
        # u admits no integer cycle shift, so its winding cell is empty.
        return None
    report = verify_solution(problem, basis, f, theta, u)
    if not report.within_tolerance() or report.winding_deviation > 1e-6:
        raise TorusFlowError(
            f"certification failed for winding vector {np.asarray(u).tolist()}: {report}"
        )
    return Solution(f=f, theta=theta, u=np.asarray(u, dtype=np.int64), report=report, iteration=it)


def solve_all(
    problem: FlowNetworkProblem,
    rho: float = DEFAULT_RHO,
    basis: CycleBasis | None = None,
    jobs: int = 1,
) -> list[Solution]:
    """All solutions of the flow network problem, sorted by winding vector.

    Enumerates the candidate winding box, runs the projection iteration in
    each cell (optionally across a thread pool), keeps the feasible fixed
    points, and certifies every returned solution independently.
    """
    if problem.graph.cycle_space_dim == 0:
        sol = acyclic_solve(problem)
        return [sol] if sol is not None else []
    if basis is None:
        basis = fundamental_cycle_basis(problem.graph)
    candidates = list(feasible_winding_vectors(basis, problem.gamma))
    # Materialize the shared caches before any worker threads touch them.
    problem.projection, problem.cutset_flow, problem.lmin, basis.pinv
    if jobs > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(lambda u: _solve_one_winding(problem, basis, u, rho), candidates)
            )
    else:
        results = [_solve_one_winding(problem, basis, u, rho) for u in candidates]
    solutions = [s for s in results if s is not None]
    solutions.sort(key=lambda s: tuple(s.u.tolist()))
    return solutions


def decompose_flow(g: WeightedGraph, f) -> tuple[np.ndarray, np.ndarray]:
    """Unique split f = cutset part + cycle part (the latter in Ker B)."""
    f = np.asarray(f, dtype=float)
    f_cut = g.weight_vector * (g.incidence.T @ (g.laplacian_pinv @ (g.incidence @ f)))
    return f_cut, f - f_cut


def loop_flow(cycle: Cycle, f) -> float:
    """Circulating component v_sigma^T f of a flow around one cycle."""
    return float(np.asarray(cycle.vector, dtype=float) @ np.asarray(f, dtype=float))
