"""Lossless AC active power flow as a flow network problem on the torus.

Covers case ingestion (with rebalancing), translation to sin-family flow
problems, power-transmission-capacity sweeps by certified bisection, and
congestion reporting.  Voltage magnitudes are inputs, never solved for.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GammaError, InputError, MissingDataError, UnknownCaseError
from .flows import (
    FlowFunction,
    FlowNetworkProblem,
    Solution,
    check_feasibility,
    projection_iteration,
)
from .graphs import CycleBasis, WeightedGraph, fundamental_cycle_basis

REBALANCE_LIMIT = 0.01
GAMMA_LIMIT = math.pi / 2 - 1e-9


@dataclass(frozen=True)
class PowerCase:
    """Buses (voltage magnitude, active power) plus susceptance branches.

    Power entries may be MW (give base_mva) or already per-unit.  A small
    imbalance is removed by subtracting the mean; corrections beyond 1% of
    total generation are rejected as bad data.
    """

    buses: tuple[tuple[float, float], ...]  # (V_i, p_i)
    branches: tuple[tuple[int, int, float], ...]  # (i, j, susceptance)
    base_mva: float | None = None
    name: str = ""
    rebalance_correction: float = field(default=0.0, compare=False)

    def __post_init__(self):
        buses = tuple((float(v), float(p)) for v, p in self.buses)
        branches = tuple((int(i), int(j), float(b)) for i, j, b in self.branches)
        if any(v <= 0.0 for v, _ in buses):
            raise InputError("all voltage magnitudes must be positive")
        if any(b <= 0.0 for _, _, b in branches):
            raise InputError("all branch susceptances must be positive")
        p = np.array([pw for _, pw in buses])
        imbalance = float(np.sum(p))
        total_gen = float(np.sum(p[p > 0.0]))
        correction = imbalance / len(buses)
        if abs(imbalance) > 1e-10 * max(1.0, float(np.max(np.abs(p)))):
            if total_gen == 0.0 or abs(imbalance) > REBALANCE_LIMIT * total_gen:
                raise InputError(
                    f"case imbalance {imbalance:.6g} exceeds 1% of generation"
                )
            buses = tuple((v, pw - correction) for v, pw in buses)
        else:
            correction = 0.0
        object.__setattr__(self, "buses", buses)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "rebalance_correction", correction)

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def supply(self) -> np.ndarray:
        """Balanced active power vector in per-unit."""
        p = np.array([pw for _, pw in self.buses])
        if self.base_mva:
            p = p / float(self.base_mva)
        return p

    def scaled(self, scale: float) -> "PowerCase":
        buses = tuple((v, scale * pw) for v, pw in self.buses)
        return PowerCase(
            buses=buses, branches=self.branches, base_mva=self.base_mva, name=self.name
        )

    def to_dict(self) -> dict:
        doc = {
            "buses": [{"v": v, "p": p} for v, p in self.buses],
            "branches": [[i, j, b] for i, j, b in self.branches],
        }
        if self.base_mva:
            doc["base_mva"] = self.base_mva
        return doc

    @classmethod
    def from_dict(cls, doc: dict, name: str = "") -> "PowerCase":
        try:
            buses = tuple((float(b["v"]), float(b["p"])) for b in doc["buses"])
            branches = tuple(
                (int(r[0]), int(r[1]), float(r[2])) for r in doc["branches"]
            )
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise InputError(f"bad power case document: {exc}") from exc
        return cls(
            buses=buses,
            branches=branches,
            base_mva=doc.get("base_mva"),
            name=name or doc.get("name", ""),
        )


def case_to_problem(case: PowerCase, gamma: float) -> FlowNetworkProblem:
    """Flow problem with edge weights V_i V_j b_ij and sine flow functions."""
    if gamma >= GAMMA_LIMIT:
        raise GammaError(
            f"gamma = {gamma} >= pi/2 - 1e-9 breaks the sine monotonicity "
            "certificate; use a strictly smaller maximum power angle"
        )
    volts = [v for v, _ in case.buses]
    edges = [(i, j) for i, j, _ in case.branches]
    weights = [volts[i] * volts[j] * b for i, j, b in case.branches]
    graph = WeightedGraph.from_edges(case.n, edges, weights)
    return FlowNetworkProblem.single_family(
        graph, FlowFunction.sin_family(), case.supply, gamma
    )


def congestion(solution: Solution, problem: FlowNetworkProblem) -> float:
    """Maximum normalized edge loading max_e |f_e / a_ij|."""
    return float(np.max(np.abs(solution.f / problem.graph.weight_vector)))


@dataclass(frozen=True)
class SweepSample:
    """One existence probe of a PTC sweep."""

    scale: float
    exists: bool
    congestion: float | None
    loop_flows: tuple[float, ...]


@dataclass
class SweepResult:
    """PTC of one winding vector plus its sampled congestion curve."""

    u: np.ndarray
    ptc: float | None
    curve: tuple[SweepSample, ...]


def _existence_probe(problem, basis, u, rho):
    flow, _ = projection_iteration(problem, basis, u, rho)
    feasible, _ = check_feasibility(problem, flow)
    return feasible, flow


def ptc(
    case: PowerCase,
    u,
    gamma: float,
    tol: float = 1e-6,
    rho: float = 1e-10,
    basis: CycleBasis | None = None,
    curve_points: int = 9,
) -> SweepResult:
    """Largest scale P of the case's profile with a winding-u solution.

    Bisection on P with certified brackets: existence holds at the
    returned value and fails at most tol above it.  Assumes a single
    existence interval [0, PTC], as the incremental sweep it replaces did.
    """
    if tol <= 0.0:
        raise InputError("tol must be positive")
    u = np.asarray(u, dtype=np.int64)
    base = case_to_problem(case, gamma)
    if basis is None:
        basis = fundamental_cycle_basis(base.graph)
    p_hat = base.p
    if float(np.max(np.abs(p_hat))) == 0.0:
        raise InputError("the case profile is identically zero; nothing to scale")

    def probe(scale: float):
        return _existence_probe(base.with_supply(scale * p_hat), basis, u, rho)

    exists0, flow0 = probe(0.0)
    if not exists0:
        return SweepResult(u=u, ptc=None, curve=())

    cap = base.capacity
    incident = np.abs(base.graph.incidence)  # n x m, 1 where edge touches node
    node_caps = incident @ cap
    mask = np.abs(p_hat) > 0.0
    hi = float(np.min(node_caps[mask] / np.abs(p_hat[mask]))) * (1.0 + 1e-9) + tol
    exists_hi, _ = probe(hi)
    while exists_hi:
        hi *= 2.0
        exists_hi, _ = probe(hi)

    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        exists_mid, _ = probe(mid)
        if exists_mid:
            lo = mid
        else:
            hi = mid

    curve = []
    for scale in np.linspace(0.0, lo, curve_points):
        exists, flow = probe(float(scale))
        loading = float(np.max(np.abs(flow / base.graph.weight_vector)))
        loops = tuple(float(c.vector @ flow) for c in basis.cycles)
        curve.append(
            SweepSample(
                scale=float(scale),
                exists=exists,
                congestion=loading if exists else None,
                loop_flows=loops if exists else (),
            )
        )
    # hi kept the no-solution side of the bracket throughout the bisection.
    curve.append(SweepSample(scale=hi, exists=False, congestion=None, loop_flows=()))
    return SweepResult(u=u, ptc=lo, curve=tuple(curve))


_RING12_SYM = {"supply_node": 11, "demand_node": 5}
_RING12_ASYM = {"supply_node": 11, "demand_node": 2}

# Modified supply/demand profile for the 24-bus reliability test system, in
# MW on a 100 MVA base; sums to zero exactly.
RTS24_MOD_P = (
    8.40, 9.27, -268.48, -99.14, -79.96, -68.63, 63.65, -142.41,
    -245.21, 95.83, 100.00, 0.00, -193.50, -143.39, -153.00, 0.00,
    0.00, 0.00, 26.57, 100.00, 0.00, 0.00, 990.00, 0.00,
)


def _ring_case(n: int, supply_node: int, demand_node: int, name: str) -> PowerCase:
    buses = [[1.0, 0.0] for _ in range(n)]
    buses[supply_node][1] = 1.0
    buses[demand_node][1] = -1.0
    branches = tuple((i, (i + 1) % n, 1.0) for i in range(n))
    return PowerCase(
        buses=tuple((v, p) for v, p in buses), branches=branches, name=name
    )


def _expo_case(s: int) -> PowerCase:
    if s < 1:
        raise InputError("expo(s) needs s >= 1")
    n = 4 * s + 1
    branches = []
    for k in range(s):
        base = 4 * k
        ring = [base, base + 1, base + 2, base + 3, base + 4]
        branches.extend((a, b, 1.0) for a, b in zip(ring, ring[1:]))
        branches.append((base + 4, base, 1.0))
    return PowerCase(
        buses=tuple((1.0, 0.0) for _ in range(n)),
        branches=tuple(branches),
        name=f"expo({s})",
    )


def builtin_case(name: str, data_path: str | Path | None = None) -> PowerCase:
    """Named study cases: ring12-sym, ring12-asym, pentagon, expo(s), rts24-mod.

    rts24-mod carries the modified supply/demand profile but needs the
    branch susceptances and voltage magnitudes from a user-supplied case
    file (they are not tabulated in public sources used here).
    """
    key = name.strip().lower()
    if key == "ring12-sym":
        return _ring_case(12, name="ring12-sym", **_RING12_SYM)
    if key == "ring12-asym":
        return _ring_case(12, name="ring12-asym", **_RING12_ASYM)
    if key == "pentagon":
        return PowerCase(
            buses=tuple((1.0, 0.0) for _ in range(5)),
            branches=tuple((i, (i + 1) % 5, 1.0) for i in range(5)),
            name="pentagon",
        )
    match = re.fullmatch(r"expo\((\d+)\)", key) or re.fullmatch(r"expo(\d+)", key)
    if match:
        return _expo_case(int(match.group(1)))
    if key == "rts24-mod":
        if data_path is None:
            raise MissingDataError(
                "rts24-mod needs a case file with branch susceptances and "
                "voltage magnitudes (buses[].v, branches[][i,j,b])"
            )
        doc = json.loads(Path(data_path).read_text())
        try:
            volts = [float(b["v"]) for b in doc["buses"]]
            branches = tuple(
                (int(r[0]), int(r[1]), float(r[2])) for r in doc["branches"]
            )
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise InputError(f"bad rts24 data file: {exc}") from exc
        if len(volts) != 24:
            raise InputError("rts24-mod expects 24 buses")
        buses = tuple((volts[i], RTS24_MOD_P[i]) for i in range(24))
        return PowerCase(buses=buses, branches=branches, base_mva=100.0, name="rts24-mod")
    raise UnknownCaseError(f"unknown built-in case {name!r}")


def matpower_branch_to_edge(record) -> tuple[int, int, float]:
    """Map one MATPOWER branch row to (i, j, susceptance).

    MATPOWER's branch matrix stores [fbus, tbus, r, x, b, ...] with 1-based
    bus numbers.  For the lossless model used here the series resistance r
    and shunt charging b are dropped and the line susceptance is 1/x.  Full
    MATPOWER case parsing is intentionally not provided.
    """
    fbus, tbus, _r, x = record[0], record[1], record[2], record[3]
    if x <= 0:
        raise InputError("branch reactance must be positive for the lossless model")
    return int(fbus) - 1, int(tbus) - 1, 1.0 / float(x)
