"""Power transmission capacity of a 12-bus ring, per winding number.

Reproduces the loop-flow study: the symmetric supply/demand profile is
best served by the zero-winding solution, while the asymmetric profile
carries the most power on a solution with a unit loop flow.  Sweep
results go to CSV for plotting.
"""
import csv
import math
from pathlib import Path

from torusflow import builtin_case, case_to_problem, fundamental_cycle_basis, ptc
from torusflow.torus import feasible_winding_vectors

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

GAMMA = math.pi / 2 - 0.01  # largest angle the sine certificate admits


def sweep(case_name):
    case = builtin_case(case_name)
    problem = case_to_problem(case, GAMMA)
    basis = fundamental_cycle_basis(problem.graph)
    print(f"\n=== {case_name} (gamma = {GAMMA:.4f}) ===")
    rows = []
    results = {}
    for u in feasible_winding_vectors(basis, GAMMA):
        res = ptc(case, u, GAMMA, tol=1e-6, curve_points=7)
        results[int(u[0])] = res.ptc
        print(f"  winding {int(u[0]):+d}: PTC = {res.ptc:.6f}")
        for s in res.curve:
            rows.append([int(u[0]), s.scale, s.exists, s.congestion])
    best = max(results, key=results.get)
    print(f"  -> largest capacity at winding {best:+d}")
    path = OUT / f"ptc_{case_name}.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "P", "exists", "congestion"])
        writer.writerows(rows)
    print(f"  curve samples written to {path}")
    return results


sym = sweep("ring12-sym")
asym = sweep("ring12-asym")

print("\n=== summary ===")
print(f"  symmetric profile : PTC(0) = {sym[0]:.4f} = 2 sin(gamma) "
      f"= {2 * math.sin(GAMMA):.4f}; PTC(u) == PTC(-u)")
print(f"  asymmetric profile: PTC at winding +1 ({asym[1]:.4f}) beats "
      f"winding 0 ({asym[0]:.4f}) -- the loop flow relieves the short path")
