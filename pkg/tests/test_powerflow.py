import json
import math

import numpy as np
import pytest

import oracles
from torusflow import (
    GammaError,
    InputError,
    MissingDataError,
    PowerCase,
    UnknownCaseError,
    builtin_case,
    case_to_problem,
    congestion,
    fundamental_cycle_basis,
    matpower_branch_to_edge,
    ptc,
    solve_all,
)

TWO_PI = 2 * math.pi
GAMMA = math.pi / 2 - 0.01


class TestPowerCase:
    def test_unit_case_gives_unit_weights(self):
        case = builtin_case("pentagon")
        prob = case_to_problem(case, 1.4)
        assert np.allclose(prob.graph.weight_vector, 1.0)
        assert prob.flow_functions[0].name == "sin"

    def test_voltage_scaling(self):
        case = PowerCase(
            buses=((2.0, 0.5), (1.0, -0.25), (0.5, -0.25)),
            branches=((0, 1, 1.0), (1, 2, 2.0), (2, 0, 3.0)),
        )
        prob = case_to_problem(case, 1.0)
        assert np.allclose(prob.graph.weight_vector, [2.0, 1.0, 3.0])

    def test_mw_units_normalized(self):
        case = PowerCase(
            buses=((1.0, 50.0), (1.0, -50.0)),
            branches=((0, 1, 1.0),),
            base_mva=100.0,
        )
        assert np.allclose(case.supply, [0.5, -0.5])

    def test_small_imbalance_rebalanced(self):
        case = PowerCase(
            buses=((1.0, 1.001), (1.0, -1.0)), branches=((0, 1, 1.0),)
        )
        assert case.rebalance_correction == pytest.approx(0.0005)
        assert abs(float(np.sum(case.supply))) < 1e-12

    def test_large_imbalance_rejected(self):
        with pytest.raises(InputError, match="imbalance"):
            PowerCase(buses=((1.0, 1.1), (1.0, -1.0)), branches=((0, 1, 1.0),))

    def test_bad_voltage_rejected(self):
        with pytest.raises(InputError):
            PowerCase(buses=((0.0, 0.0), (1.0, 0.0)), branches=((0, 1, 1.0),))

    def test_gamma_limit(self):
        with pytest.raises(GammaError):
            case_to_problem(builtin_case("pentagon"), math.pi / 2)

    def test_json_round_trip(self):
        case = builtin_case("ring12-asym")
        again = PowerCase.from_dict(case.to_dict())
        assert again.buses == case.buses
        assert again.branches == case.branches


class TestBuiltinCases:
    def test_ring12_sym_profile(self):
        case = builtin_case("ring12-sym")
        p = case.supply
        assert p[11] == 1.0 and p[5] == -1.0
        assert np.count_nonzero(p) == 2

    def test_ring12_asym_profile(self):
        case = builtin_case("ring12-asym")
        p = case.supply
        assert p[11] == 1.0 and p[2] == -1.0

    def test_expo_shape(self):
        case = builtin_case("expo(2)")
        assert case.n == 9
        assert len(case.branches) == 10
        prob = case_to_problem(case, 1.4)
        assert fundamental_cycle_basis(prob.graph).size == 2
        assert builtin_case("expo(3)").n == 13

    def test_pentagon(self):
        case = builtin_case("pentagon")
        assert case.n == 5
        assert np.allclose(case.supply, 0.0)

    def test_unknown(self):
        with pytest.raises(UnknownCaseError):
            builtin_case("ring13")

    def test_rts24_requires_data(self):
        with pytest.raises(MissingDataError):
            builtin_case("rts24-mod")

    def test_rts24_profile_balances(self, tmp_path):
        doc = {
            "buses": [{"v": 1.0} for _ in range(24)],
            "branches": [[i, i + 1, 1.0] for i in range(23)] + [[23, 0, 1.0]],
        }
        path = tmp_path / "rts.json"
        path.write_text(json.dumps(doc))
        case = builtin_case("rts24-mod", data_path=path)
        assert case.n == 24
        assert abs(float(np.sum(case.supply))) < 1e-12
        assert case.supply[2] == pytest.approx(-268.48 / 100.0)

    def test_matpower_stub(self):
        i, j, b = matpower_branch_to_edge([1, 3, 0.01, 0.2, 0.0])
        assert (i, j, b) == (0, 2, 5.0)
        with pytest.raises(InputError):
            matpower_branch_to_edge([1, 2, 0.0, -1.0, 0.0])


class TestCongestion:
    def test_zero_flow(self):
        prob = case_to_problem(builtin_case("pentagon"), 1.4)
        sols = solve_all(prob)
        sync = next(s for s in sols if s.u[0] == 0)
        assert congestion(sync, prob) == 0.0

    def test_pentagon_splay(self):
        prob = case_to_problem(builtin_case("pentagon"), 1.4)
        sols = solve_all(prob)
        splay = next(s for s in sols if s.u[0] == 1)
        assert congestion(splay, prob) == pytest.approx(math.sin(TWO_PI / 5), abs=1e-9)

    def test_bounded_by_sin_gamma(self):
        prob = case_to_problem(builtin_case("ring12-sym"), GAMMA)
        prob = prob.with_supply(0.5 * prob.p)
        for sol in solve_all(prob):
            assert congestion(sol, prob) <= math.sin(GAMMA) + 1e-9


class TestPtc:
    def test_symmetric_u0_matches_two_sin_gamma(self):
        res = ptc(builtin_case("ring12-sym"), [0], GAMMA, tol=1e-7)
        oracle = oracles.ring_two_path_ptc(12, 11, 5, 0, GAMMA)
        assert oracle == pytest.approx(2 * math.sin(GAMMA), abs=1e-12)
        assert res.ptc == pytest.approx(oracle, abs=1e-4)

    def test_symmetric_mirror(self):
        r_plus = ptc(builtin_case("ring12-sym"), [1], GAMMA, tol=1e-7)
        r_minus = ptc(builtin_case("ring12-sym"), [-1], GAMMA, tol=1e-7)
        assert r_plus.ptc == pytest.approx(r_minus.ptc, abs=1e-5)

    def test_asymmetric_matches_oracle(self):
        for u in (-1, 0, 1):
            res = ptc(builtin_case("ring12-asym"), [u], GAMMA, tol=1e-7)
            oracle = oracles.ring_two_path_ptc(12, 11, 2, u, GAMMA)
            assert res.ptc == pytest.approx(oracle, abs=1e-4)

    def test_bracket_certified(self):
        from torusflow.powerflow import _existence_probe

        case = builtin_case("ring12-sym")
        tol = 1e-5
        res = ptc(case, [1], GAMMA, tol=tol)
        base = case_to_problem(case, GAMMA)
        basis = fundamental_cycle_basis(base.graph)
        ok_lo, _ = _existence_probe(base.with_supply(res.ptc * base.p), basis, [1], 1e-10)
        ok_hi, _ = _existence_probe(
            base.with_supply((res.ptc + 2 * tol) * base.p), basis, [1], 1e-10
        )
        assert ok_lo and not ok_hi

    def test_curve_shape(self):
        res = ptc(builtin_case("ring12-sym"), [0], GAMMA, tol=1e-5, curve_points=5)
        assert res.curve[0].scale == 0.0
        assert res.curve[0].exists
        assert not res.curve[-1].exists
        feasible = [s for s in res.curve if s.exists]
        assert all(0.0 <= s.congestion <= 1.0 for s in feasible)
        assert all(len(s.loop_flows) == 1 for s in feasible)

    def test_zero_profile_rejected(self):
        with pytest.raises(InputError):
            ptc(builtin_case("pentagon"), [0], 1.4)
