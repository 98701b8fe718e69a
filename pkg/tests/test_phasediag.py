import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critline import phasediag as pd
from critline.eta import theta_thresholds, toy_two_param_oracle


def _instance_1p(alpha=0.2, beta=0.3):
    return pd.CrtPrmInstance("1crt", N=4, alpha=alpha, beta=beta, phi_domain=(0.0, 0.5))


@given(st.one_of(st.floats(0.001, 0.2), st.floats(0.3, 0.499)))
def test_1crt_brackets_planted_point(phi_star):
    oracle = pd.PlantedStepOracle(phi_star)
    out = pd.solve_1crt(_instance_1p(), oracle, tol=1e-3)
    lo, hi = out.critical_estimate
    assert lo <= phi_star <= hi
    assert hi - lo <= 1e-3
    assert out.queries == 2 + math.ceil(math.log2(0.5 / 1e-3))
    assert out.decision is (pd.Decision.YES if phi_star <= 0.2 else pd.Decision.NO)


def test_1crt_promise_violation():
    with pytest.raises(pd.PromiseViolation):
        pd.solve_1crt(_instance_1p(), pd.PlantedStepOracle(0.25))


def test_1crt_endpoint_cases():
    assert pd.solve_1crt(_instance_1p(), pd.PlantedStepOracle(-1.0)).decision is pd.Decision.YES
    assert pd.solve_1crt(_instance_1p(), pd.PlantedStepOracle(2.0)).decision is pd.Decision.NO


def _instance_2p():
    return pd.CrtPrmInstance(
        "2crt", N=4, phi_domain=(0.0, 0.3), alpha1=0.7, beta1=1.4, kappa=0.02, theta_domain=(0.0, 2.0)
    )


@pytest.mark.parametrize("theta_star, decision", [(1.6, pd.Decision.YES), (0.5, pd.Decision.NO)])
def test_2crt_planted(theta_star, decision):
    oracle = pd.PlantedLineOracle(0.1, theta_star)
    out = pd.solve_2crt(_instance_2p(), oracle, tol=1e-3)
    assert out.decision is decision
    lo, hi = out.critical_estimate
    assert lo <= 0.1 <= hi


def test_2crt_split_rectangle():
    oracle = pd.PlantedLineOracle(0.1, lambda phi: 1.6 if phi < 0.13 else 0.5)
    with pytest.raises(pd.PromiseViolation):
        pd.solve_2crt(_instance_2p(), oracle)


def test_locate_theta():
    oracle = pd.PlantedLineOracle(0.1, 1.234)
    lo, hi = pd.locate_critical_theta(oracle, 0.2, 0.0, 2.0, 1e-4)
    assert lo <= 1.234 <= hi
    with pytest.raises(pd.PromiseViolation):
        pd.locate_critical_theta(oracle, 0.05, 0.0, 2.0)


def test_brute_scan_workers_agree():
    inst = _instance_1p()
    a = pd.brute_scan(inst, pd.PlantedStepOracle(0.13), 101)
    b = pd.brute_scan(inst, pd.PlantedStepOracle(0.13), 101, workers=3)
    assert a.to_dict() == b.to_dict()
    assert a.notes["changes"] == 1
    assert a.critical_estimate[0] <= 0.13 <= a.critical_estimate[1]


def test_query_counter():
    o = pd.PlantedStepOracle(0.1)
    o.classify(0.0)
    o.classify(0.3)
    assert o.query_count == 2
    o.reset_count()
    assert o.query_count == 0
    with pytest.raises(ValueError):
        o.evaluate(0.1, 0.2)


def test_instance_from_dict():
    inst = pd.instance_from_dict({"kind": "1crt", "N": 3, "alpha": 0.1, "beta": 0.2, "phi_domain": [0, 1]})
    assert inst.phi_domain == (0.0, 1.0)
    with pytest.raises(ValueError):
        pd.instance_from_dict({"kind": "1crt", "N": 3, "alpha": 0.1, "beta": 0.2, "bogus": 1})
    with pytest.raises(ValueError):
        pd.CrtPrmInstance("1crt", N=3, alpha=0.3, beta=0.2)
    with pytest.raises(ValueError):
        pd.CrtPrmInstance("3crt", N=3)


@pytest.fixture(scope="module")
def eta_oracle_1p():
    return pd.end_to_end_eta_oracle(t=6)


def test_eta_oracle_single_change(eta_oracle_1p):
    inst = pd.toy_instance_1p()
    scan = pd.brute_scan(inst, eta_oracle_1p, 200)
    assert scan.notes["changes"] == 1
    sol = pd.solve_1crt(inst, eta_oracle_1p, 1e-3)
    assert sol.queries <= 12
    lo, hi = sol.critical_estimate
    s_lo, s_hi = scan.critical_estimate
    assert lo <= s_hi and s_lo <= hi
    assert sol.decision is pd.Decision.YES


def test_eta_oracle_phases(eta_oracle_1p):
    a = eta_oracle_1p.evaluate(0.0)
    b = eta_oracle_1p.evaluate(0.3)
    assert a.phase is pd.Phase.A and a.gap >= 0.5 and a.order_parameter == 1.0
    assert b.phase is pd.Phase.B and b.ground_interval[1] <= -1.0
    assert b.order_parameter == 0.0


def test_ed_mode_agrees_with_limit_mode():
    ed = pd.end_to_end_eta_oracle(t=6, mode="ed", dense_size=5)
    lim = pd.end_to_end_eta_oracle(t=6, mode="limit", dense_size=5)
    for phi in (0.0, 0.05, 0.2, 0.4):
        assert ed.classify(phi) is lim.classify(phi)
    assert ed.evaluate(0.0).order_parameter == pytest.approx(1.0)


def test_ed_mode_size_cap():
    with pytest.raises(ValueError):
        pd.end_to_end_eta_oracle(t=6, mode="ed", dense_size=8)


def test_two_param_eta_band():
    oracle = toy_two_param_oracle(2)
    eo = pd.end_to_end_eta_oracle(oracle, t=8, params=2)
    inst = pd.toy_instance_2p(oracle)
    sol = pd.solve_2crt(inst, eo, 1e-3)
    assert sol.decision is pd.Decision.YES
    lo, hi = theta_thresholds(oracle)
    phi = sum(sol.notes["S_kappa"]) / 2
    t_lo, t_hi = pd.locate_critical_theta(eo, phi, 0.0, 2.0, 1e-3)
    assert lo <= t_lo and t_hi <= hi


def test_two_param_no_instance():
    oracle = toy_two_param_oracle(1)
    eo = pd.end_to_end_eta_oracle(oracle, t=8, params=2)
    assert pd.solve_2crt(pd.toy_instance_2p(oracle), eo, 1e-3).decision is pd.Decision.NO


def test_phase_diagram_serialization():
    out = pd.solve_1crt(_instance_1p(), pd.PlantedStepOracle(0.1))
    d = out.to_dict()
    assert d["decision"] == "YES"
    assert out.csv_rows()[0][-1] == "PhaseA"
    assert np.all(np.diff([r[0] for r in out.csv_rows()]) > 0)
