import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critline import circuit as cs
from critline import eta as E
from critline import hamsim as hs
from critline.encoding import bit_length
from critline.qpe import low_half_mass, wrap_phase


@pytest.fixture(scope="module")
def toy1():
    return E.toy_one_param_oracle()


@pytest.fixture(scope="module")
def toy2():
    return E.toy_two_param_oracle(2)


def test_toy_spectra_in_unit_interval(toy1, toy2):
    for o in (toy1, toy2, E.toy_two_param_oracle(1)):
        w = o.spectrum[0]
        assert 0 <= w[0] and w[-1] < 0.5


def test_lambda_star_and_thresholds(toy2):
    assert toy2.lambda_star() == 2
    assert E.toy_two_param_oracle(1).lambda_star() == 1
    lo, hi = E.theta_thresholds(toy2)
    assert lo == pytest.approx(2 - 0.5 - 1 / 20)
    assert hi == pytest.approx(2 - 0.4 + 1 / 20)


@given(st.floats(0, 0.5, allow_nan=False), st.integers(0, 15))
def test_eigenstate_input_reduces_to_comparator_mass(phi, g):
    # with t >= bitlen(N) the index extraction is exact and one branch remains
    oracle = E.toy_one_param_oracle()
    lam = oracle.spectrum[0][g]
    ev = E.eta_one(oracle, phi, 6, g)
    assert ev.value == pytest.approx(low_half_mass(6, wrap_phase(lam - phi)), abs=1e-12)
    assert ev.invalid_mass == 0.0


@given(st.floats(0, 0.3, allow_nan=False), st.floats(0, 2.5, allow_nan=False), st.integers(0, 15))
def test_two_param_eigenstate_form(phi, theta, g):
    oracle = E.toy_two_param_oracle(2)
    lam = oracle.spectrum[0][g]
    b = oracle.b_expectations()[g]
    ev = E.eta_two(oracle, phi, theta, 8, g)
    assert ev.value == pytest.approx((b - theta) * low_half_mass(8, wrap_phase(lam - phi)), abs=1e-12)


@given(st.floats(0, 0.3, allow_nan=False), st.floats(0, 1, allow_nan=False), st.floats(1, 2.5, allow_nan=False))
def test_two_param_linear_in_theta(phi, th1, th2):
    oracle = E.toy_two_param_oracle(2)
    vec = np.random.default_rng(0).standard_normal(16)
    a = E.eta_two(oracle, phi, th1, 8, vec).value
    b = E.eta_two(oracle, phi, th2, 8, vec).value
    one = E.eta_one(oracle, phi, 8, vec).value
    assert a - b == pytest.approx((th2 - th1) * one, abs=1e-10)


@pytest.mark.parametrize("t", [2, 4])
def test_fast_matches_circuit_with_tail(toy1, t):
    # t = 2 < bitlen(4) exercises the extraction tail
    vec = np.random.default_rng(t).standard_normal(16)
    for phi in (0.05, 0.2):
        fast = E.eta_one(toy1, phi, t, vec).value
        slow = E.eta_one(toy1, phi, t, vec, path="circuit").value
        assert fast == pytest.approx(slow, abs=1e-12)


def test_two_param_fast_matches_circuit(toy2):
    vec = np.random.default_rng(7).standard_normal(16) + 1j * np.random.default_rng(8).standard_normal(16)
    fast = E.eta_two(toy2, 0.1, 1.2, 4, vec).value
    slow = E.eta_two(toy2, 0.1, 1.2, 4, vec, path="circuit").value
    assert fast == pytest.approx(slow, abs=1e-12)


def test_superposition_below_max(toy1):
    vec = np.random.default_rng(1).standard_normal(16)
    best = E.eta_one_max(toy1, 0.1, 6)
    assert E.eta_one(toy1, 0.1, 6, vec).value <= best.value + 1e-12
    g = best.params["argmax"]
    assert best.value == E.eta_one(toy1, 0.1, 6, g).value


def test_max_increasing_across_window(toy1):
    # the lowest eigenphase controls the maximum; phi sweeps up through its window
    from critline.qpe import far_endpoint_offset, near_endpoint_offset

    bottom = toy1.spectrum[0][0]
    phis = np.linspace(bottom - far_endpoint_offset(6), bottom - near_endpoint_offset(6), 12)
    vals = [E.eta_one_max(toy1, p, 6).value for p in phis]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_noise_path_is_seeded(toy1):
    n = cs.NoiseSpec(2.0**-8, seed=3)
    a = E.eta_one(toy1, 0.1, 4, 0, noise=n).value
    b = E.eta_one(toy1, 0.1, 4, 0, noise=n).value
    exact = E.eta_one(toy1, 0.1, 4, 0).value
    assert a == b
    assert abs(a - exact) < 0.05


def test_trotter_unitary_close_to_exact(toy1):
    exact = E.eta_one(toy1, 0.1, 6, 0).value
    approx = E.eta_one(toy1, 0.1, 6, 0, unitary="trotter", trotter_steps=64).value
    assert approx == pytest.approx(exact, abs=1e-3)
    with pytest.raises(ValueError):
        E.eta_one(toy1, 0.1, 6, 0, unitary="trotter")


@pytest.mark.parametrize("n_index", [1, 4, 5, 13])
@pytest.mark.parametrize("t", [1, 2, 3, 4, 5])
def test_extraction_accounts_for_all_mass(n_index, t):
    branches, invalid = E.extraction_branches(n_index, t)
    total = sum(b.weight for b in branches) + invalid
    assert total == pytest.approx(1.0, abs=1e-12)
    assert all(0 <= b.z_prime <= n_index for b in branches)
    if t >= bit_length(n_index):
        assert len(branches) == 1 and branches[0].z_prime == n_index


@pytest.mark.parametrize("n_index, t", [(5, 2), (13, 2), (4, 3)])
def test_extraction_circuit_matches_closed_form(n_index, t):
    fast, inv_f = E.extraction_branches(n_index, t)
    slow, inv_s = E.extraction_branches(n_index, t, via_circuit=True)
    fd = {b.z: b.weight for b in fast}
    sd = {b.z: b.weight for b in slow}
    for z in set(fd) | set(sd):
        assert fd.get(z, 0.0) == pytest.approx(sd.get(z, 0.0), abs=1e-12)
    assert inv_f == pytest.approx(inv_s, abs=1e-12)
    with pytest.raises(ValueError):
        E.extraction_branches(5, 6, via_circuit=True)


def test_guard_rejects_long_index():
    o = E.toy_two_param_oracle(2)
    o.d_prime = 4.0
    ev = E.eta_two(o, 0.1, 0.0, 2, 0)
    assert any(r.get("guarded") for r in ev.branch_masses)


def test_oracle_json_round_trip(toy2):
    data = E.oracle_to_dict(toy2)
    back = E.oracle_from_dict(data)
    assert np.allclose(back.hamiltonian.matrix, toy2.hamiltonian.matrix)
    assert back.delta == toy2.delta and back.p2 == toy2.p2
    assert np.allclose(back.observable, toy2.observable)


def test_oracle_json_minimal():
    data = {
        "local_dim": 2,
        "length": 2,
        "two_site_term": [[0.1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0.1]],
        "one_site_term": [[0.05, [0, 0.01]], [[0, -0.01], 0.0]],
    }
    o = E.oracle_from_dict(data)
    assert o.N == 2
    assert o.hamiltonian.one_site_term[0, 1] == 0.01j


def test_validation(toy1):
    with pytest.raises(ValueError):
        E.eta_one(toy1, 0.1, 3, 0)
    with pytest.raises(ValueError):
        E.eta_one(toy1, 0.1, 4, 99)
    with pytest.raises(ValueError):
        E.eta_one(toy1, 0.1, 4, 0, path="bogus")
    with pytest.raises(ValueError):
        E.HardOracleSpec(toy1.hamiltonian, observable=np.ones((2, 2)))
    with pytest.raises(ValueError):
        E.HardOracleSpec(toy1.hamiltonian, delta=0)


def test_simulation_ladder_within_bound():
    h = hs.ChainHamiltonian(2, 3, hs.field_heisenberg_term())
    rep = E.simulation_ladder(h, 4, 1e-3)
    assert rep.drift <= rep.bound
    assert rep.kappa < 10
    assert rep.simulation_error <= 4e-3 / (math.pi**2 * 3 * 4)
