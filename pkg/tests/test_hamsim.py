import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from critline import hamsim as hs

I2 = np.eye(2)


def _pauli_chain(ops, n):
    out = np.array([[1.0 + 0j]])
    for i in range(n):
        out = np.kron(out, ops.get(i, I2))
    return out


def test_matrix_matches_pauli_strings():
    n = 4
    h = hs.ChainHamiltonian(2, n, hs.xy_two_site_term())
    ref = sum(
        (_pauli_chain({i: P, i + 1: P}, n) for P in (hs.PAULI_X, hs.PAULI_Y) for i in range(n - 1)),
        np.zeros((16, 16)),
    ) / 4
    assert np.allclose(h.matrix, ref)


def test_one_site_terms_counted_once():
    z = np.diag([1.0, 0.0])
    h = hs.ChainHamiltonian(2, 3, np.zeros((4, 4)), z)
    assert np.allclose(np.diag(h.matrix), [3, 2, 2, 1, 2, 1, 1, 0])


@given(st.floats(0, 3, allow_nan=False))
def test_exact_evolution_matches_expm(time):
    h = hs.ChainHamiltonian(2, 3, hs.field_heisenberg_term())
    assert np.allclose(hs.exact_evolution(h, time), expm(1j * time * h.matrix), atol=1e-10)


def test_commuting_terms_are_exact():
    zz = np.kron(hs.PAULI_Z, hs.PAULI_Z) / 2
    h = hs.ChainHamiltonian(2, 4, zz, hs.PAULI_Z / 3)
    assert hs.trotter_error(h, hs.TrotterPlan(2.0, 0.5)) < 1e-12


def test_plan_rounds_up():
    plan = hs.TrotterPlan(1.0, 0.3)
    assert plan.steps == 4
    assert plan.realized_step == pytest.approx(0.25)
    with pytest.raises(ValueError):
        hs.TrotterPlan(1.0, 0.0)


def test_symmetric_formula_orders():
    # the forward-backward sweep is second order: global error ~ delta**2, one step ~ delta**3
    h = hs.ChainHamiltonian(2, 4, hs.field_heisenberg_term())
    deltas = np.array([1 / n for n in (4, 8, 16, 32, 64)])
    g = [hs.trotter_error(h, hs.TrotterPlan(1.0, d)) for d in deltas]
    s = [hs.trotter_error(h, hs.TrotterPlan(d, d)) for d in deltas]
    assert hs.loglog_slope(deltas, g) == pytest.approx(2.0, abs=0.1)
    assert hs.loglog_slope(deltas, s) == pytest.approx(3.0, abs=0.1)


def test_step_is_unitary_and_time_symmetric():
    h = hs.ChainHamiltonian(2, 3, hs.field_heisenberg_term())
    u = hs.trotter_step(h, 0.2)
    assert np.allclose(u @ u.conj().T, np.eye(8), atol=1e-12)
    assert np.allclose(hs.trotter_step(h, -0.2) @ u, np.eye(8), atol=1e-12)


def test_effective_hamiltonian_recovers_generator():
    h = hs.ChainHamiltonian(2, 3, hs.field_heisenberg_term())
    s = 0.5 / h.norm
    d = hs.effective_hamiltonian_distance(h, hs.exact_evolution(h, s), s)
    assert d.distance < 1e-10
    assert d.kappa < 10


def test_effective_distance_kappa_small():
    h = hs.ChainHamiltonian(2, 4, hs.field_heisenberg_term())
    s = 0.25 * np.pi / h.norm
    for n in (4, 16):
        approx = hs.trotter2(h, hs.TrotterPlan(s, s / n))
        assert hs.effective_hamiltonian_distance(h, approx, s).kappa < 10


def test_effective_distance_refuses_large_s():
    h = hs.ChainHamiltonian(2, 3, hs.field_heisenberg_term())
    with pytest.raises(ValueError):
        hs.effective_hamiltonian_distance(h, np.eye(8), 10.0)


@given(st.floats(0.5, 4), st.floats(0.1, 10))
def test_loglog_slope_recovers_power(p, c):
    x = np.geomspace(1e-3, 1, 7)
    assert hs.loglog_slope(x, c * x**p) == pytest.approx(p, abs=1e-9)


def test_validation():
    with pytest.raises(ValueError):
        hs.ChainHamiltonian(2, 3, 2 * np.eye(4))
    with pytest.raises(ValueError):
        hs.ChainHamiltonian(2, 3, np.ones((4, 4)) * 1j)
    with pytest.raises(ValueError):
        hs.ChainHamiltonian(2, 3, np.eye(2))
    with pytest.raises(ValueError):
        hs.ChainHamiltonian(2, 20, hs.xy_two_site_term()).matrix
