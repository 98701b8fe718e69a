import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critline import hamsim as hs
from critline import spectral as sp


@pytest.mark.parametrize("L", [2, 3, 4, 6, 8])
def test_xy_closed_form_matches_dense(L):
    h = hs.ChainHamiltonian(2, L, hs.xy_two_site_term())
    w = np.linalg.eigvalsh(h.matrix)
    closed = sp.xy_spectrum(L)
    assert np.allclose(np.sort(w - w[0]), closed.eigenvalues, atol=1e-10)
    assert w[0] == pytest.approx(sp.xy_ground_energy(L), abs=1e-10)


def test_xy_gap_values():
    # odd chains have a zero mode
    assert sp.xy_gap(5) == 0.0
    assert sp.xy_gap(14) == pytest.approx(math.sin(math.pi / 30), abs=1e-14)
    assert sp.xy_gap(64) * 64 <= math.pi / 2


@given(st.integers(2, 12))
def test_low_modes_match_full(L):
    full = np.sort(np.abs(sp.xy_modes(L)))
    assert np.allclose(sp.xy_low_modes(L, 3), full[:3], atol=1e-14)


@given(st.lists(st.floats(0, 5, allow_nan=False), min_size=1, max_size=8), st.integers(1, 40))
def test_subset_sums_against_brute_force(values, count):
    import itertools

    brute = sorted(sum(c) for r in range(len(values) + 1) for c in itertools.combinations(values, r))
    got = sp.smallest_subset_sums(values, count)
    assert np.allclose(got, brute[: len(got)])
    assert len(got) == min(count, len(brute))


@pytest.mark.parametrize("L", [3, 5, 7])
def test_chain_matvec_matches_matrix(L):
    h = hs.ChainHamiltonian(2, L, hs.field_heisenberg_term())
    x = np.random.default_rng(L).standard_normal(h.dim) + 0j
    assert np.allclose(sp.chain_matvec(h)(x), h.matrix @ x, atol=1e-13)


def test_lanczos_matches_eigh():
    h = hs.ChainHamiltonian(2, 8, hs.field_heisenberg_term())
    ref = np.linalg.eigvalsh(h.matrix)[:4]
    got = sp.extremal_eigs(sp.chain_matvec(h), 4, seed=3, dim=h.dim)
    assert np.allclose(got, ref, atol=1e-9)


def test_lanczos_reproduces_xy_gap():
    h = hs.ChainHamiltonian(2, 12, hs.xy_two_site_term())
    w = sp.extremal_eigs(sp.chain_matvec(h), 2, dim=h.dim)
    assert w[1] - w[0] == pytest.approx(sp.xy_gap(12), abs=1e-8)


def test_spectrum_result_degeneracy():
    r = sp.SpectrumResult.from_eigenvalues([1.0, 0.0, 0.0, 2.0])
    assert r.ground_degeneracy == 2
    assert r.gap == 0.0
    assert sp.SpectrumResult.from_eigenvalues([3.0]).gap == math.inf
    with pytest.raises(ValueError):
        sp.SpectrumResult.from_eigenvalues([])


def test_gap_criterion():
    crit = sp.GapCriterion((2.0,), (0.0, 0.5))
    gapped = sp.SpectrumResult.from_eigenvalues([0.0, 1.0])
    gapless = sp.SpectrumResult.from_eigenvalues([0.0, 0.01])
    middle = sp.SpectrumResult.from_eigenvalues([0.0, 0.3])
    assert sp.classify_gap(gapped, crit, 10) is sp.GapClass.GAPPED
    assert sp.classify_gap(gapless, crit, 10) is sp.GapClass.GAPLESS
    assert sp.classify_gap(middle, crit, 10) is sp.GapClass.UNDETERMINED
    with pytest.raises(ValueError):
        sp.classify_gap(gapped, crit, 4)


@pytest.mark.parametrize("L", range(5, 11))
def test_trivial_chain_gapped(L):
    r = sp.diagonalize(sp.trivial_chain(L))
    assert r.gap == 1.0
    assert sp.classify_gap(r, sp.GapCriterion((2.0,), (0.0, 0.5)), L) is sp.GapClass.GAPPED


def test_xy_spacing_shrinks():
    spacings = [sp.max_spacing(sp.xy_spectrum(L, levels=4096, window=0.5), 0.5) for L in (8, 16, 32, 64)]
    assert all(a > b for a, b in zip(spacings, spacings[1:]))


def test_max_spacing_simple():
    r = sp.SpectrumResult.from_eigenvalues([0.0, 0.2, 1.0])
    assert sp.max_spacing(r, 1.0) == pytest.approx(0.4)


@pytest.mark.parametrize("L, hp", [(3, 0.05), (4, 0.3), (5, 0.9)])
def test_guarded_chain_composition(L, hp):
    # spectrum is {0} plus the shifted dense spectrum above h_prime plus levels >= 1
    chain = sp.guarded_chain(L, hp)
    w, v = np.linalg.eigh(chain.matrix)
    assert w[0] == pytest.approx(0.0, abs=1e-12)
    dense = chain.sectors == 0
    wd = np.linalg.eigvalsh(chain.matrix[np.ix_(dense, dense)])
    assert np.allclose(wd, hp + sp.xy_spectrum(L).eigenvalues, atol=1e-10)
    assert sp.order_parameter_expectation(v[:, 0], chain.order_spec, L) == pytest.approx(1.0)
    mixed = chain.sectors == 2
    assert np.linalg.eigvalsh(chain.matrix[np.ix_(mixed, mixed)])[0] >= 1 - 1e-10


def test_order_parameter_validation():
    with pytest.raises(ValueError):
        sp.OrderParameterSpec((0,), np.ones((2, 2)))
    with pytest.raises(ValueError):
        sp.OrderParameterSpec((), np.diag([1.0, 0.0]))


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        sp.diagonalize(np.array([[0, 1], [0, 0]]))
