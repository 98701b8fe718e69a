import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critline import assembly as asm
from critline.qpe import PI2_OVER_24


def test_history_bracket():
    hb = asm.history_bounds(0.5, 2.0)
    assert hb.lower == pytest.approx(0.99 * 0.5 / 1024)
    assert hb.upper == pytest.approx(1.05 * 0.5 / 1024)
    with pytest.raises(ValueError):
        asm.history_bounds(1.5, 2.0)
    with pytest.raises(ValueError):
        asm.history_bounds(0.5, 0.5)


@pytest.mark.parametrize("L, f", [(4, 9), (16, 13), (64, 17), (256, 21)])
def test_marker_falloff(L, f):
    assert asm.marker_falloff(L) == f


def test_marker_falloff_rejects():
    with pytest.raises(ValueError):
        asm.marker_falloff(8)
    with pytest.raises(ValueError):
        asm.marker_falloff(16, b=3)


@given(st.integers(2, 300))
def test_marker_bounds_ordered(L):
    m = asm.marker_bounds(L)
    assert m.lower < m.upper < 0
    assert m.lower <= m.midpoint <= m.upper


def test_marker_real_falloff_agrees_on_powers():
    # the real-valued fallback reduces to the integer falloff on powers of 4
    m = asm.marker_bounds(16)
    assert m.lower == pytest.approx(-2.25 * 4.0**-5 * 16.0**-4)


@given(st.floats(0, 1), st.sampled_from([16, 64, 256]))
def test_clock_bracket_contains_toy_ground_energy(k, steps):
    w = np.linalg.eigvalsh(asm.toy_clock_hamiltonian(steps, k))[0]
    hb = asm.history_bounds(k, steps)
    assert hb.lower - 1e-15 <= w <= hb.upper + 1e-15


@pytest.mark.parametrize("L", [4, 16, 64])
def test_sandwich_envelope(L):
    rep = asm.sandwich_check(L)
    assert rep.holds
    assert rep.far_slack == pytest.approx(0.99 * (1 - PI2_OVER_24) - 9 / 16, abs=1e-15)


def test_sandwich_coarse_form_threshold():
    # the coarse slack term only clears the bracket from L = 6 on
    assert not asm.sandwich_check(4).holds_literal
    assert asm.sandwich_check(16).holds_literal
    assert asm.literal_sandwich_threshold() == 6


def test_calibration_from_seven():
    assert not asm.calibration_check(6).holds
    assert all(asm.calibration_check(L).holds for L in range(7, 257))


def test_square_sign_follows_eta():
    L, m = 64, 6
    accept = asm.square_energy_1p(1 - PI2_OVER_24 + 0.01, L, m, (L, m))
    reject = asm.square_energy_1p(PI2_OVER_24 - 0.01, L, m, (L, m))
    assert accept.sign is asm.Sign.NEGATIVE and accept.certain
    assert reject.sign is asm.Sign.NONNEGATIVE and reject.certain


@given(st.floats(0, 1))
def test_interval_contains_point(eta):
    sq = asm.square_energy_1p(eta, 16, 3, (16, 3))
    lo, hi = sq.value_interval
    assert lo <= sq.value <= hi
    assert sq.k == pytest.approx(1 - eta)


def test_single_sign_change_over_eta():
    etas = np.linspace(0, 1, 401)
    signs = [asm.square_energy_1p(e, 64, 6, (64, 6)).sign for e in etas]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a is not b)
    assert changes == 1


def test_off_target_square_rejects():
    sq = asm.square_energy_1p(1.0, 16, 3, (64, 6))
    assert sq.k == 1.0 and sq.sign is asm.Sign.NONNEGATIVE
    assert asm.square_energy_2p(5.0, 16, 3, (16, 3)).k == 0.0


def test_lattice_energy():
    sq = asm.square_energy_1p(1.0, 16, 3, (16, 3))
    lat = asm.lattice_energy(sq, 64, 16)
    assert lat.tiles == 16
    assert lat.total == pytest.approx(1 + 16 * sq.value)
    pos = asm.lattice_energy(asm.square_energy_1p(0.0, 16, 3, (16, 3)), 64, 16)
    assert pos.total == 1.0
    with pytest.raises(ValueError):
        asm.lattice_energy(sq, 8, 16)


def test_threshold_size_crosses_zero():
    sq = asm.square_energy_1p(1.0, 16, 3, (16, 3))
    L0 = asm.threshold_size(sq, 16)
    assert L0 % 16 == 0
    assert asm.lattice_energy(sq, L0, 16).total_interval[1] < 0
    assert asm.lattice_energy(sq, L0 - 16, 16).total_interval[1] >= 0
    with pytest.raises(ValueError):
        asm.threshold_size(asm.square_energy_1p(0.0, 16, 3, (16, 3)), 16)


def test_combined_spectrum():
    from critline.spectral import SpectrumResult

    dense = SpectrumResult.from_eigenvalues([0.0, 0.1, 0.3])
    out = asm.combined_spectrum(0.2, dense)
    assert np.allclose(out.eigenvalues[:4], [0.0, 0.2, 0.3, 0.5])


def test_rescale_phi():
    assert asm.rescale_phi(0.5, 2, 6) == 0.125
    with pytest.raises(ValueError):
        asm.rescale_phi(0.5, 6, 6)


@pytest.mark.parametrize("t", [3, 4, 5])
def test_fractional_power_deviation_small(t):
    assert asm.fractional_power_deviation(0.3, 2.0**-t, t, 1) < 2.0 ** (-2 * t)


@pytest.mark.parametrize("t, n, size", [(1, 1, 16), (2, 4, 16), (6, 4, 64), (40, 10, 256)])
def test_square_size(t, n, size):
    assert asm.square_size_for(t, n) == size
