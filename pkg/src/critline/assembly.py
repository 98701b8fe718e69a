"""Energy bookkeeping for one checkerboard square and the full lattice.

A square of side ``L`` carries the ground energy of a clock Hamiltonian whose
output penalty is weighted by the rejection probability ``k``, bracketed by
``[0.99 k, 1.05 k] / (256 T**2)`` with ``T**2 = L**b``, plus a negative marker
bonus bracketed by ``-(9/4) 4**-f`` and ``-(9/4 - 9 / 4**f) 4**-f``.  The
falloff ``f(L) = 5 + b log4(L)`` makes ``(9/4) 4**-f = (9/16) / (256 L**b)``,
so the sign of the sum is decided by whether ``k`` sits above or below the
calibration constants.

All energies are carried as closed intervals.  A sign is certain when the
interval clears zero; otherwise it is read from a point model that places
the clock energy at ``1.02 k / (256 T**2)`` and the marker at the midpoint of
its bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .qpe import PI2_OVER_24
from .spectral import SpectrumResult

__all__ = [
    "DEFAULT_B",
    "HistoryEnergyBounds",
    "MarkerBounds",
    "Sign",
    "SquareEnergy",
    "LatticeEnergy",
    "SandwichReport",
    "CalibrationReport",
    "history_bounds",
    "marker_falloff",
    "marker_bounds",
    "sandwich_check",
    "literal_sandwich_threshold",
    "calibration_check",
    "square_energy_1p",
    "square_energy_2p",
    "lattice_energy",
    "threshold_size",
    "combined_spectrum",
    "rescale_phi",
    "fractional_power_deviation",
    "toy_clock_hamiltonian",
    "square_size_for",
]

DEFAULT_B = 4
_POINT_HISTORY = 1.02


@dataclass(frozen=True)
class HistoryEnergyBounds:
    k: float
    T: float
    lower: float
    upper: float


def history_bounds(k: float, T: float) -> HistoryEnergyBounds:
    """Bracket ``[0.99 k, 1.05 k] / (256 T**2)`` on the clock ground energy."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"k must lie in [0, 1], got {k}")
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    scale = 256.0 * T * T
    return HistoryEnergyBounds(k, T, 0.99 * k / scale, 1.05 * k / scale)


def _log4_exact(L: int) -> int:
    if int(L) != L or L < 1:
        raise ValueError(f"L must be a positive integer, got {L}")
    e = 0
    x = int(L)
    while x % 4 == 0:
        x //= 4
        e += 1
    if x != 1:
        raise ValueError(f"L = {L} is not a power of 4")
    return e


def marker_falloff(L: int, b: int = DEFAULT_B) -> int:
    """``f(L) = 5 + b log4(L)`` for ``L`` a power of 4."""
    if b <= 0 or b % 2:
        raise ValueError(f"b must be a positive even integer, got {b}")
    return 5 + b * _log4_exact(L)


@dataclass(frozen=True)
class MarkerBounds:
    f_of_L: float
    lower: float
    upper: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def _marker_from_scale(f: float, unit: float) -> MarkerBounds:
    # unit = 4**-f; 9/4**f in the upper bound is the marker bracket's slack
    return MarkerBounds(f, -2.25 * unit, -(2.25 - 9.0 * unit) * unit)


def marker_bounds(L: int, b: int = DEFAULT_B) -> MarkerBounds:
    """Marker bracket for any ``L >= 2``.

    Powers of 4 use the integer falloff; other sizes use the real-valued
    ``4**-f = 4**-5 L**-b`` that the same calibration implies.
    """
    if L < 2:
        raise ValueError("marker bounds need L >= 2")
    try:
        f: float = marker_falloff(L, b)
        unit = 4.0 ** (-f)
    except ValueError:
        if b <= 0 or b % 2:
            raise
        f = 5 + b * math.log(L, 4)
        unit = 4.0**-5 * float(L) ** (-b)
    return _marker_from_scale(f, unit)


@dataclass(frozen=True)
class SandwichReport:
    """Slack in the two inequalities that place the marker between the clock brackets."""

    L: int
    b: int
    far_slack: float
    near_slack: float
    near_slack_literal: float

    @property
    def holds(self) -> bool:
        return self.far_slack >= 0 and self.near_slack >= 0

    @property
    def holds_literal(self) -> bool:
        return self.far_slack >= 0 and self.near_slack_literal >= 0


def sandwich_check(L: int, b: int = DEFAULT_B) -> SandwichReport:
    """Slacks of the one-parameter sandwich, scaled by ``256 L**b``.

    ``far_slack``: ``0.99 (1 - pi^2/24) - (9/4) 4**-f`` (rejecting side).
    ``near_slack``: marker upper bound minus ``1.05 pi^2/24`` (accepting
    side), with the marker slack ``9 / 4**f``.  ``near_slack_literal`` uses
    the coarser slack ``90 / (4 * 2**L)`` instead.
    """
    f = marker_falloff(L, b)
    unit = 4.0 ** (-f) * 256.0 * float(L) ** b
    far = 0.99 * (1 - PI2_OVER_24) - 2.25 * unit
    near = (2.25 - 9.0 * 4.0 ** (-f)) * unit - 1.05 * PI2_OVER_24
    near_lit = (2.25 - 22.5 * 2.0 ** (-L)) * unit - 1.05 * PI2_OVER_24
    return SandwichReport(L, b, far, near, near_lit)


def literal_sandwich_threshold(b: int = DEFAULT_B, limit: int = 1024) -> int:
    """Smallest ``L`` from which the coarse-slack sandwich holds at every size.

    The calibration is evaluated with the real-valued falloff, since the
    scaled marker unit ``4**-f 256 L**b = 1/4`` does not depend on ``L``.
    """
    quarter = 0.25
    last_bad = 1
    for L in range(2, limit + 1):
        near = (2.25 - 22.5 * 2.0 ** (-L)) * quarter - 1.05 * PI2_OVER_24
        far = 0.99 * (1 - PI2_OVER_24) - 2.25 * quarter
        if near < 0 or far < 0:
            last_bad = L
    return last_bad + 1


@dataclass(frozen=True)
class CalibrationReport:
    """The two-parameter calibration pair at size ``L``, scaled by ``256 L**b``."""

    L: int
    b: int
    accept_slack: float
    reject_slack: float

    @property
    def holds(self) -> bool:
        return self.accept_slack >= 0 and self.reject_slack >= 0


def calibration_check(L: int, b: int = DEFAULT_B) -> CalibrationReport:
    """``1.05/2 <= (9/4 - 10/2**L) u`` and ``(9/4) u <= 0.99 * 3/5`` with ``u = 4**-f 256 L**b``."""
    if L < 2:
        raise ValueError("calibration needs L >= 2")
    unit = 0.25  # 4**-5 * 256, independent of L
    accept = (2.25 - 10.0 * 2.0 ** (-L)) * unit - 1.05 * 0.5
    reject = 0.99 * 0.6 - 2.25 * unit
    return CalibrationReport(L, b, accept, reject)


class Sign(str, Enum):
    NEGATIVE = "Negative"
    NONNEGATIVE = "NonNegative"


@dataclass(frozen=True)
class SquareEnergy:
    """Ground energy of one square: interval, point estimate, and sign."""

    L: int
    m: int
    sign: Sign
    value_interval: tuple[float, float]
    value: float
    certain: bool
    k: float
    marker: MarkerBounds = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "m": self.m,
            "sign": self.sign.value,
            "value_interval": list(self.value_interval),
            "value": self.value,
            "certain": self.certain,
            "k": self.k,
            "marker": {"f_of_L": self.marker.f_of_L, "lower": self.marker.lower, "upper": self.marker.upper},
        }


def _square(k: float, L: int, m: int, b: int) -> SquareEnergy:
    T = float(L) ** (b / 2)
    hist = history_bounds(k, T)
    mark = marker_bounds(L, b)
    lo = hist.lower + mark.lower
    hi = hist.upper + mark.upper
    point = _POINT_HISTORY * k / (256.0 * T * T) + mark.midpoint
    if hi < 0:
        sign, certain = Sign.NEGATIVE, True
    elif lo >= 0:
        sign, certain = Sign.NONNEGATIVE, True
    else:
        sign, certain = (Sign.NEGATIVE if point < 0 else Sign.NONNEGATIVE), False
    return SquareEnergy(L, m, sign, (lo, hi), point, certain, k, mark)


def _no_square(L: int, m: int, b: int) -> SquareEnergy:
    # any other square runs a computation that rejects outright: k = 1
    return _square(1.0, L, m, b)


def square_energy_1p(
    eta_val: float, L: int, m: int, target: tuple[int, int], b: int = DEFAULT_B
) -> SquareEnergy:
    """Square energy with rejection weight ``k = 1 - eta``.

    ``target`` is ``(L_N, m_N)``; other squares carry ``k = 1``.
    """
    if not -1e-12 <= eta_val <= 1 + 1e-12:
        raise ValueError(f"eta must lie in [0, 1], got {eta_val}")
    if (L, m) != tuple(target):
        return _no_square(L, m, b)
    return _square(min(1.0, max(0.0, 1.0 - eta_val)), L, m, b)


def square_energy_2p(
    eta_val: float, L: int, m: int, target: tuple[int, int], b: int = DEFAULT_B
) -> SquareEnergy:
    """Square energy for the observable-weighted functional.

    ``eta_val`` may fall outside ``[0, 1]``; the rejection weight is clamped.
    Squares with ``m`` below the required tape length, or off target, carry
    ``k = 1``.
    """
    if (L, m) != tuple(target):
        return _no_square(L, m, b)
    return _square(min(1.0, max(0.0, 1.0 - eta_val)), L, m, b)


@dataclass(frozen=True)
class LatticeEnergy:
    lattice_size: int
    total: float
    tiles: int
    total_interval: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "lattice_size": self.lattice_size,
            "total": self.total,
            "tiles": self.tiles,
            "total_interval": list(self.total_interval),
        }


def lattice_energy(square: SquareEnergy, L: int, L_N: int) -> LatticeEnergy:
    """Ground energy of the shifted lattice of side ``L``.

    A negative square gives ``1 + floor(L/L_N)**2 * value``.  Otherwise the
    shifted ground energy sits at the floor ``1``.
    """
    if L < L_N:
        raise ValueError(f"lattice size {L} is below the square size {L_N}")
    tiles = (L // L_N) ** 2
    if square.sign is Sign.NEGATIVE:
        lo, hi = square.value_interval
        return LatticeEnergy(L, 1.0 + tiles * square.value, tiles, (1.0 + tiles * lo, 1.0 + tiles * min(hi, 0.0)))
    return LatticeEnergy(L, 1.0, tiles, (1.0, math.inf))


def threshold_size(square: SquareEnergy, L_N: int, b: int = DEFAULT_B) -> int:
    """Smallest multiple ``L0`` of ``L_N`` with ``floor(L0/L_N)**2 c1 / L_N**b > 1``.

    ``c1`` is read from the square's upper bound ``-c1 / L_N**b``; the square
    must be certainly negative.
    """
    if square.sign is not Sign.NEGATIVE or not square.certain:
        raise ValueError("threshold size needs a certainly negative square")
    c1 = -square.value_interval[1] * float(L_N) ** b
    reps = math.floor(float(L_N) ** (b / 2) / math.sqrt(c1)) + 1
    return L_N * reps


def combined_spectrum(h_prime_min: float, dense: SpectrumResult, guard_floor: float = 1.0) -> SpectrumResult:
    """``{0} U (h' + dense) U {guard_floor}``.

    ``dense`` must be non-negative (shift it first); its levels are lifted by
    the lattice energy ``h'``.  The guard sector is represented by its floor.
    """
    vals = np.asarray(dense.eigenvalues, dtype=float)
    if vals.size and vals.min() < -1e-12:
        raise ValueError("dense spectrum must be non-negative")
    parts = [np.zeros(1), h_prime_min + vals, np.array([guard_floor])]
    return SpectrumResult.from_eigenvalues(np.sort(np.concatenate(parts)))


def rescale_phi(phi_raw: float, scale_exponent: int, t: int) -> float:
    """Parameter seen by the comparator when it runs ``U_phi`` to the power ``2**-x``.

    The hard window in ``phi`` is stretched by ``2**x``.  ``x`` must satisfy
    ``0 <= x < t``.
    """
    if int(scale_exponent) != scale_exponent or not 0 <= scale_exponent < t:
        raise ValueError(f"scale exponent must satisfy 0 <= x < t = {t}, got {scale_exponent}")
    return math.ldexp(float(phi_raw), -int(scale_exponent))


def fractional_power_deviation(phi: float, xi: float, t: int, scale_exponent: int, seed: int = 0) -> float:
    """Readout deviation when the fractional powers of ``U_phi`` are approximated.

    Each controlled power ``2**m`` of ``U_phi**(2**-x)`` is replaced by a
    gate within ``2**-4t * 2**m`` of it in operator norm.  The comparator
    runs against an eigenphase ``phi' + xi``; the largest readout amplitude
    deviation is returned.
    """
    from .circuit import Gate, StateVector, comparator_gates, perturbation, register_amplitudes, run_circuit

    eff = rescale_phi(phi, scale_exponent, t)
    u_a = np.diag([np.exp(2j * np.pi * (eff + xi)), 1.0])
    u_b = np.diag([np.exp(2j * np.pi * eff), 1.0])
    gates = comparator_gates(u_a, u_b, t, [t], [t + 1])
    rng = np.random.default_rng(seed)
    noisy = []
    for g in gates:
        if g.targets == (t + 1,):
            m = g.controls[0]
            eps = 2.0 ** (-4 * t) * 2.0**m
            g = Gate(g.kind, g.targets, g.matrix @ perturbation(2, eps, rng), g.controls, exact=True)
        noisy.append(g)
    start = StateVector.zeros(t + 2)
    system = np.array([1.0, 0, 0, 0])
    a = register_amplitudes(run_circuit(start, gates), t, system)
    b = register_amplitudes(run_circuit(start, noisy), t, system)
    return float(np.max(np.abs(a - b)))


def toy_clock_hamiltonian(steps: int, k: float) -> np.ndarray:
    """Path-graph clock Hamiltonian on ``steps`` clock states with an output penalty.

    The penalty on the last clock state is ``mu = k / (256 steps)``; the
    ground energy is close to ``mu / steps = k / (256 steps**2)``.
    """
    if steps < 2:
        raise ValueError("need at least two clock states")
    h = np.zeros((steps, steps))
    for s in range(steps - 1):
        h[s, s] += 0.5
        h[s + 1, s + 1] += 0.5
        h[s, s + 1] -= 0.5
        h[s + 1, s] -= 0.5
    h[-1, -1] += k / (256.0 * steps)
    return h


def square_size_for(t: int, n_index: int) -> int:
    """``L_N``: smallest power of 4 with room for ``2 + 5t + N`` tape cells."""
    need = 2 + 5 * t + n_index
    L = 4
    while L < need:
        L *= 4
    return L
