"""Closed-form amplitudes of textbook phase estimation.

Phases are measured in revolutions: an eigenvalue ``exp(2 pi i lam)`` has
phase ``lam``.  For a ``t``-qubit readout and phase offset ``xi`` the
amplitude on signed outcome ``L`` in ``(-2**(t-1), 2**(t-1)]`` is the
Dirichlet kernel

    alpha_L = 2**-t * sum_k exp(2 pi i k (xi - L / 2**t))

whose modulus is ``|sin(2**t pi xi)| / (2**t |sin(pi (xi - L / 2**t))|)``.
The kernel is evaluated in the shifted form ``sin(2**t pi d) / sin(pi d)``
with ``d = xi - L / 2**t``, which stays accurate next to the removable
singularity at ``d = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.special import polygamma

from .encoding import EncodedString, padded_valid_strings, valid_strings

__all__ = [
    "PI2_OVER_24",
    "QpePoint",
    "AmplitudeProfile",
    "wrap_phase",
    "outcome_labels",
    "alpha",
    "amplitude_profile",
    "low_half_mass",
    "centered_mass",
    "far_endpoint_offset",
    "near_endpoint_offset",
    "valid_tail_mass",
    "extraction_amplitudes",
    "tech_tail_bound",
    "outcome_tail_probability",
]

#: Upper bound on the low-half mass beyond the monotone window.
PI2_OVER_24 = math.pi**2 / 24


def wrap_phase(x):
    """Reduce a phase in revolutions to ``[-1/2, 1/2)``."""
    if np.ndim(x):
        return (np.asarray(x, dtype=float) + 0.5) % 1.0 - 0.5
    return (float(x) + 0.5) % 1.0 - 0.5


@dataclass(frozen=True)
class QpePoint:
    t: int
    xi: float

    def __post_init__(self) -> None:
        if int(self.t) != self.t or self.t < 1:
            raise ValueError(f"t must be a positive integer, got {self.t}")
        if not math.isfinite(self.xi):
            raise ValueError("xi must be finite")


@dataclass(frozen=True)
class AmplitudeProfile:
    """Readout amplitudes indexed by signed outcome label."""

    t: int
    labels: np.ndarray
    amplitudes: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def as_dict(self) -> dict[int, complex]:
        return {int(L): complex(a) for L, a in zip(self.labels, self.amplitudes)}

    def by_register_index(self) -> np.ndarray:
        """Amplitudes reordered by unsigned register value ``L mod 2**t``."""
        out = np.empty_like(self.amplitudes)
        out[np.mod(self.labels, 2**self.t)] = self.amplitudes
        return out


def outcome_labels(t: int) -> np.ndarray:
    half = 2 ** (t - 1)
    return np.arange(-half + 1, half + 1)


def _kernel(t: int, delta: np.ndarray) -> np.ndarray:
    """Complex Dirichlet kernel ``2**-t sum_k exp(2 pi i k delta)``."""
    m = 2**t
    delta = np.asarray(delta, dtype=float)
    # exact lattice points give amplitude 1; this also covers every integer delta
    exact = delta == np.round(delta)
    # distance to the nearest integer n; m is even so the ratio picks up (-1)**n
    n = np.round(delta)
    d = delta - n
    sign = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    safe = np.where(exact, 1.0, np.sin(np.pi * d))
    ratio = sign * np.sin(m * np.pi * d) / (m * safe)
    # subnormal offsets lose precision in sin; the series is exact to rounding there
    tiny = np.abs(m * d) < 1e-5
    ratio = np.where(tiny, sign * (1.0 - (m * m - 1) * (np.pi * d) ** 2 / 6.0), ratio)
    phase = np.exp(1j * np.pi * (m - 1) * delta)
    out = phase * ratio
    if np.any(exact):
        # sum of e^{2 pi i k n} for integer n is m, so the normalized value is 1
        out = np.where(exact, 1.0 + 0.0j, out)
    return out


def _exact_label(t: int, xi: float) -> int | None:
    scaled = xi * 2**t
    if not float(scaled).is_integer():
        return None
    label = int(scaled) % 2**t
    if label > 2 ** (t - 1):
        label -= 2**t
    return label


def alpha(point: QpePoint, label: int) -> complex:
    t = point.t
    half = 2 ** (t - 1)
    if not -half < label <= half:
        raise ValueError(f"label {label} outside ({-half}, {half}]")
    exact = _exact_label(t, point.xi)
    if exact is not None:
        return 1.0 + 0j if label == exact else 0j
    return complex(_kernel(t, point.xi - label / 2**t))


def amplitude_profile(point: QpePoint) -> AmplitudeProfile:
    labels = outcome_labels(point.t)
    exact = _exact_label(point.t, point.xi)
    if exact is not None:
        amps = np.where(labels == exact, 1.0 + 0j, 0j)
    else:
        amps = _kernel(point.t, point.xi - labels / 2**point.t)
    return AmplitudeProfile(point.t, labels, amps)


def low_half_mass(t: int, xi) -> float | np.ndarray:
    """Probability of a signed outcome ``L <= 0``; vectorized over ``xi``."""
    if int(t) != t or t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    labels = np.arange(-(2 ** (t - 1)) + 1, 1)
    delta = xi_arr[:, None] - labels[None, :] / 2**t
    mass = np.sum(np.abs(_kernel(t, delta)) ** 2, axis=1)
    mass = np.clip(mass, 0.0, 1.0)
    return float(mass[0]) if np.ndim(xi) == 0 else mass


def centered_mass(t: int, chi) -> float | np.ndarray:
    """Low-half mass as a function of ``chi = xi - 2**-(t+1)``.

    The midpoint of the transition sits at ``chi = 0`` where the mass is 1/2,
    and ``centered_mass(chi) + centered_mass(-chi) == 1``.
    """
    return low_half_mass(t, np.asarray(chi, dtype=float) + 2.0 ** -(t + 1))


def far_endpoint_offset(t: int) -> float:
    """Offset ``xi`` at the far end of the monotone window, ``2**-t - 2**(-3t/2)``."""
    return 2.0**-t - 2.0 ** (-1.5 * t)


def near_endpoint_offset(t: int) -> float:
    """Offset ``xi`` at the near end of the monotone window, ``2**(-3t/2)``."""
    return 2.0 ** (-1.5 * t)


def extraction_amplitudes(
    phase: Fraction, digits: int, candidates: Iterable[EncodedString]
) -> dict[str, complex]:
    """Amplitudes of base-4 readout strings for phase estimation of ``phase``.

    ``digits`` base-4 digits correspond to ``2 * digits`` qubits.  The phase
    offsets are formed exactly in rational arithmetic before conversion.
    """
    qubits = 2 * digits
    m = 4**digits
    out: dict[str, complex] = {}
    for cand in candidates:
        if len(cand) != digits:
            raise ValueError(f"candidate {cand.text} does not have {digits} digits")
        value = 0
        for d in cand.digits:
            value = 4 * value + d
        delta = phase - Fraction(value, m)
        # reduce to [-1/2, 1/2) before converting so the float stays small
        delta -= math.floor(delta + Fraction(1, 2))
        out[cand.text] = complex(_kernel(qubits, float(delta)))
    return out


def valid_tail_mass(y: EncodedString, digits: int, padded: bool = False) -> float:
    """Readout mass on valid strings when estimating the phase ``0.y``.

    ``digits`` is the number of base-4 readout digits.  With ``padded`` the
    acceptance set also contains valid strings followed by zeros, which is
    what a register longer than ``y`` reads out.
    """
    if digits < 2 or digits % 2:
        raise ValueError(f"digit count must be a positive even integer, got {digits}")
    cands = padded_valid_strings(digits) if padded else valid_strings(digits)
    amps = extraction_amplitudes(y.phase, digits, cands)
    return float(sum(abs(a) ** 2 for a in amps.values()))


def tech_tail_bound(t: int, f_of_t: float, side: str = "below") -> float:
    """Trigamma-difference bound on the low-half mass away from the transition.

    ``side="below"``: for ``xi >= 1/f`` returns an upper bound on the mass.
    ``side="above"``: for ``xi <= -1/f`` returns a lower bound on the mass.
    """
    if f_of_t <= 0:
        raise ValueError("f(t) must be positive")
    half = 2.0 ** (t - 1)
    bound = float(polygamma(1, half / f_of_t) - polygamma(1, 1.0 + half))
    bound = min(max(bound, 0.0), 1.0)
    if side == "below":
        return bound
    if side == "above":
        return 1.0 - bound
    raise ValueError(f"side must be 'below' or 'above', got {side!r}")


def outcome_tail_probability(t: int, xi: float, e: int) -> float:
    """Probability that the readout lands more than ``e`` steps from ``b``.

    ``b`` is the best ``t``-bit approximation below ``xi``; distances are
    taken around the circle of ``2**t`` outcomes.
    """
    m = 2**t
    profile = amplitude_profile(QpePoint(t, xi))
    b = math.floor(xi * m)
    dist = np.abs(((profile.labels - b) + m // 2) % m - m // 2)
    return float(np.sum(profile.probabilities[dist > e]))
