"""Translationally invariant nearest-neighbour chains and their time evolution.

Evolution follows the sign convention ``U(s) = exp(+i H s)``.  The product
formula is the forward-backward sweep

    U~(delta) = U_1(delta/2) ... U_z(delta/2) U_z(delta/2) ... U_1(delta/2)

with ``U_i(s) = exp(i h_i s)`` for the bond terms ``h_i``.  The sweep is
palindromic, so its local error is third order in ``delta`` and the error
after a fixed total time is second order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import schur

__all__ = [
    "MAX_DENSE_DIM",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "ChainHamiltonian",
    "TrotterPlan",
    "EffectiveDistance",
    "exact_evolution",
    "trotter_step",
    "trotter2",
    "trotter_error",
    "effective_hamiltonian",
    "effective_hamiltonian_distance",
    "xy_two_site_term",
    "field_heisenberg_term",
    "loglog_slope",
]

MAX_DENSE_DIM = 2**14

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def _hermitian(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10:
        raise ValueError(f"{name} is not Hermitian")
    return (m + m.conj().T) / 2


class ChainHamiltonian:
    """Open chain ``H = sum_i h_(i,i+1) + sum_i g_i`` with identical terms.

    ``two_site_term`` acts on ``d**2`` dimensions with spectral norm at most 1;
    ``one_site_term`` is optional and acts on every site.
    """

    def __init__(
        self,
        local_dim: int,
        length: int,
        two_site_term: np.ndarray,
        one_site_term: np.ndarray | None = None,
    ):
        if local_dim < 2:
            raise ValueError("local dimension must be at least 2")
        if length < 0:
            raise ValueError("length must be non-negative")
        d = local_dim
        self.local_dim = d
        self.length = length
        self.two_site_term = _hermitian(two_site_term, "two_site_term")
        if self.two_site_term.shape != (d * d, d * d):
            raise ValueError(f"two_site_term must be {d * d}x{d * d}")
        if np.linalg.norm(self.two_site_term, 2) > 1 + 1e-10:
            raise ValueError("two_site_term has spectral norm above 1")
        if one_site_term is None:
            self.one_site_term = np.zeros((d, d), dtype=complex)
        else:
            self.one_site_term = _hermitian(one_site_term, "one_site_term")
            if self.one_site_term.shape != (d, d):
                raise ValueError(f"one_site_term must be {d}x{d}")

    @property
    def dim(self) -> int:
        return self.local_dim**self.length

    def with_length(self, length: int) -> "ChainHamiltonian":
        return ChainHamiltonian(self.local_dim, length, self.two_site_term, self.one_site_term)

    def _check_cap(self) -> None:
        if self.dim > MAX_DENSE_DIM:
            raise ValueError(f"dimension {self.dim} exceeds the dense cap {MAX_DENSE_DIM}")

    def bond_terms(self) -> list[np.ndarray]:
        """Local terms ``h_i`` on sites ``(i, i+1)``, one-site parts folded in.

        Site ``i`` contributes its one-site term to bond ``i``; the last site
        goes to the last bond.  A single-site chain has one one-site term.
        """
        d, z = self.local_dim, self.length
        if z == 0:
            return []
        if z == 1:
            return [self.one_site_term.copy()]
        eye = np.eye(d, dtype=complex)
        terms = []
        for i in range(z - 1):
            h = self.two_site_term + np.kron(self.one_site_term, eye)
            if i == z - 2:
                h = h + np.kron(eye, self.one_site_term)
            terms.append(h)
        return terms

    def embed(self, local: np.ndarray, site: int) -> np.ndarray:
        """Lift an operator on sites ``site, site+1, ...`` to the full chain."""
        d = self.local_dim
        span = int(round(math.log(local.shape[0], d)))
        left = np.eye(d**site, dtype=complex)
        right = np.eye(d ** (self.length - site - span), dtype=complex)
        return np.kron(np.kron(left, local), right)

    @cached_property
    def matrix(self) -> np.ndarray:
        self._check_cap()
        if self.length == 0:
            return np.zeros((1, 1), dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, h in enumerate(self.bond_terms()):
            out += self.embed(h, i)
        return out

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and eigenvectors of the assembled chain."""
        w, v = np.linalg.eigh(self.matrix)
        return w, v

    @property
    def norm(self) -> float:
        w = self.spectrum[0]
        return float(max(abs(w[0]), abs(w[-1])))


def xy_two_site_term() -> np.ndarray:
    """``Sx Sx + Sy Sy`` for spin one-half; norm 1/2."""
    return (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y)) / 4


def field_heisenberg_term(field: float = 0.3, transverse: float = 0.4) -> np.ndarray:
    """Heisenberg coupling plus longitudinal and transverse fields on the left site.

    The default parameters give non-commuting bond terms with norm below 1.
    """
    heis = (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)) / 4
    out = heis + field * np.kron(PAULI_Z, _I2) + transverse * np.kron(PAULI_X, _I2)
    norm = np.linalg.norm(out, 2)
    return out if norm <= 1 else out / norm


@dataclass(frozen=True)
class TrotterPlan:
    total_time: float
    step: float

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.total_time < 0:
            raise ValueError("total time must be non-negative")

    @property
    def steps(self) -> int:
        # round up so the realized step never exceeds the requested one
        return max(1, math.ceil(self.total_time / self.step - 1e-9))

    @property
    def realized_step(self) -> float:
        return self.total_time / self.steps


def exact_evolution(h: ChainHamiltonian, time: float) -> np.ndarray:
    w, v = h.spectrum
    return (v * np.exp(1j * w * time)) @ v.conj().T


def _local_exp(term: np.ndarray, s: float) -> np.ndarray:
    w, v = np.linalg.eigh(term)
    return (v * np.exp(1j * w * s)) @ v.conj().T


def trotter_step(h: ChainHamiltonian, delta: float) -> np.ndarray:
    """One forward-backward sweep of half steps."""
    h._check_cap()
    factors = [h.embed(_local_exp(term, delta / 2), i) for i, term in enumerate(h.bond_terms())]
    out = np.eye(h.dim, dtype=complex)
    for f in factors:
        out = out @ f
    for f in reversed(factors):
        out = out @ f
    return out


def trotter2(h: ChainHamiltonian, plan: TrotterPlan) -> np.ndarray:
    if plan.total_time == 0:
        return np.eye(h.dim, dtype=complex)
    return np.linalg.matrix_power(trotter_step(h, plan.realized_step), plan.steps)


def trotter_error(h: ChainHamiltonian, plan: TrotterPlan) -> float:
    return float(np.linalg.norm(trotter2(h, plan) - exact_evolution(h, plan.total_time), 2))


@dataclass(frozen=True)
class EffectiveDistance:
    """``||H' - H||`` for the Hamiltonian ``H'`` generating an approximate unitary.

    ``epsilon`` is ``||U~ - exp(i H s)||`` and ``kappa`` the measured constant
    in ``||H' - H|| <= kappa * epsilon / s``.
    """

    distance: float
    epsilon: float
    s: float

    @property
    def kappa(self) -> float:
        if self.epsilon == 0:
            return 0.0
        return self.distance * self.s / self.epsilon


def effective_hamiltonian(approx_u: np.ndarray, s: float) -> np.ndarray:
    """Principal-branch ``log(U) / (i s)`` via the complex Schur form."""
    tri, z = schur(np.asarray(approx_u, dtype=complex), output="complex")
    angles = np.angle(np.diag(tri))
    out = (z * (angles / s)) @ z.conj().T
    return (out + out.conj().T) / 2


def effective_hamiltonian_distance(h: ChainHamiltonian, approx_u: np.ndarray, s: float) -> EffectiveDistance:
    if s <= 0:
        raise ValueError("s must be positive")
    if h.norm * s > math.pi / 4 + 1e-12:
        raise ValueError(f"||H|| s = {h.norm * s:.6g} exceeds pi/4; principal branch not guaranteed")
    exact = exact_evolution(h, s)
    eps = float(np.linalg.norm(approx_u - exact, 2))
    h_eff = effective_hamiltonian(approx_u, s)
    dist = float(np.linalg.norm(h_eff - h.matrix, 2))
    return EffectiveDistance(dist, eps, s)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
