"""Spectra, gaps and order parameters of small lattice Hamiltonians.

Dense diagonalization is capped at ``2**14`` dimensions.  The iterative
solver is a Lanczos iteration with full reorthogonalization that finds one
eigenpair at a time and deflates it, so degenerate levels are returned with
their multiplicity.

The critical XY chain ``sum_i (Sx_i Sx_{i+1} + Sy_i Sy_{i+1})`` with open ends
maps to free fermions with single-particle energies ``cos(k pi / (L + 1))``;
excitation energies above the ground state are subset sums of their moduli.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import eigh_tridiagonal

from .hamsim import MAX_DENSE_DIM, ChainHamiltonian, xy_two_site_term

__all__ = [
    "DEGENERACY_TOL",
    "MAX_ITERATIVE_DIM",
    "SpectrumResult",
    "GapClass",
    "GapCriterion",
    "OrderParameterSpec",
    "ConvergenceError",
    "diagonalize",
    "extremal_eigs",
    "chain_matvec",
    "xy_modes",
    "xy_low_modes",
    "xy_gap",
    "xy_spectrum",
    "smallest_subset_sums",
    "max_spacing",
    "classify_gap",
    "order_parameter_expectation",
    "trivial_chain",
    "GuardedChain",
    "guarded_chain",
]

DEGENERACY_TOL = 1e-10
MAX_ITERATIVE_DIM = 2**22


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    ground_degeneracy: int
    gap: float

    @classmethod
    def from_eigenvalues(cls, values: Sequence[float], tol: float = DEGENERACY_TOL) -> "SpectrumResult":
        vals = np.sort(np.asarray(values, dtype=float))
        if vals.size == 0:
            raise ValueError("empty spectrum")
        degeneracy = int(np.sum(vals - vals[0] < tol))
        if degeneracy > 1:
            gap = 0.0
        elif vals.size == 1:
            gap = math.inf
        else:
            gap = float(vals[1] - vals[0])
        return cls(vals, degeneracy, gap)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def shifted(self) -> "SpectrumResult":
        """Same spectrum with the ground energy moved to zero."""
        return SpectrumResult(self.eigenvalues - self.eigenvalues[0], self.ground_degeneracy, self.gap)


class GapClass(str, Enum):
    GAPPED = "Gapped"
    GAPLESS = "Gapless"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class GapCriterion:
    """Thresholds ``1/p(L)`` (gapped) and ``1/q(L)`` (gapless).

    Polynomials are coefficient lists in increasing degree, so ``[0, 0.5]``
    means ``q(L) = L / 2``.
    """

    p_coeffs: tuple[float, ...]
    q_coeffs: tuple[float, ...]

    def p(self, size: float) -> float:
        return float(npoly.polyval(size, self.p_coeffs))

    def q(self, size: float) -> float:
        return float(npoly.polyval(size, self.q_coeffs))

    def check(self, size: float) -> None:
        if not 1 / self.p(size) > 1 / self.q(size):
            raise ValueError(f"gap criterion has 1/p <= 1/q at L0 = {size}")


def classify_gap(spectrum: SpectrumResult, criterion: GapCriterion, size: float) -> GapClass:
    criterion.check(size)
    if spectrum.gap >= 1 / criterion.p(size):
        return GapClass.GAPPED
    if spectrum.gap <= 1 / criterion.q(size):
        return GapClass.GAPLESS
    return GapClass.UNDETERMINED


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] > MAX_DENSE_DIM:
        raise ValueError(f"dimension {h.shape[0]} exceeds the dense cap {MAX_DENSE_DIM}")
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    return h


def diagonalize(h: np.ndarray, vectors: bool = False):
    """Full spectrum of a Hermitian matrix; optionally with eigenvectors."""
    h = _check_hermitian(h)
    if vectors:
        w, v = np.linalg.eigh(h)
        return SpectrumResult.from_eigenvalues(w), v
    return SpectrumResult.from_eigenvalues(np.linalg.eigvalsh(h))


def _lowest_pair(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    locked: list[np.ndarray],
    rng: np.random.Generator,
    tol: float,
    max_iter: int,
) -> tuple[float, np.ndarray]:
    def project(x: np.ndarray) -> np.ndarray:
        for u in locked:
            x = x - u * np.vdot(u, x)
        return x

    v = project(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    v /= np.linalg.norm(v)
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    limit = min(max_iter, dim - len(locked))
    for j in range(limit):
        w = project(matvec(basis[j]))
        a = float(np.vdot(basis[j], w).real)
        alphas.append(a)
        Q = np.array(basis)
        for _ in range(2):
            w = w - Q.T @ (Q.conj() @ w)
        w = project(w)
        b = float(np.linalg.norm(w))
        theta, y = eigh_tridiagonal(np.array(alphas), np.array(betas), select="i", select_range=(0, 0))
        residual = b * abs(y[-1, 0])
        if residual < tol * max(1.0, abs(theta[0])) or b < 1e-13 or j == limit - 1:
            if residual >= tol * max(1.0, abs(theta[0])) and b >= 1e-13:
                raise ConvergenceError(f"Lanczos did not converge in {limit} steps (residual {residual:.3g})")
            vec = Q.T @ y[:, 0]
            vec = project(vec)
            return float(theta[0]), vec / np.linalg.norm(vec)
        betas.append(b)
        basis.append(w / b)
    raise ConvergenceError("empty Krylov space")


def extremal_eigs(
    h: np.ndarray | Callable[[np.ndarray], np.ndarray],
    k: int,
    seed: int = 0,
    dim: int | None = None,
    tol: float = 1e-11,
    max_iter: int = 500,
) -> np.ndarray:
    """Lowest ``k`` eigenvalues, with multiplicity, by deflated Lanczos.

    ``h`` is a dense Hermitian matrix or a matrix-vector product; in the
    latter case ``dim`` is required.
    """
    if callable(h):
        if dim is None:
            raise ValueError("dim is required for a matrix-free operator")
        matvec = h
    else:
        mat = np.asarray(h, dtype=complex)
        dim = mat.shape[0]
        matvec = lambda x: mat @ x  # noqa: E731
    if dim > MAX_ITERATIVE_DIM:
        raise ValueError(f"dimension {dim} exceeds the iterative cap {MAX_ITERATIVE_DIM}")
    if not 1 <= k <= dim:
        raise ValueError(f"k must lie in 1..{dim}")
    rng = np.random.default_rng(seed)
    locked: list[np.ndarray] = []
    values = []
    for _ in range(k):
        theta, vec = _lowest_pair(matvec, dim, locked, rng, tol, max_iter)
        values.append(theta)
        locked.append(vec)
    return np.sort(np.array(values))


def chain_matvec(h: ChainHamiltonian) -> Callable[[np.ndarray], np.ndarray]:
    """Matrix-free product with a chain Hamiltonian, one bond at a time."""
    d, n = h.local_dim, h.length
    terms = [t.reshape(d, d, d, d) if t.shape[0] == d * d else t for t in h.bond_terms()]

    def matvec(x: np.ndarray) -> np.ndarray:
        psi = np.asarray(x, dtype=complex).reshape((d,) * n)
        out = np.zeros_like(psi)
        for i, term in enumerate(terms):
            if term.ndim == 2:
                out += np.moveaxis(np.tensordot(term, psi, axes=([1], [i])), 0, i)
            else:
                moved = np.tensordot(term, psi, axes=([2, 3], [i, i + 1]))
                out += np.moveaxis(moved, (0, 1), (i, i + 1))
        return out.reshape(-1)

    return matvec


def xy_modes(length: int) -> np.ndarray:
    """Single-particle energies ``cos(k pi / (L + 1))`` for ``k = 1..L``."""
    if length < 1:
        raise ValueError("length must be positive")
    k = np.arange(1, length + 1)
    return np.cos(k * np.pi / (length + 1))


def xy_low_modes(length: int, count: int) -> np.ndarray:
    """The ``count`` smallest mode moduli, without building all ``L`` modes."""
    count = min(count, length)
    centre = (length + 1) / 2
    lo = max(1, int(math.floor(centre)) - count)
    hi = min(length, int(math.ceil(centre)) + count)
    k = np.arange(lo, hi + 1)
    vals = np.abs(np.sin((k - centre) * np.pi / (length + 1)))
    return np.sort(vals)[:count]


def xy_gap(length: int) -> float:
    """Many-body gap of the open chain: the smallest mode modulus."""
    if length < 2:
        raise ValueError("length must be at least 2")
    g = float(xy_low_modes(length, 1)[0])
    return 0.0 if g < DEGENERACY_TOL else g


def smallest_subset_sums(values: Sequence[float], count: int, ceiling: float = math.inf) -> np.ndarray:
    """The ``count`` smallest subset sums of non-negative ``values`` (empty set included).

    Best-first enumeration: every subset is reached exactly once by either
    appending the next value or swapping the last value for the next one.
    """
    vals = np.sort(np.asarray(values, dtype=float))
    out = [0.0]
    if vals.size == 0:
        return np.array(out)
    heap = [(float(vals[0]), 0)]
    while heap and len(out) < count:
        s, i = heapq.heappop(heap)
        if s > ceiling:
            break
        out.append(s)
        if i + 1 < vals.size:
            heapq.heappush(heap, (s + float(vals[i + 1]), i + 1))
            heapq.heappush(heap, (s - float(vals[i]) + float(vals[i + 1]), i + 1))
    return np.array(out)


def xy_spectrum(length: int, levels: int | None = None, window: float | None = None) -> SpectrumResult:
    """Many-body XY spectrum shifted to start at zero.

    Chains of up to 16 sites return all ``2**L`` levels unless ``levels`` or
    ``window`` is given; longer chains return the lowest ``levels`` (default
    256) excitation energies no larger than ``window``.
    """
    if length < 2:
        raise ValueError("length must be at least 2")
    if length <= 16 and levels is None and window is None:
        sums = np.zeros(1)
        for e in np.abs(xy_modes(length)):
            sums = np.concatenate([sums, sums + e])
        return SpectrumResult.from_eigenvalues(sums)
    levels = 256 if levels is None else levels
    ceiling = math.inf if window is None else window
    modes = xy_low_modes(length, min(length, max(levels, 64)))
    return SpectrumResult.from_eigenvalues(smallest_subset_sums(modes, levels, ceiling))


def xy_ground_energy(length: int) -> float:
    e = xy_modes(length)
    return float(np.sum(e[e < 0]))


def max_spacing(spectrum: SpectrumResult, window: float) -> float:
    """Largest distance from a point of ``[E0, E0 + window]`` to the spectrum."""
    e0 = spectrum.eigenvalues[0]
    inside = spectrum.eigenvalues[spectrum.eigenvalues <= e0 + window]
    above = spectrum.eigenvalues[spectrum.eigenvalues > e0 + window]
    half_gaps = np.diff(inside) / 2 if inside.size > 1 else np.zeros(0)
    worst = float(np.max(half_gaps, initial=0.0))
    # the top of the window is covered by the nearest level on either side
    top = e0 + window
    edge = top - inside[-1]
    if above.size:
        edge = min(edge, above[0] - top)
    return max(worst, float(edge))


@dataclass(frozen=True)
class OrderParameterSpec:
    """Average of a per-site projector over the sites in ``sites``."""

    sites: tuple[int, ...]
    local_projector: np.ndarray

    def __post_init__(self) -> None:
        p = self.local_projector
        if np.max(np.abs(p @ p - p)) > 1e-10 or np.max(np.abs(p - p.conj().T)) > 1e-10:
            raise ValueError("local operator is not an orthogonal projector")
        if not self.sites:
            raise ValueError("site set is empty")


def order_parameter_expectation(state, spec: OrderParameterSpec, num_sites: int) -> float:
    amps = np.asarray(getattr(state, "amplitudes", state), dtype=complex).ravel()
    d = spec.local_projector.shape[0]
    if amps.size != d**num_sites:
        raise ValueError(f"state of size {amps.size} does not match {num_sites} sites of dimension {d}")
    psi = amps.reshape((d,) * num_sites)
    total = 0.0
    for site in spec.sites:
        moved = np.moveaxis(psi, site, 0).reshape(d, -1)
        total += float(np.real(np.vdot(moved, spec.local_projector @ moved)))
    return total / len(spec.sites)


def trivial_chain(length: int) -> np.ndarray:
    """Diagonal ``sum_i |1><1|_i`` on qubits; ground state ``|0...0>``, gap 1."""
    counts = np.array([bin(i).count("1") for i in range(2**length)], dtype=float)
    if counts.size > MAX_DENSE_DIM:
        raise ValueError("trivial chain exceeds the dense cap")
    return np.diag(counts)


@dataclass(frozen=True)
class GuardedChain:
    """Direct-sum chain: dense XY sector, trivial sector, guard penalties.

    Each site has four states.  States 0 and 1 form the dense sector (the XY
    qubit), states 2 and 3 the trivial sector (``|0>_3`` and ``|1>_3``).
    """

    length: int
    h_prime: float
    matrix: np.ndarray
    sectors: np.ndarray
    order_spec: OrderParameterSpec

    @property
    def local_dim(self) -> int:
        return 4


def guarded_chain(length: int, h_prime: float = 1.0) -> GuardedChain:
    """Small exact model of the dense/trivial/guard composition.

    In the all-dense sector the energy is ``h_prime`` plus the XY spectrum
    shifted to start at zero.  XY bonds are offset by ``1/2`` so that every
    bond term is positive and clusters inside mixed sectors cost at least the
    guard penalty.
    """
    if length < 2:
        raise ValueError("length must be at least 2")
    d = 4
    dim = d**length
    if dim > MAX_DENSE_DIM:
        raise ValueError(f"guarded chain of length {length} exceeds the dense cap")
    p12 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
    p3 = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
    excited3 = np.diag([0.0, 0.0, 0.0, 1.0]).astype(complex)
    xy_local = np.zeros((16, 16), dtype=complex)
    embed = [0, 1]
    xy = xy_two_site_term() + 0.5 * np.eye(4)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for e in range(2):
                    xy_local[embed[a] * 4 + embed[b], embed[c] * 4 + embed[e]] = xy[a * 2 + b, c * 2 + e]
    # per-site energy that lifts the all-dense sector minimum to h_prime
    offset = -(xy_ground_energy(length) + 0.5 * (length - 1))
    per_site = (h_prime + offset) / length
    # a dense cluster inside a mixed configuration has at most length - 1 sites,
    # so this guard strength keeps every mixed level at or above 1
    guard_strength = 1.0 + (length - 1) * max(0.0, -per_site)
    guard = guard_strength * (np.kron(p12, p3) + np.kron(p3, p12))
    one_site = per_site * p12 + excited3
    eye = lambda n: np.eye(d**n, dtype=complex)  # noqa: E731
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(length - 1):
        h += np.kron(np.kron(eye(i), xy_local + guard), eye(length - i - 2))
    for i in range(length):
        h += np.kron(np.kron(eye(i), one_site), eye(length - i - 1))
    local_sector = np.array([0, 0, 1, 1])
    idx = np.arange(dim)
    digits = np.array([(idx // d ** (length - 1 - s)) % d for s in range(length)])
    site_sectors = local_sector[digits]
    sectors = np.where(
        np.all(site_sectors == 0, axis=0), 0, np.where(np.all(site_sectors == 1, axis=0), 1, 2)
    )
    spec = OrderParameterSpec(tuple(range(length)), np.diag([0.0, 0.0, 1.0, 0.0]).astype(complex))
    return GuardedChain(length, h_prime, h, sectors, spec)
