"""Dense state-vector simulation of phase estimation circuits.

Qubit 0 is the most significant bit of the amplitude index.  During the
phase-kickback stage readout qubit ``i`` controls the power ``2**i`` of the
unitary (little-endian).  The inverse Fourier transform is applied without
its closing swap network, which leaves the register big-endian: after it,
the readout stores ``x = sum_i bit_i 2**(t-1-i)``.  :func:`register_value`
and :func:`signed_label` are the conversion at readout.

Gate noise stands in for compiling each gate to a finite gate set: a noisy
gate is the ideal unitary times ``exp(i eps K)`` for a seeded Hermitian ``K``
of unit spectral norm, so every gate is off by at most ``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import schur

__all__ = [
    "MAX_QUBITS",
    "StateVector",
    "Gate",
    "NoiseSpec",
    "UnitaryPowers",
    "hadamard",
    "cnot",
    "t_gate",
    "phase_r",
    "diagonal_phase",
    "controlled_power",
    "apply",
    "apply_noisy",
    "run_circuit",
    "inverse_qft_gates",
    "qpe_gates",
    "qpe_circuit",
    "comparator_gates",
    "phase_comparator",
    "register_value",
    "signed_label",
    "register_amplitudes",
    "readout_distribution",
    "low_outcome_probability",
    "perturbation",
]

MAX_QUBITS = 24
_UNITARY_TOL = 1e-10


def _check_unitary(m: np.ndarray) -> None:
    d = m.shape[0]
    if m.shape != (d, d):
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.linalg.norm(m.conj().T @ m - np.eye(d), 2) > _UNITARY_TOL * max(1, d):
        raise ValueError("matrix is not unitary within tolerance")


class StateVector:
    """Pure state of ``num_qubits`` qubits."""

    def __init__(self, amplitudes: np.ndarray, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(amps.size))) if amps.size else -1
        if n < 0 or 2**n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state has norm {norm}, expected 1")
        self.num_qubits = n
        self.amplitudes = amps

    @classmethod
    def zeros(cls, num_qubits: int) -> "StateVector":
        if num_qubits > MAX_QUBITS:
            raise ValueError(f"{num_qubits} qubits exceeds the cap of {MAX_QUBITS}")
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def tensor(self, other: "StateVector") -> "StateVector":
        if self.num_qubits + other.num_qubits > MAX_QUBITS:
            raise ValueError(f"joint register exceeds the cap of {MAX_QUBITS} qubits")
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        out = StateVector.__new__(StateVector)
        out.num_qubits = self.num_qubits
        out.amplitudes = self.amplitudes.copy()
        return out


@dataclass(frozen=True)
class NoiseSpec:
    epsilon: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class Gate:
    """A gate acting on ``targets``, optionally controlled on ``controls``.

    ``matrix`` is the unitary on the targets only.  Gates flagged ``exact``
    are never perturbed by the noise model.
    """

    kind: str
    targets: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    controls: tuple[int, ...] = ()
    exact: bool = False

    def __post_init__(self) -> None:
        qubits = self.controls + self.targets
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"gate {self.kind} repeats a qubit: {qubits}")
        if self.matrix.shape != (2 ** len(self.targets),) * 2:
            raise ValueError(f"gate {self.kind}: matrix shape {self.matrix.shape} does not fit {len(self.targets)} targets")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def full_matrix(self) -> np.ndarray:
        """Unitary on ``controls + targets`` (controls most significant)."""
        if not self.controls:
            return self.matrix
        d = 2 ** len(self.targets)
        size = 2 ** len(self.controls) * d
        out = np.eye(size, dtype=complex)
        out[size - d :, size - d :] = self.matrix
        return out


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def hadamard(q: int) -> Gate:
    return Gate("Hadamard", (q,), _H)


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (target,), _X, controls=(control,))


def t_gate(q: int) -> Gate:
    return Gate("T", (q,), np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex))


def phase_r(k: int, target: int, control: int | None = None, inverse: bool = False) -> Gate:
    """``R_k = diag(1, exp(2 pi i / 2**k))`` or its inverse."""
    sign = -1.0 if inverse else 1.0
    m = np.diag([1.0, np.exp(sign * 2j * np.pi / 2**k)]).astype(complex)
    controls = () if control is None else (control,)
    return Gate(f"PhaseR({k}{'^-1' if inverse else ''})", (target,), m, controls=controls)


def diagonal_phase(angle: float, q: int) -> Gate:
    return Gate("DiagonalPhase", (q,), np.diag([1.0, np.exp(1j * angle)]).astype(complex))


class UnitaryPowers:
    """Integer powers of a unitary computed from its eigenphases.

    Powering through the eigendecomposition keeps ``U**(2**k)`` accurate to
    machine precision where repeated squaring would accumulate error.
    """

    def __init__(self, phases: np.ndarray, vectors: np.ndarray):
        self.phases = np.asarray(phases, dtype=float)
        self.vectors = np.asarray(vectors, dtype=complex)
        self.dim = self.vectors.shape[0]

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> "UnitaryPowers":
        u = np.asarray(u, dtype=complex)
        _check_unitary(u)
        if np.count_nonzero(u - np.diag(np.diag(u))) == 0:
            return cls(np.angle(np.diag(u)) / (2 * np.pi), np.eye(u.shape[0]))
        tri, z = schur(u, output="complex")
        return cls(np.angle(np.diag(tri)) / (2 * np.pi), z)

    @classmethod
    def from_hamiltonian(cls, eigenvalues: np.ndarray, eigenvectors: np.ndarray, time: float = 1.0) -> "UnitaryPowers":
        """Powers of ``exp(2 pi i H time)`` from an eigendecomposition of ``H``."""
        return cls(np.asarray(eigenvalues) * time, eigenvectors)

    def power(self, p: int) -> np.ndarray:
        d = np.exp(2j * np.pi * p * self.phases)
        return (self.vectors * d) @ self.vectors.conj().T

    def inverse(self) -> "UnitaryPowers":
        return UnitaryPowers(-self.phases, self.vectors)

    def matrix(self) -> np.ndarray:
        return self.power(1)


def controlled_power(
    u: np.ndarray | UnitaryPowers,
    power: int,
    control: int,
    targets: Sequence[int],
    exact: bool = False,
) -> Gate:
    powers = u if isinstance(u, UnitaryPowers) else UnitaryPowers.from_matrix(u)
    m = powers.power(power)
    return Gate(f"ControlledUnitaryPower({power})", tuple(targets), m, controls=(control,), exact=exact)


def _apply_matrix(amps: np.ndarray, n: int, qubits: tuple[int, ...], m: np.ndarray) -> np.ndarray:
    k = len(qubits)
    psi = amps.reshape((2,) * n)
    psi = np.moveaxis(psi, qubits, range(k))
    shape = psi.shape
    psi = (m @ psi.reshape(2**k, -1)).reshape(shape)
    psi = np.moveaxis(psi, range(k), qubits)
    return psi.reshape(-1)


def _check_indices(state: StateVector, gate: Gate) -> None:
    for q in gate.qubits:
        if not 0 <= q < state.num_qubits:
            raise IndexError(f"qubit {q} out of range for {state.num_qubits} qubits")


def apply(state: StateVector, gate: Gate) -> StateVector:
    _check_indices(state, gate)
    out = StateVector.__new__(StateVector)
    out.num_qubits = state.num_qubits
    out.amplitudes = _apply_matrix(state.amplitudes, state.num_qubits, gate.qubits, gate.full_matrix())
    return out


def perturbation(dim: int, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """``exp(i eps K)`` for a random Hermitian ``K`` with ``||K|| = 1``."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    k = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(k)
    w = w / np.max(np.abs(w))
    return (v * np.exp(1j * epsilon * w)) @ v.conj().T


def apply_noisy(state: StateVector, gate: Gate, noise: NoiseSpec, index: int = 0) -> StateVector:
    """Apply ``gate`` perturbed by at most ``noise.epsilon`` in spectral norm.

    The perturbation depends only on ``(noise.seed, index)``, so repeating a
    circuit with different exact gates reuses the same compilation error.
    """
    if noise.epsilon == 0 or gate.exact:
        return apply(state, gate)
    _check_indices(state, gate)
    full = gate.full_matrix()
    rng = np.random.default_rng([noise.seed, index])
    noisy = full @ perturbation(full.shape[0], noise.epsilon, rng)
    out = StateVector.__new__(StateVector)
    out.num_qubits = state.num_qubits
    out.amplitudes = _apply_matrix(state.amplitudes, state.num_qubits, gate.qubits, noisy)
    return out


def run_circuit(state: StateVector, gates: Iterable[Gate], noise: NoiseSpec | None = None) -> StateVector:
    for i, g in enumerate(gates):
        state = apply(state, g) if noise is None else apply_noisy(state, g, noise, i)
    return state


def inverse_qft_gates(qubits: Sequence[int]) -> list[Gate]:
    """Inverse Fourier transform without the closing swap network."""
    t = len(qubits)
    gates: list[Gate] = []
    for i in range(t - 1, -1, -1):
        for k in range(t - i, 1, -1):
            gates.append(phase_r(k, qubits[i], control=qubits[i + k - 1], inverse=True))
        gates.append(hadamard(qubits[i]))
    return gates


def qpe_gates(u: np.ndarray | UnitaryPowers, t: int, system: Sequence[int]) -> list[Gate]:
    powers = u if isinstance(u, UnitaryPowers) else UnitaryPowers.from_matrix(u)
    if powers.dim != 2 ** len(system):
        raise ValueError(f"unitary of dimension {powers.dim} does not act on {len(system)} qubits")
    gates = [hadamard(i) for i in range(t)]
    for i in range(t):
        gates.append(controlled_power(powers, 2**i, i, system))
    gates.extend(inverse_qft_gates(range(t)))
    return gates


def qpe_circuit(
    unitary: np.ndarray | UnitaryPowers,
    eigen_register: StateVector,
    t: int,
    noise: NoiseSpec | None = None,
) -> StateVector:
    if t < 1:
        raise ValueError("t must be at least 1")
    n = eigen_register.num_qubits
    if t + n > MAX_QUBITS:
        raise ValueError(f"{t + n} qubits exceeds the cap of {MAX_QUBITS}")
    system = list(range(t, t + n))
    state = StateVector.zeros(t).tensor(eigen_register)
    return run_circuit(state, qpe_gates(unitary, t, system), noise)


def comparator_gates(
    u_a: np.ndarray | UnitaryPowers,
    u_b: np.ndarray | UnitaryPowers,
    t: int,
    reg_a: Sequence[int],
    reg_b: Sequence[int],
    exact_b: bool = True,
) -> list[Gate]:
    """Phase gradient of ``u_a`` and of ``u_b`` inverse, then inverse QFT.

    The ``u_b`` gates carry the tunable parameter; they are flagged exact by
    default so the noise model only touches the parameter-free part.
    """
    pa = u_a if isinstance(u_a, UnitaryPowers) else UnitaryPowers.from_matrix(u_a)
    pb = u_b if isinstance(u_b, UnitaryPowers) else UnitaryPowers.from_matrix(u_b)
    pb_inv = pb.inverse()
    gates = [hadamard(i) for i in range(t)]
    for i in range(t):
        p = 2**i
        gates.append(controlled_power(pa, p, i, reg_a))
        gates.append(controlled_power(pb_inv, p, i, reg_b, exact=exact_b))
    gates.extend(inverse_qft_gates(range(t)))
    return gates


def phase_comparator(
    u_a: np.ndarray | UnitaryPowers,
    u_b: np.ndarray | UnitaryPowers,
    state_a: StateVector,
    state_b: StateVector,
    t: int,
    noise: NoiseSpec | None = None,
) -> StateVector:
    """Readout register ends up holding ``t`` bits of ``lam_a - lam_b``."""
    na, nb = state_a.num_qubits, state_b.num_qubits
    if t + na + nb > MAX_QUBITS:
        raise ValueError(f"{t + na + nb} qubits exceeds the cap of {MAX_QUBITS}")
    reg_a = list(range(t, t + na))
    reg_b = list(range(t + na, t + na + nb))
    state = StateVector.zeros(t).tensor(state_a).tensor(state_b)
    return run_circuit(state, comparator_gates(u_a, u_b, t, reg_a, reg_b), noise)


def register_value(bits: Sequence[int]) -> int:
    """Integer stored in a readout register given its qubits in index order."""
    value = 0
    for b in bits:
        value = 2 * value + int(b)
    return value


def signed_label(x: int, t: int) -> int:
    """Map a register value in ``[0, 2**t)`` to ``(-2**(t-1), 2**(t-1)]``."""
    return x if x <= 2 ** (t - 1) else x - 2**t


def register_amplitudes(state: StateVector, t: int, system: np.ndarray) -> np.ndarray:
    """Amplitudes ``<x, system | state>`` for every register value ``x``."""
    rest = state.amplitudes.reshape(2**t, -1)
    system = np.asarray(system, dtype=complex).ravel()
    if system.size != rest.shape[1]:
        raise ValueError("system vector does not match the non-register qubits")
    return rest @ system.conj()


def readout_distribution(state: StateVector, t: int) -> np.ndarray:
    """Marginal probability of each register value ``x``."""
    rest = state.amplitudes.reshape(2**t, -1)
    return np.sum(np.abs(rest) ** 2, axis=1)


def low_outcome_probability(state: StateVector, t: int) -> float:
    """Probability that the signed readout label is ``<= 0``."""
    probs = readout_distribution(state, t)
    labels = np.array([signed_label(x, t) for x in range(2**t)])
    return float(np.sum(probs[labels <= 0]))
