"""Acceptance probability of the encoded phase-comparator computation.

The computation reads an instance index ``N`` out of the phase ``0.enc(N)``
with ``2t`` base-4 digits, clamps the decoded value to ``z' = min(N, dec(z))``,
and compares the eigenphases of ``exp(2 pi i G_z')`` (acting on the first
``z'`` sites of the input) against a tunable phase ``phi`` with a ``t``-qubit
comparator.  The one-parameter functional is the probability of a valid
readout together with a comparator outcome ``x <= 0``; the two-parameter
functional additionally weights that event by ``<B> - theta`` for an
observable ``B = A + 1`` on site 0.

Two evaluation routes are provided: closed-form Dirichlet-kernel sums, and a
state-vector simulation of the comparator circuit.  Extracted strings are
accepted when they are a valid string followed by zero padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping, Sequence

import numpy as np

from . import circuit as cs
from .encoding import EncodedString, bit_length, decode, encode, padded_valid_strings, strip_padding
from .hamsim import ChainHamiltonian, TrotterPlan, effective_hamiltonian, trotter2
from .qpe import _kernel, extraction_amplitudes, wrap_phase

__all__ = [
    "HardOracleSpec",
    "EtaEvaluation",
    "ExtractionBranch",
    "extraction_branches",
    "eta_one",
    "eta_one_max",
    "eta_two",
    "eta_two_max",
    "theta_thresholds",
    "simulation_ladder",
    "LadderReport",
    "oracle_from_dict",
    "oracle_to_dict",
    "toy_one_param_oracle",
    "toy_two_param_oracle",
]

_EXTRACTION_CIRCUIT_QUBITS = 20


@dataclass(eq=False)
class HardOracleSpec:
    """A small chain Hamiltonian standing in for the hard family ``G_N``.

    ``hamiltonian`` has length ``N`` and its spectrum should lie inside
    ``[0, 1)`` so eigenphases in revolutions equal eigenvalues.  ``observable``
    is the one-site projector ``A``; ``B = A + 1`` has eigenvalues 1 and 2.
    """

    hamiltonian: ChainHamiltonian
    delta: float = 0.1
    p1: float = 100.0
    p2: float = 20.0
    observable: np.ndarray | None = None
    d_prime: float = 1.0
    name: str = ""
    _branch_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        d = self.hamiltonian.local_dim
        if self.observable is None:
            self.observable = np.diag([0.0] * (d - 1) + [1.0]).astype(complex)
        a = np.asarray(self.observable, dtype=complex)
        if a.shape != (d, d) or np.max(np.abs(a @ a - a)) > 1e-10 or np.max(np.abs(a - a.conj().T)) > 1e-10:
            raise ValueError("observable must be a one-site orthogonal projector")
        self.observable = a
        if self.hamiltonian.dim > 2**14:
            raise ValueError("oracle dimension exceeds the dense cap")

    @property
    def N(self) -> int:
        return self.hamiltonian.length

    @property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return self.hamiltonian.spectrum

    def low_energy_indices(self) -> np.ndarray:
        w = self.spectrum[0]
        return np.nonzero(w <= w[0] + self.delta)[0]

    def b_expectations(self, length: int | None = None) -> np.ndarray:
        """``<g|B|g>`` for every eigenvector ``g`` of the chain of given length."""
        length = self.N if length is None else length
        if length == 0:
            # no site carries the observable; B acts as its lowest eigenvalue
            return np.ones(1)
        h = self.hamiltonian if length == self.N else self.hamiltonian.with_length(length)
        v = h.spectrum[1]
        b_full = h.embed(self.observable, 0) + np.eye(h.dim)
        return np.real(np.einsum("ig,ij,jg->g", v.conj(), b_full, v))

    def lambda_star(self) -> int:
        """The eigenvalue of ``B`` that low-energy states concentrate on."""
        vals = self.b_expectations()[self.low_energy_indices()]
        star = int(round(float(np.mean(vals))))
        if np.max(np.abs(vals - star)) > 1 / self.p1:
            raise ValueError("low-energy states are not concentrated on one eigenvalue of B within 1/P1")
        return star

    def branch_system(self, length: int, unitary: str = "exact", trotter_steps: int | None = None):
        """Eigenphases (revolutions) and eigenvectors used by the comparator.

        ``unitary="trotter"`` replaces ``exp(2 pi i G)`` by the product
        formula with ``trotter_steps`` steps and uses its eigendecomposition.
        """
        key = (length, unitary, trotter_steps)
        if key not in self._branch_cache:
            if length == 0:
                res = (np.zeros(1), np.ones((1, 1), dtype=complex))
            else:
                h = self.hamiltonian if length == self.N else self.hamiltonian.with_length(length)
                if unitary == "exact":
                    w, v = h.spectrum
                    res = (np.asarray(w, float), np.asarray(v, complex))
                elif unitary == "trotter":
                    if not trotter_steps:
                        raise ValueError("trotter_steps is required for the product-formula path")
                    u = trotter2(h, TrotterPlan(2 * math.pi, 2 * math.pi / trotter_steps))
                    powers = cs.UnitaryPowers.from_matrix(u)
                    res = (powers.phases, powers.vectors)
                else:
                    raise ValueError(f"unknown unitary mode {unitary!r}")
            self._branch_cache[key] = res
        return self._branch_cache[key]


@dataclass(frozen=True)
class ExtractionBranch:
    """One accepted readout ``z`` of the index extraction."""

    z: str
    z_prime: int
    weight: float


@dataclass
class EtaEvaluation:
    value: float
    branch_masses: list[dict[str, Any]]
    params: dict[str, Any]
    input_mode: str
    invalid_mass: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "params": self.params,
            "input_mode": self.input_mode,
            "invalid_mass": self.invalid_mass,
            "branch_masses": self.branch_masses,
        }


@lru_cache(maxsize=256)
def _extraction_cached(n_index: int, t: int, via_circuit: bool) -> tuple[tuple[ExtractionBranch, ...], float]:
    digits = 2 * t
    y = encode(n_index)
    if via_circuit:
        probs = _extraction_by_circuit(y, digits)
    elif t >= bit_length(n_index):
        # 0.enc(N) is exact in 2t digits
        return (ExtractionBranch(y.padded(digits).text, n_index, 1.0),), 0.0
    else:
        amps = extraction_amplitudes(y.phase, digits, padded_valid_strings(digits))
        probs = {z: abs(a) ** 2 for z, a in amps.items()}
    branches = []
    for z, p in probs.items():
        if p == 0.0:
            continue
        zp = min(n_index, decode(strip_padding(z)))
        branches.append(ExtractionBranch(z, zp, float(p)))
    accepted = sum(b.weight for b in branches)
    return tuple(branches), max(0.0, 1.0 - accepted)


def _extraction_by_circuit(y: EncodedString, digits: int) -> dict[str, float]:
    qubits = 2 * digits
    phase = float(y.phase)
    u = np.diag([np.exp(2j * np.pi * phase), 1.0])
    state = cs.qpe_circuit(u, cs.StateVector.basis(1, 0), qubits)
    probs = cs.readout_distribution(state, qubits)
    out = {}
    for z in padded_valid_strings(digits):
        value = 0
        for d in z.digits:
            value = 4 * value + d
        out[z.text] = float(probs[value])
    return out


def extraction_branches(n_index: int, t: int, via_circuit: bool | None = None) -> tuple[tuple[ExtractionBranch, ...], float]:
    """Accepted readouts of the index extraction and the rejected mass.

    The readout is computed in closed form unless ``via_circuit`` is set, in
    which case the ``4 t`` qubit readout circuit is simulated (at most 20
    qubits).
    """
    via_circuit = bool(via_circuit)
    if via_circuit and 4 * t > _EXTRACTION_CIRCUIT_QUBITS:
        raise ValueError(f"extraction circuit would need {4 * t} qubits")
    return _extraction_cached(n_index, t, via_circuit)


def _input_vector(oracle: HardOracleSpec, input_state) -> tuple[np.ndarray, str]:
    w, v = oracle.spectrum
    if isinstance(input_state, (int, np.integer)):
        if not 0 <= input_state < len(w):
            raise ValueError(f"eigenstate index {input_state} out of range")
        return v[:, int(input_state)], f"eigenstate {int(input_state)}"
    vec = np.asarray(input_state, dtype=complex).ravel()
    if vec.size != oracle.hamiltonian.dim:
        raise ValueError("input vector does not match the oracle dimension")
    return vec / np.linalg.norm(vec), "vector"


def _check_t(t: int) -> None:
    if int(t) != t or t < 2 or t % 2:
        raise ValueError(f"t must be an even integer >= 2, got {t}")


def _branch_terms(
    oracle: HardOracleSpec,
    nu: np.ndarray,
    z_prime: int,
    phi: float,
    t: int,
    unitary: str,
    trotter_steps: int | None,
):
    """Per-eigenvector weights and low-outcome amplitudes for one branch."""
    phases, vecs = oracle.branch_system(z_prime, unitary, trotter_steps)
    d = oracle.hamiltonian.local_dim
    coeffs = vecs.conj().T @ nu.reshape(d**z_prime, -1)
    gram = coeffs.conj() @ coeffs.T
    xi = wrap_phase(np.asarray(phases) - phi)
    labels = np.arange(-(2 ** (t - 1)) + 1, 1)
    amps = _kernel(t, xi[None, :] - labels[:, None] / 2**t)
    return phases, vecs, gram, amps


def _fast(
    oracle: HardOracleSpec,
    phi: float,
    t: int,
    nu: np.ndarray,
    theta: float | None,
    unitary: str,
    trotter_steps: int | None,
) -> tuple[float, list[dict[str, Any]], float]:
    branches, invalid = extraction_branches(oracle.N, t)
    total = 0.0
    records = []
    for br in branches:
        if theta is not None and br.z_prime >= 1 and t < oracle.d_prime * bit_length(br.z_prime):
            # tape-length guard of the two-parameter computation rejects this branch
            records.append({"z": br.z, "z_prime": br.z_prime, "weight": br.weight, "guarded": True})
            continue
        phases, vecs, gram, amps = _branch_terms(oracle, nu, br.z_prime, phi, t, unitary, trotter_steps)
        kappa = np.real(np.diag(gram))
        low = np.sum(np.abs(amps) ** 2, axis=0)
        if theta is None:
            contrib = float(np.sum(kappa * low))
        else:
            b_tilde = _b_in_basis(oracle, br.z_prime, vecs)
            weighted = np.real(np.einsum("xg,gh,xh->", amps.conj(), b_tilde * gram, amps))
            contrib = float(weighted - theta * np.sum(kappa * low))
        total += br.weight * contrib
        for g in np.nonzero(kappa > 1e-14)[0]:
            rec = {
                "z": br.z,
                "z_prime": br.z_prime,
                "g": int(g),
                "weight": float(br.weight * kappa[g]),
                "low": float(low[g]),
                "high": float(1.0 - low[g]),
            }
            records.append(rec)
    return total, records, invalid


def _b_in_basis(oracle: HardOracleSpec, length: int, vecs: np.ndarray) -> np.ndarray:
    if length == 0:
        return np.ones((1, 1))
    h = oracle.hamiltonian.with_length(length)
    b_full = h.embed(oracle.observable, 0) + np.eye(h.dim)
    return vecs.conj().T @ b_full @ vecs


def _slow(
    oracle: HardOracleSpec,
    phi: float,
    t: int,
    nu: np.ndarray,
    theta: float | None,
    noise: cs.NoiseSpec | None,
    unitary: str,
    trotter_steps: int | None,
) -> tuple[float, list[dict[str, Any]], float]:
    if oracle.hamiltonian.local_dim != 2:
        raise ValueError("circuit simulation needs a qubit chain")
    via = 4 * t <= _EXTRACTION_CIRCUIT_QUBITS
    branches, invalid = extraction_branches(oracle.N, t, via_circuit=via)
    n = oracle.N
    u_phi = np.diag([np.exp(2j * np.pi * phi), 1.0])
    anc = cs.StateVector.basis(1, 0)
    system = cs.StateVector(nu, normalize=True)
    total = 0.0
    records = []
    labels = np.array([cs.signed_label(x, t) for x in range(2**t)])
    for br in branches:
        if theta is not None and br.z_prime >= 1 and t < oracle.d_prime * bit_length(br.z_prime):
            records.append({"z": br.z, "z_prime": br.z_prime, "weight": br.weight, "guarded": True})
            continue
        phases, vecs = oracle.branch_system(br.z_prime, unitary, trotter_steps)
        rest = 2 ** (n - br.z_prime)
        powers = cs.UnitaryPowers(np.repeat(phases, rest), np.kron(vecs, np.eye(rest)))
        state = cs.phase_comparator(powers, u_phi, system, anc, t, noise)
        rows = state.amplitudes.reshape(2**t, -1)
        low_rows = rows[labels <= 0]
        if theta is None:
            contrib = float(np.sum(np.abs(low_rows) ** 2))
        else:
            b_sys = np.eye(2**n) + (
                ChainHamiltonian(2, n, oracle.hamiltonian.two_site_term).embed(oracle.observable, 0)
                if n >= 1
                else 0
            )
            b_full = np.kron(b_sys, np.eye(2))
            contrib = float(np.real(np.einsum("xi,ij,xj->", low_rows.conj(), b_full, low_rows)))
            contrib -= theta * float(np.sum(np.abs(low_rows) ** 2))
        total += br.weight * contrib
        records.append({"z": br.z, "z_prime": br.z_prime, "weight": br.weight, "low": contrib})
    return total, records, invalid


def _evaluate(
    oracle: HardOracleSpec,
    phi: float,
    t: int,
    input_state,
    theta: float | None,
    path: str,
    noise: cs.NoiseSpec | None,
    unitary: str,
    trotter_steps: int | None,
) -> EtaEvaluation:
    _check_t(t)
    nu, mode = _input_vector(oracle, input_state)
    if noise is not None and path == "fast":
        path = "circuit"
    if path == "fast":
        value, records, invalid = _fast(oracle, phi, t, nu, theta, unitary, trotter_steps)
    elif path == "circuit":
        value, records, invalid = _slow(oracle, phi, t, nu, theta, noise, unitary, trotter_steps)
    else:
        raise ValueError(f"unknown path {path!r}")
    params: dict[str, Any] = {"N": oracle.N, "phi": float(phi), "t": int(t)}
    if theta is not None:
        params["theta"] = float(theta)
    params["path"] = path
    params["unitary"] = unitary
    if noise is not None:
        params["noise_epsilon"] = noise.epsilon
        params["noise_seed"] = noise.seed
    return EtaEvaluation(float(value), records, params, mode, float(invalid))


def eta_one(
    oracle: HardOracleSpec,
    phi: float,
    t: int,
    input_state=0,
    path: str = "fast",
    noise: cs.NoiseSpec | None = None,
    unitary: str = "exact",
    trotter_steps: int | None = None,
) -> EtaEvaluation:
    """Probability of a valid extraction followed by a comparator outcome ``x <= 0``.

    ``input_state`` is an eigenstate index of the length-``N`` chain or a raw
    vector.  ``path="circuit"`` (implied by ``noise``) simulates the gates.
    """
    ev = _evaluate(oracle, phi, t, input_state, None, path, noise, unitary, trotter_steps)
    ev.value = min(1.0, max(0.0, ev.value))
    return ev


def _maximize(evals: Sequence[EtaEvaluation]) -> EtaEvaluation:
    best = max(range(len(evals)), key=lambda i: (evals[i].value, -i))
    out = evals[best]
    out.input_mode = f"maximized (eigenstate {best})"
    out.params["argmax"] = best
    return out


def eta_one_max(oracle: HardOracleSpec, phi: float, t: int, **kwargs) -> EtaEvaluation:
    """Maximum over eigenstates of the length-``N`` chain.

    The functional is linear in the input density matrix, so for eigenstate
    inputs of the extraction-exact branch the maximum over all inputs is
    attained at an eigenstate.
    """
    evals = [eta_one(oracle, phi, t, g, **kwargs) for g in range(oracle.hamiltonian.dim)]
    return _maximize(evals)


def eta_two(
    oracle: HardOracleSpec,
    phi: float,
    theta: float,
    t: int,
    input_state=0,
    path: str = "fast",
    noise: cs.NoiseSpec | None = None,
    unitary: str = "exact",
    trotter_steps: int | None = None,
) -> EtaEvaluation:
    """Acceptance weighted by ``<B> - theta``, with the tape-length guard.

    A branch whose decoded index ``z'`` has ``t < d_prime * bitlen(z')`` is
    rejected outright.
    """
    return _evaluate(oracle, phi, t, input_state, theta, path, noise, unitary, trotter_steps)


def eta_two_max(oracle: HardOracleSpec, phi: float, theta: float, t: int, **kwargs) -> EtaEvaluation:
    evals = [eta_two(oracle, phi, theta, t, g, **kwargs) for g in range(oracle.hamiltonian.dim)]
    return _maximize(evals)


def theta_thresholds(oracle: HardOracleSpec) -> tuple[float, float]:
    """``theta`` below the first value forces ``eta_max >= 1/2``; above the second, ``<= 2/5``."""
    star = oracle.lambda_star()
    return star - 0.5 - 1 / oracle.p2, star - 0.4 + 1 / oracle.p2


@dataclass(frozen=True)
class LadderReport:
    """Ground-energy drift when ``exp(i pi H)`` is replaced by simulated evolution."""

    power: int
    epsilon: float
    simulation_error: float
    trotter_steps: int
    kappa: float
    drift: float

    @property
    def bound(self) -> float:
        return self.kappa * self.epsilon


def simulation_ladder(h: ChainHamiltonian, power: int, epsilon: float, max_steps: int = 2**16) -> LadderReport:
    """Check ``|lmin(pi T H) - lmin(pi T H'')| <= kappa * eps`` for ``T = power``.

    ``H`` is rescaled to ``G' = 4H / (pi n)`` with ``n`` the chain length; the
    unit-time evolution of ``G'`` is simulated to accuracy
    ``4 eps / (pi**2 n T)``; ``H''`` is ``pi n / 4`` times the Hamiltonian
    generating the simulated unitary.
    """
    n = h.length
    scale = 4 / (math.pi * n)
    g_prime = h.matrix * scale
    if np.linalg.norm(g_prime, 2) > math.pi / 4:
        raise ValueError("rescaled Hamiltonian exceeds pi/4; principal branch not guaranteed")
    target = 4 * epsilon / (math.pi**2 * n * power)
    w, v = h.spectrum
    exact = (v * np.exp(1j * w * scale)) @ v.conj().T
    scaled = ChainHamiltonian(h.local_dim, n, h.two_site_term * scale, h.one_site_term * scale)
    steps = 1
    while True:
        approx = trotter2(scaled, TrotterPlan(1.0, 1.0 / steps))
        err = float(np.linalg.norm(approx - exact, 2))
        if err <= target or steps >= max_steps:
            break
        steps *= 2
    if err > target:
        raise ValueError(f"could not reach simulation accuracy {target:.3g} within {max_steps} steps")
    h_eff = effective_hamiltonian(approx, 1.0)
    kappa = float(np.linalg.norm(h_eff - g_prime, 2)) / err if err > 0 else 0.0
    h_dd = h_eff / scale
    lam = np.linalg.eigvalsh(math.pi * power * h.matrix)[0]
    lam_dd = np.linalg.eigvalsh(math.pi * power * h_dd)[0]
    return LadderReport(power, epsilon, err, steps, kappa, float(abs(lam - lam_dd)))


def _matrix_from_json(rows) -> np.ndarray:
    out = []
    for row in rows:
        line = []
        for entry in row:
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ValueError("complex entries are [real, imag] pairs")
                line.append(complex(float(entry[0]), float(entry[1])))
            else:
                line.append(complex(float(entry)))
        out.append(line)
    return np.array(out, dtype=complex)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def oracle_from_dict(data: Mapping[str, Any]) -> HardOracleSpec:
    """Build an oracle from the JSON layout documented in the README."""
    required = ("local_dim", "length", "two_site_term")
    missing = [k for k in required if k not in data]
    if missing:
        raise ValueError(f"oracle description lacks {', '.join(missing)}")
    d = int(data["local_dim"])
    h = ChainHamiltonian(
        d,
        int(data["length"]),
        _matrix_from_json(data["two_site_term"]),
        _matrix_from_json(data["one_site_term"]) if data.get("one_site_term") is not None else None,
    )
    obs = _matrix_from_json(data["observable"]) if data.get("observable") is not None else None
    return HardOracleSpec(
        h,
        delta=float(data.get("delta", 0.1)),
        p1=float(data.get("p1", 100.0)),
        p2=float(data.get("p2", 20.0)),
        observable=obs,
        d_prime=float(data.get("d_prime", 1.0)),
        name=str(data.get("name", "")),
    )


def oracle_to_dict(oracle: HardOracleSpec) -> dict[str, Any]:
    h = oracle.hamiltonian
    return {
        "name": oracle.name,
        "local_dim": h.local_dim,
        "length": h.length,
        "two_site_term": _matrix_to_json(h.two_site_term),
        "one_site_term": _matrix_to_json(h.one_site_term),
        "observable": _matrix_to_json(oracle.observable),
        "delta": oracle.delta,
        "p1": oracle.p1,
        "p2": oracle.p2,
        "d_prime": oracle.d_prime,
    }


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


def toy_one_param_oracle() -> HardOracleSpec:
    """Four-qubit chain with a non-degenerate spectrum inside ``(0.1, 0.4)``."""
    heis = (np.kron(_X, _X) + np.kron(_Y, _Y) + 0.5 * np.kron(_Z, _Z)) * 0.02
    one = 0.03 * np.eye(2) + 0.025 * (np.eye(2) - _Z) + 0.01 * _X
    return HardOracleSpec(ChainHamiltonian(2, 4, heis, one), delta=0.05, name="toy-1p")


def toy_two_param_oracle(lambda_star: int = 2) -> HardOracleSpec:
    """Four-qubit chain whose low-energy states have ``<B>`` near ``lambda_star``.

    A field on every site favours ``|1>`` (for ``lambda_star = 2``) or ``|0>``
    (for ``lambda_star = 1``) and the projector ``A = |1><1|`` sits on site 0.
    """
    if lambda_star not in (1, 2):
        raise ValueError("lambda_star must be 1 or 2")
    wrong = np.diag([1.0, 0.0]) if lambda_star == 2 else np.diag([0.0, 1.0])
    coupling = 0.01 * (np.kron(_X, _X) + np.kron(_Y, _Y) + np.kron(_Z, _Z)) / 4
    one = 0.01 * np.eye(2) + 0.105 * wrong
    return HardOracleSpec(
        ChainHamiltonian(2, 4, coupling, one),
        delta=0.08,
        p1=100.0,
        p2=20.0,
        observable=np.diag([0.0, 1.0]).astype(complex),
        name=f"toy-2p-lambda{lambda_star}",
    )
