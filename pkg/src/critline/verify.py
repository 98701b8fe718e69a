"""Acceptance checks shared by the test-suite and ``critline verify``.

Every check returns a :class:`CheckResult` whose ``metrics`` hold the
measured quantities, so a failing check reports by how much it failed.
Checks are deterministic for a given seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import assembly as asm
from . import circuit as cs
from . import encoding as enc
from . import hamsim as hs
from . import phasediag as pd
from . import qpe
from . import spectral as sp
from .eta import eta_one, eta_one_max, toy_one_param_oracle, toy_two_param_oracle

__all__ = ["CheckResult", "CHECKS", "SUITES", "run_suite", "suite_names"]


@dataclass
class CheckResult:
    name: str
    criterion: str
    passed: bool
    metrics: dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.criterion} {self.name}"

    def to_dict(self, timings: bool = False) -> dict[str, Any]:
        out = {"name": self.name, "criterion": self.criterion, "passed": self.passed, "metrics": self.metrics}
        if timings:
            out["seconds"] = self.seconds
        return out


def check_qpe_vs_circuit(seed: int = 0) -> CheckResult:
    """Closed-form readout amplitudes against state-vector phase estimation, t = 2..8."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(2, 9):
        for xi in rng.uniform(-0.5, 0.5, 50):
            u = np.diag([np.exp(2j * np.pi * xi), 1.0])
            state = cs.qpe_circuit(u, cs.StateVector.basis(1, 0), t)
            sim = cs.register_amplitudes(state, t, np.array([1.0, 0.0]))
            closed = qpe.amplitude_profile(qpe.QpePoint(t, float(xi))).by_register_index()
            worst = max(worst, float(np.max(np.abs(sim - closed))))
    return CheckResult("qpe closed form vs circuit", "C1", worst <= 1e-10, {"max_deviation": worst})


def check_midpoint_symmetry(seed: int = 0) -> CheckResult:
    """Low-half mass is 1/2 at the transition midpoint and antisymmetric about it."""
    mid_err = 0.0
    sym_err = 0.0
    for t in range(2, 11):
        mid_err = max(mid_err, abs(qpe.low_half_mass(t, 2.0 ** -(t + 1)) - 0.5))
        chi = np.linspace(-0.45, 0.45, 200)
        dev = (qpe.centered_mass(t, chi) - 0.5) + (qpe.centered_mass(t, -chi) - 0.5)
        sym_err = max(sym_err, float(np.max(np.abs(dev))))
    ok = mid_err <= 1e-10 and sym_err <= 1e-10
    return CheckResult("midpoint and symmetry", "C2", ok, {"midpoint_error": mid_err, "antisymmetry_error": sym_err})


def check_pi2_bounds(seed: int = 0) -> CheckResult:
    """Mass at the ends of the monotone window, from the closed form and from the engine."""
    oracle = toy_one_param_oracle()
    lam = float(oracle.spectrum[0][0])
    far_max = 0.0
    near_min = 1.0
    for t in range(4, 11):
        far = qpe.low_half_mass(t, qpe.far_endpoint_offset(t))
        near = qpe.low_half_mass(t, qpe.near_endpoint_offset(t))
        if t % 2 == 0:
            # the same quantities through the acceptance functional on the toy ground state
            far = max(far, eta_one(oracle, lam - qpe.far_endpoint_offset(t), t, 0).value)
            near = min(near, eta_one(oracle, lam - qpe.near_endpoint_offset(t), t, 0).value)
        far_max = max(far_max, far)
        near_min = min(near_min, near)
    ok = far_max <= 0.411235 and near_min >= 0.588765
    return CheckResult("pi^2/24 bounds", "C3", ok, {"far_side_max": far_max, "near_side_min": near_min})


def _comparator_mass(lam: float, phi: float, t: int, noise: cs.NoiseSpec | None) -> float:
    u_a = np.diag([np.exp(2j * np.pi * lam), 1.0])
    u_b = np.diag([np.exp(2j * np.pi * phi), 1.0])
    state = cs.phase_comparator(u_a, u_b, cs.StateVector.basis(1, 0), cs.StateVector.basis(1, 0), t, noise)
    return cs.low_outcome_probability(state, t)


def _min_slope(values: np.ndarray, h: float) -> float:
    return float(np.min((values[2:] - values[:-2]) / (2 * h)))


def check_derivative(seed: int = 0, seeds: int = 20) -> CheckResult:
    """Finite-difference slope of the acceptance in phi across the monotone window.

    The slope is checked on 33 grid points for t = 4..8, exactly and with
    gate noise ``2**-2t`` on the parameter-free gates for ``seeds`` seeds.
    """
    lam = 0.3
    exact_min = math.inf
    noisy_min = math.inf
    for t in range(4, 9):
        lo = lam - qpe.far_endpoint_offset(t)
        hi = lam - qpe.near_endpoint_offset(t)
        phis = np.linspace(lo, hi, 33)
        h = phis[1] - phis[0]
        exact = qpe.low_half_mass(t, lam - phis)
        exact_min = min(exact_min, _min_slope(exact, h))
        for s in range(seeds):
            noise = cs.NoiseSpec(2.0 ** (-2 * t), seed * 1000 + s)
            vals = np.array([_comparator_mass(lam, float(p), t, noise) for p in phis])
            noisy_min = min(noisy_min, _min_slope(vals, h))
    ok = exact_min >= 1 and noisy_min >= 1
    return CheckResult("derivative bound", "C4", ok, {"min_slope_exact": exact_min, "min_slope_noisy": noisy_min})


def check_encoded_tail(seed: int = 0) -> CheckResult:
    """Valid-string mass below ``2**-t/2`` whenever the register is shorter than ``enc(N)``."""
    worst_ratio = 0.0
    rows = []
    for n in (5, 13, 100, 255):
        y = enc.encode(n)
        for t in range(2, len(y), 2):
            mass = qpe.valid_tail_mass(y, t)
            bound = 2.0 ** (-t / 2)
            worst_ratio = max(worst_ratio, mass / bound)
            rows.append([n, t, mass, bound])
    return CheckResult("encoded-string tail", "C5", worst_ratio < 1, {"worst_mass_over_bound": worst_ratio, "rows": rows})


def trotter_scaling_data(T: float = 1.0, steps=(1, 2, 4, 8, 16, 32, 64, 100)) -> dict[str, Any]:
    """Errors of the product formula on a 4-site field-Heisenberg chain."""
    h = hs.ChainHamiltonian(2, 4, hs.field_heisenberg_term())
    deltas = np.array([T / n for n in steps])
    global_err = np.array([hs.trotter_error(h, hs.TrotterPlan(T, d)) for d in deltas])
    step_err = np.array([hs.trotter_error(h, hs.TrotterPlan(d, d)) for d in deltas])
    s = 0.25 * math.pi / h.norm
    kappas = []
    for n in (4, 8, 16, 32):
        approx = hs.trotter2(h, hs.TrotterPlan(s, s / n))
        kappas.append(hs.effective_hamiltonian_distance(h, approx, s).kappa)
    return {
        "deltas": deltas.tolist(),
        "global_errors": global_err.tolist(),
        "step_errors": step_err.tolist(),
        "global_slope": hs.loglog_slope(deltas, global_err),
        "step_slope": hs.loglog_slope(deltas, step_err),
        "kappa_max": float(max(kappas)),
    }


def check_trotter(seed: int = 0) -> CheckResult:
    """Global slope 1.0 +- 0.15, per-step slope 2.0 +- 0.2, kappa < 10."""
    d = trotter_scaling_data()
    ok_global = abs(d["global_slope"] - 1.0) <= 0.15
    ok_step = abs(d["step_slope"] - 2.0) <= 0.2
    ok_kappa = d["kappa_max"] < 10
    metrics = {k: d[k] for k in ("global_slope", "step_slope", "kappa_max")}
    metrics.update({"global_slope_ok": ok_global, "step_slope_ok": ok_step, "kappa_ok": ok_kappa})
    return CheckResult("trotter scaling", "C6", ok_global and ok_step and ok_kappa, metrics)


def check_sandwich(seed: int = 0) -> CheckResult:
    """Marker-versus-clock sandwich at L = 4, 16, 64 and calibration for 7 <= L <= 256."""
    reports = [asm.sandwich_check(L, 4) for L in (4, 16, 64)]
    calib = [asm.calibration_check(L, 4) for L in range(7, 257)]
    ok = all(r.holds for r in reports) and all(c.holds for c in calib)
    metrics = {
        "sandwich": [
            {"L": r.L, "far_slack": r.far_slack, "near_slack": r.near_slack, "near_slack_coarse": r.near_slack_literal}
            for r in reports
        ],
        "coarse_slack_from_L": asm.literal_sandwich_threshold(4),
        "calibration_min_accept_slack": min(c.accept_slack for c in calib),
        "calibration_min_reject_slack": min(c.reject_slack for c in calib),
    }
    return CheckResult("energy sandwich", "C7", ok, metrics)


def check_single_critical_point(seed: int = 0) -> CheckResult:
    """One phase change on a 1000-point sweep; bisection brackets it in at most 12 queries."""
    oracle = pd.end_to_end_eta_oracle(t=6)
    inst = pd.toy_instance_1p()
    scan = pd.brute_scan(inst, oracle, 1000)
    oracle.reset_count()
    sol = pd.solve_1crt(inst, oracle, 1e-3)
    s_lo, s_hi = scan.critical_estimate
    b_lo, b_hi = sol.critical_estimate
    overlap = max(s_lo, b_lo) <= min(s_hi, b_hi)
    ok = scan.notes["changes"] == 1 and overlap and sol.queries <= 12 and b_hi - b_lo <= 1e-3
    metrics = {
        "changes": scan.notes["changes"],
        "sweep_interval": [s_lo, s_hi],
        "bisection_interval": [b_lo, b_hi],
        "queries": sol.queries,
        "decision": sol.decision.value,
    }
    return CheckResult("single critical point", "C8", ok, metrics)


def check_critical_band(seed: int = 0) -> CheckResult:
    """Critical theta inside the predicted band, single-crossing slices, YES/NO shapes."""
    yes_oracle = toy_two_param_oracle(2)
    oracle = pd.end_to_end_eta_oracle(yes_oracle, t=8, params=2)
    inst = pd.toy_instance_2p(yes_oracle)
    band = (2 - 0.5 - 1 / yes_oracle.p2, 2 - 0.4 + 1 / yes_oracle.p2)
    sol = pd.solve_2crt(inst, oracle, 1e-3)
    phis = np.linspace(*sol.notes["S_kappa"], inst.samples)
    thetas = [pd.locate_critical_theta(oracle, float(p), 0.0, 2.0, 1e-3) for p in phis]
    in_band = all(band[0] <= lo and hi <= band[1] for lo, hi in thetas)
    scan = pd.brute_scan(inst, oracle, 8, theta_resolution=41)
    no_oracle = pd.end_to_end_eta_oracle(toy_two_param_oracle(1), t=8, params=2)
    no_sol = pd.solve_2crt(inst, no_oracle, 1e-3)
    no_scan = pd.brute_scan(inst, no_oracle, 8, theta_resolution=41)
    shapes = (
        sol.decision is pd.Decision.YES
        and scan.decision is pd.Decision.YES
        and no_sol.decision is pd.Decision.NO
        and no_scan.decision is pd.Decision.NO
    )
    single = scan.notes["single_crossing"] and no_scan.notes["single_crossing"]
    metrics = {
        "band": list(band),
        "theta_star": [list(x) for x in thetas],
        "single_crossing": single,
        "yes_decision": sol.decision.value,
        "no_decision": no_sol.decision.value,
        "queries_yes": sol.queries,
    }
    return CheckResult("two-parameter critical band", "C9", in_band and single and shapes, metrics)


def check_gap_classification(seed: int = 0) -> CheckResult:
    """Trivial chain gapped, XY chain gapless, closed form to 64 sites and Lanczos to 14."""
    crit = sp.GapCriterion((2.0,), (0.0, 0.5))
    trivial_ok = True
    trivial_gaps = []
    # the criterion needs 1/p > 1/q, which holds from L = 5
    for L in range(5, 11):
        spec = sp.diagonalize(sp.trivial_chain(L))
        trivial_gaps.append(spec.gap)
        trivial_ok &= spec.gap >= 1 and sp.classify_gap(spec, crit, L) is sp.GapClass.GAPPED
    xy_ok = True
    gap_times_L = []
    spacings = []
    for L in (8, 16, 32, 64):
        spec = sp.xy_spectrum(L, levels=4096, window=0.5)
        gap_times_L.append(spec.gap * L)
        spacings.append(sp.max_spacing(spec, 0.5))
        xy_ok &= sp.classify_gap(spec, crit, L) is sp.GapClass.GAPLESS
    bounded = max(gap_times_L) <= math.pi / 2 + 1e-9
    shrinking = all(b < a for a, b in zip(spacings, spacings[1:]))
    ed_dev = 0.0
    for L in (6, 10, 14):
        h = hs.ChainHamiltonian(2, L, hs.xy_two_site_term())
        low = sp.extremal_eigs(sp.chain_matvec(h), 2, seed=seed, dim=2**L)
        spec = sp.SpectrumResult.from_eigenvalues(low)
        ed_dev = max(ed_dev, abs(spec.gap - sp.xy_gap(L)))
        xy_ok &= sp.classify_gap(spec, crit, L) is sp.GapClass.GAPLESS
    ok = trivial_ok and xy_ok and bounded and shrinking and ed_dev <= 1e-8
    metrics = {
        "trivial_min_gap": min(trivial_gaps),
        "xy_gap_times_L": gap_times_L,
        "xy_max_spacing": spacings,
        "lanczos_gap_deviation": ed_dev,
    }
    return CheckResult("gap classification", "C10", ok, metrics)


def check_encoding(seed: int = 0) -> CheckResult:
    """Round trip, cardinality of the valid set, validity of encodings."""
    round_trip = all(enc.decode(enc.encode(n)) == n for n in range(1, 1025))
    counts = [len(list(enc.valid_strings(t))) == 2 ** (t // 2) for t in range(2, 11, 2)]
    valid = all(enc.is_valid(enc.encode(n), 2 * enc.bit_length(n)) for n in range(1, 1025))
    ok = round_trip and all(counts) and valid
    return CheckResult("encoding invariants", "encoding", ok, {"round_trip": round_trip, "cardinality": all(counts), "valid": valid})


def check_eta_paths(seed: int = 0) -> CheckResult:
    """Closed-form and circuit evaluation of the acceptance functional agree."""
    oracle = toy_one_param_oracle()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in (2, 4, 6):
        for phi in rng.uniform(0.0, 0.5, 3):
            for g in (0, 5):
                a = eta_one(oracle, float(phi), t, g).value
                b = eta_one(oracle, float(phi), t, g, path="circuit").value
                worst = max(worst, abs(a - b))
    two = toy_two_param_oracle(2)
    for phi, theta in ((0.08, 1.5), (0.3, 1.0)):
        from .eta import eta_two

        a = eta_two(two, phi, theta, 4, 0).value
        b = eta_two(two, phi, theta, 4, 0, path="circuit").value
        worst = max(worst, abs(a - b))
    vec = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    best = eta_one_max(oracle, 0.2, 6).value
    mixed = eta_one(oracle, 0.2, 6, vec).value
    ok = worst <= 1e-8 and mixed <= best + 1e-12
    return CheckResult("acceptance fast vs circuit", "eta", ok, {"max_deviation": worst, "superposition_below_max": mixed <= best + 1e-12})


CHECKS: dict[str, tuple[Callable[[int], CheckResult], tuple[str, ...]]] = {
    "C1": (check_qpe_vs_circuit, ("qpe", "circuit")),
    "C2": (check_midpoint_symmetry, ("qpe", "quick")),
    "C3": (check_pi2_bounds, ("qpe", "eta", "quick")),
    "C4": (check_derivative, ("circuit", "eta")),
    "C5": (check_encoded_tail, ("encoding", "qpe", "quick")),
    "C6": (check_trotter, ("hamsim",)),
    "C7": (check_sandwich, ("assembly", "quick")),
    "C8": (check_single_critical_point, ("phasediag",)),
    "C9": (check_critical_band, ("phasediag",)),
    "C10": (check_gap_classification, ("spectral",)),
    "encoding": (check_encoding, ("encoding", "quick")),
    "eta": (check_eta_paths, ("eta",)),
}

SUITES = ("all", "quick", "encoding", "qpe", "circuit", "hamsim", "spectral", "eta", "assembly", "phasediag")


def suite_names(suite: str) -> list[str]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if suite == "all":
        return list(CHECKS)
    return [name for name, (_, tags) in CHECKS.items() if suite in tags]


def run_suite(suite: str = "all", seed: int = 0, progress: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    results = []
    for name in suite_names(suite):
        fn = CHECKS[name][0]
        start = time.perf_counter()
        res = fn(seed)
        res.seconds = time.perf_counter() - start
        results.append(res)
        if progress is not None:
            progress(res)
    return results
