"""Critical-point search against pluggable ground-energy oracles.

An oracle classifies a parameter point into one of two phases.  In the
one-parameter problem phase A sits below the critical point ``phi*`` and
phase B above it.  In the two-parameter problem phase A sits below the
critical line ``theta*(phi)`` and phase B above it; along ``theta = 0`` the
line first appears at an offset ``y``, so points with ``phi < y`` are all in
phase B.  A point exactly on the boundary is reported in whichever phase is
gapless (B for one parameter, A for two).

The solvers bisect; ``brute_scan`` classifies a full grid and serves as an
independent reference.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np

from . import assembly as asm
from .eta import HardOracleSpec, eta_one_max, eta_two_max, toy_one_param_oracle, toy_two_param_oracle
from .spectral import (
    GapClass,
    GapCriterion,
    SpectrumResult,
    classify_gap,
    guarded_chain,
    order_parameter_expectation,
    xy_spectrum,
)

__all__ = [
    "Phase",
    "Decision",
    "UndeterminedPoint",
    "PromiseViolation",
    "PointReport",
    "GroundEnergyOracle",
    "PlantedStepOracle",
    "PlantedLineOracle",
    "EtaBackedOracle",
    "CrtPrmInstance",
    "PhaseDiagram",
    "solve_1crt",
    "solve_2crt",
    "locate_critical_theta",
    "brute_scan",
    "end_to_end_eta_oracle",
    "toy_instance_1p",
    "toy_instance_2p",
    "instance_from_dict",
]


class Phase(str, Enum):
    A = "PhaseA"
    B = "PhaseB"


class Decision(str, Enum):
    YES = "YES"
    NO = "NO"


class UndeterminedPoint(RuntimeError):
    """The oracle could not place a point in either phase."""

    def __init__(self, point: tuple[float, ...], reason: str = ""):
        super().__init__(f"point {point} is undetermined{': ' + reason if reason else ''}")
        self.point = point


class PromiseViolation(RuntimeError):
    """The instance breaks its promise (critical point inside the gap, mixed rectangle, ...)."""


@dataclass(frozen=True)
class PointReport:
    point: tuple[float, ...]
    phase: Phase
    ground_interval: tuple[float, float]
    gap: float
    order_parameter: float
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "point": list(self.point),
            "phase": self.phase.value,
            "ground_interval": list(self.ground_interval),
            "gap": self.gap,
            "order_parameter": self.order_parameter,
            "details": self.details,
        }


class GroundEnergyOracle:
    """Base class: subclasses implement ``_evaluate``; queries are counted."""

    dims = 1

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._count = 0

    @property
    def query_count(self) -> int:
        return self._count

    def reset_count(self) -> None:
        with self._lock:
            self._count = 0

    def evaluate(self, *point: float) -> PointReport:
        if len(point) != self.dims:
            raise ValueError(f"oracle expects {self.dims} coordinates, got {len(point)}")
        with self._lock:
            self._count += 1
        return self._evaluate(tuple(float(p) for p in point))

    def classify(self, *point: float) -> Phase:
        return self.evaluate(*point).phase

    def _evaluate(self, point: tuple[float, ...]) -> PointReport:
        raise NotImplementedError


class PlantedStepOracle(GroundEnergyOracle):
    """Phase A for ``phi < phi_star``, phase B otherwise."""

    dims = 1

    def __init__(self, phi_star: float):
        super().__init__()
        self.phi_star = float(phi_star)

    def _evaluate(self, point):
        (phi,) = point
        if phi < self.phi_star:
            return PointReport(point, Phase.A, (0.0, 0.0), 1.0, 1.0)
        return PointReport(point, Phase.B, (-1.0, -1.0), 0.0, 0.0)


class PlantedLineOracle(GroundEnergyOracle):
    """Phase A for ``phi >= y`` and ``theta < theta_star(phi)``, phase B otherwise."""

    dims = 2

    def __init__(self, y: float, theta_star: float | Callable[[float], float]):
        super().__init__()
        self.y = float(y)
        self.theta_star = theta_star if callable(theta_star) else (lambda _phi, c=float(theta_star): c)

    def _evaluate(self, point):
        phi, theta = point
        if phi >= self.y and theta < self.theta_star(phi):
            return PointReport(point, Phase.A, (-1.0, -1.0), 0.0, 0.0)
        return PointReport(point, Phase.B, (0.0, 0.0), 1.0, 1.0)


class EtaBackedOracle(GroundEnergyOracle):
    """Classifies points through the acceptance functional, square energy, and gap test.

    ``mode="limit"`` evaluates the lattice at a size where a negative square
    pushes the shifted energy to ``-1`` or below, standing in for the
    thermodynamic limit; the dense sector is the XY chain at ``dense_size``
    sites.  ``mode="L0"`` uses the fixed threshold size implied by the
    promise and may leave points undetermined.  ``mode="ed"`` diagonalizes
    the guarded dense/trivial chain at ``dense_size`` sites.
    """

    def __init__(
        self,
        oracle: HardOracleSpec,
        t: int,
        params: int = 1,
        b: int = asm.DEFAULT_B,
        scale_exponent: int = 0,
        criterion: GapCriterion | None = None,
        dense_size: int = 32,
        mode: str = "limit",
        dense_levels: int = 64,
    ):
        super().__init__()
        if params not in (1, 2):
            raise ValueError("params must be 1 or 2")
        if mode not in ("limit", "L0", "ed"):
            raise ValueError(f"unknown mode {mode!r}")
        self.dims = params
        self.oracle = oracle
        self.t = t
        self.b = b
        self.scale_exponent = scale_exponent
        self.criterion = criterion or GapCriterion((2.0,), (0.0, 0.5))
        self.mode = mode
        self.dense_size = dense_size
        self.L_N = asm.square_size_for(t, oracle.N)
        self.m_N = t
        if mode == "ed":
            if dense_size > 7:
                raise ValueError("guarded chain is limited to 7 sites")
            self._dense = None
        else:
            self._dense = xy_spectrum(dense_size, levels=dense_levels)
        self.criterion.check(dense_size)
        self.L0 = self._promise_threshold()

    def _promise_threshold(self) -> int:
        # worst promised acceptance on the accepting side gives the smallest |square energy|
        worst = asm.square_energy_1p(1 - asm.PI2_OVER_24, self.L_N, self.m_N, (self.L_N, self.m_N), self.b)
        if self.dims == 2:
            worst = asm.square_energy_2p(0.5, self.L_N, self.m_N, (self.L_N, self.m_N), self.b)
        return asm.threshold_size(worst, self.L_N, self.b)

    def eta(self, point: tuple[float, ...]) -> float:
        phi = asm.rescale_phi(point[0], self.scale_exponent, self.t)
        if self.dims == 1:
            return eta_one_max(self.oracle, phi, self.t).value
        return eta_two_max(self.oracle, phi, point[1], self.t).value

    def square(self, eta_val: float) -> asm.SquareEnergy:
        fn = asm.square_energy_1p if self.dims == 1 else asm.square_energy_2p
        if self.dims == 1:
            eta_val = min(1.0, max(0.0, eta_val))
        return fn(eta_val, self.L_N, self.m_N, (self.L_N, self.m_N), self.b)

    def lattice_size(self, square: asm.SquareEnergy) -> int:
        if self.mode == "L0" or square.sign is not asm.Sign.NEGATIVE:
            return max(self.L0, self.L_N)
        reps = math.floor(math.sqrt(2.0 / abs(square.value))) + 1
        return self.L_N * reps

    def _evaluate(self, point):
        eta_val = self.eta(point)
        sq = self.square(eta_val)
        size = self.lattice_size(sq)
        lat = asm.lattice_energy(sq, size, self.L_N)
        h_prime = lat.total
        details = {
            "eta": eta_val,
            "square": sq.to_dict(),
            "lattice": lat.to_dict(),
            "dense_size": self.dense_size,
        }
        if self.mode == "ed":
            chain = guarded_chain(self.dense_size, h_prime)
            w, v = np.linalg.eigh(chain.matrix)
            spec = SpectrumResult.from_eigenvalues(w)
            order = order_parameter_expectation(v[:, 0], chain.order_spec, self.dense_size)
        else:
            spec = asm.combined_spectrum(h_prime, self._dense)
            # the zero level is the trivial product state, which carries the order parameter
            order = 1.0 if spec.ground_energy == 0.0 and h_prime > 0 else 0.0
        cls = classify_gap(spec, self.criterion, self.dense_size)
        if cls is GapClass.UNDETERMINED:
            raise UndeterminedPoint(point, f"gap {spec.gap:.6g} between the criterion thresholds")
        gapped = cls is GapClass.GAPPED
        if self.dims == 1:
            phase = Phase.A if gapped else Phase.B
        else:
            phase = Phase.B if gapped else Phase.A
        ground = (min(0.0, lat.total_interval[0]), min(0.0, lat.total_interval[1]))
        details["gap_class"] = cls.value
        return PointReport(point, phase, ground, float(spec.gap), float(order), details)


def end_to_end_eta_oracle(
    oracle: HardOracleSpec | None = None, t: int = 6, b: int = asm.DEFAULT_B, params: int = 1, **kwargs
) -> EtaBackedOracle:
    """Wire the acceptance functional, energy bookkeeping, and gap test into an oracle."""
    if oracle is None:
        oracle = toy_one_param_oracle() if params == 1 else toy_two_param_oracle(2)
    return EtaBackedOracle(oracle, t, params=params, b=b, **kwargs)


@dataclass(frozen=True)
class CrtPrmInstance:
    """A critical-parameter promise instance.

    One parameter: ``phi*`` is promised to be ``<= alpha`` (YES) or
    ``>= beta`` (NO) inside ``phi_domain``.  Two parameters: the critical
    line over ``S_kappa = [y + kappa, y + 2 kappa]`` is promised to lie
    wholly above ``beta1`` (YES) or wholly below ``alpha1`` (NO).
    """

    kind: str
    N: int
    alpha: float = 0.0
    beta: float = 0.0
    phi_domain: tuple[float, float] = (0.0, 0.5)
    alpha1: float = 0.0
    beta1: float = 0.0
    kappa: float = 0.0
    theta_domain: tuple[float, float] = (0.0, 2.0)
    samples: int = 8

    def __post_init__(self) -> None:
        if self.kind not in ("1crt", "2crt"):
            raise ValueError(f"kind must be '1crt' or '2crt', got {self.kind!r}")
        lo, hi = self.phi_domain
        if not lo < hi:
            raise ValueError("phi domain is empty")
        if self.kind == "1crt" and not self.alpha < self.beta:
            raise ValueError("need alpha < beta")
        if self.kind == "2crt":
            if not self.alpha1 < self.beta1:
                raise ValueError("need alpha1 < beta1")
            if self.kappa <= 0:
                raise ValueError("kappa must be positive")
            if self.samples < 1:
                raise ValueError("need at least one sample in S_kappa")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "N": self.N,
            "alpha": self.alpha,
            "beta": self.beta,
            "phi_domain": list(self.phi_domain),
            "alpha1": self.alpha1,
            "beta1": self.beta1,
            "kappa": self.kappa,
            "theta_domain": list(self.theta_domain),
            "samples": self.samples,
        }


def instance_from_dict(data: dict[str, Any]) -> CrtPrmInstance:
    known = {f for f in CrtPrmInstance.__dataclass_fields__}
    extra = set(data) - known - {"oracle", "t", "b", "mode", "planted"}
    if extra:
        raise ValueError(f"unknown instance fields: {sorted(extra)}")
    kw = {k: v for k, v in data.items() if k in known}
    for key in ("phi_domain", "theta_domain"):
        if key in kw:
            kw[key] = tuple(float(x) for x in kw[key])
    return CrtPrmInstance(**kw)


@dataclass
class PhaseDiagram:
    kind: str
    grid: list[tuple[tuple[float, ...], Phase]]
    critical_estimate: Any
    decision: Decision
    queries: int
    notes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        crit = self.critical_estimate
        if isinstance(crit, dict):
            crit = [{"phi": k, "theta_interval": list(v)} for k, v in sorted(crit.items())]
        elif isinstance(crit, tuple):
            crit = list(crit)
        return {
            "kind": self.kind,
            "decision": self.decision.value,
            "critical_estimate": crit,
            "queries": self.queries,
            "grid": [{"point": list(p), "phase": ph.value} for p, ph in self.grid],
            "notes": self.notes,
        }

    def csv_rows(self) -> list[list[Any]]:
        return [list(p) + [ph.value] for p, ph in self.grid]


def _bisect(classify: Callable[[float], Phase], lo: float, hi: float, left: Phase, tol: float, grid: list) -> tuple[float, float]:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ph = classify(mid)
        grid.append((mid, ph))
        if ph is left:
            lo = mid
        else:
            hi = mid
    return lo, hi


def solve_1crt(instance: CrtPrmInstance, oracle: GroundEnergyOracle, tol: float = 1e-3) -> PhaseDiagram:
    """Bisect for ``phi*``: two endpoint classifications plus ``ceil(log2(width/tol))`` steps."""
    if instance.kind != "1crt":
        raise ValueError("instance is not one-parameter")
    if tol <= 0:
        raise ValueError("tol must be positive")
    start = oracle.query_count
    lo, hi = instance.phi_domain
    visited: list[tuple[float, Phase]] = []
    c_lo = oracle.classify(lo)
    c_hi = oracle.classify(hi)
    visited += [(lo, c_lo), (hi, c_hi)]
    if c_lo is Phase.B:
        crit: tuple[float, float] = (-math.inf, lo)
    elif c_hi is Phase.A:
        crit = (hi, math.inf)
    else:
        crit = _bisect(oracle.classify, lo, hi, Phase.A, tol, visited)
    decision = _decide_1p(instance, crit)
    grid = [((p,), ph) for p, ph in sorted(visited)]
    return PhaseDiagram("1crt", grid, crit, decision, oracle.query_count - start, {"tol": tol})


def _decide_1p(instance: CrtPrmInstance, crit: tuple[float, float]) -> Decision:
    # the bracket holds phi*; the promise leaves (-inf, alpha] or [beta, inf)
    yes = crit[0] <= instance.alpha
    no = crit[1] >= instance.beta
    if yes and not no:
        return Decision.YES
    if no and not yes:
        return Decision.NO
    if yes and no:
        raise ValueError(f"bracket [{crit[0]:.6g}, {crit[1]:.6g}] is wider than the promise gap; lower tol")
    raise PromiseViolation(
        f"critical point in [{crit[0]:.6g}, {crit[1]:.6g}] is not separated from the promise gap "
        f"[{instance.alpha:.6g}, {instance.beta:.6g}]"
    )


def locate_critical_theta(
    oracle: GroundEnergyOracle, phi: float, theta_lo: float, theta_hi: float, tol: float = 1e-3
) -> tuple[float, float]:
    """Bracket ``theta*(phi)`` by bisection; requires phase A at ``theta_lo`` and B at ``theta_hi``."""
    a = oracle.classify(phi, theta_lo)
    b = oracle.classify(phi, theta_hi)
    if a is not Phase.A or b is not Phase.B:
        raise PromiseViolation(f"no crossing in theta on [{theta_lo}, {theta_hi}] at phi = {phi}")
    return _bisect(lambda th: oracle.classify(phi, th), theta_lo, theta_hi, Phase.A, tol, [])


def solve_2crt(instance: CrtPrmInstance, oracle: GroundEnergyOracle, tol: float = 1e-3) -> PhaseDiagram:
    """Locate ``y`` on ``theta = 0``, then test ``theta = alpha1, beta1`` across ``S_kappa``."""
    if instance.kind != "2crt":
        raise ValueError("instance is not two-parameter")
    start = oracle.query_count
    lo, hi = instance.phi_domain
    visited: list[tuple[tuple[float, float], Phase]] = []

    def on_axis(phi: float) -> Phase:
        ph = oracle.classify(phi, 0.0)
        visited.append(((phi, 0.0), ph))
        return ph

    if on_axis(lo) is not Phase.B or on_axis(hi) is not Phase.A:
        raise PromiseViolation("the theta = 0 axis does not cross the critical line inside the phi domain")
    y_lo, y_hi = _bisect(on_axis, lo, hi, Phase.B, tol, [])
    y = 0.5 * (y_lo + y_hi)
    phis = np.linspace(y + instance.kappa, y + 2 * instance.kappa, instance.samples)
    sides = set()
    for phi in phis:
        for th in (instance.beta1, instance.alpha1):
            ph = oracle.classify(float(phi), th)
            visited.append(((float(phi), th), ph))
        above = visited[-2][1] is Phase.A  # still phase A at theta = beta1
        below = visited[-1][1] is Phase.B  # already phase B at theta = alpha1
        if above and not below:
            sides.add(Decision.YES)
        elif below and not above:
            sides.add(Decision.NO)
        else:
            raise PromiseViolation(f"critical line at phi = {phi:.6g} falls between alpha1 and beta1")
    if len(sides) != 1:
        raise PromiseViolation("the rectangle is split between both phases")
    notes = {"y_interval": [y_lo, y_hi], "S_kappa": [float(phis[0]), float(phis[-1])], "tol": tol}
    return PhaseDiagram("2crt", sorted(visited), (y_lo, y_hi), sides.pop(), oracle.query_count - start, notes)


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def brute_scan(
    instance: CrtPrmInstance,
    oracle: GroundEnergyOracle,
    resolution: int,
    workers: int = 1,
    theta_resolution: int | None = None,
) -> PhaseDiagram:
    """Classify a full grid.

    One parameter: ``resolution`` points across the phi domain.  Two
    parameters: ``resolution`` phi values across ``S_kappa`` (located from a
    theta = 0 scan) times ``theta_resolution`` values across the theta domain.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    start = oracle.query_count
    lo, hi = instance.phi_domain
    phis = np.linspace(lo, hi, resolution)
    if instance.kind == "1crt":
        phases = _map(lambda p: oracle.classify(float(p)), phis, workers)
        grid = [((float(p),), ph) for p, ph in zip(phis, phases)]
        crit = _first_change(phis, phases, Phase.A)
        decision = _decide_1p(instance, crit)
        changes = sum(1 for a, b in zip(phases, phases[1:]) if a is not b)
        return PhaseDiagram("1crt", grid, crit, decision, oracle.query_count - start, {"changes": changes})
    axis = _map(lambda p: oracle.classify(float(p), 0.0), phis, workers)
    y_lo, y_hi = _first_change(phis, axis, Phase.B)
    if not math.isfinite(y_lo) or not math.isfinite(y_hi):
        raise PromiseViolation("the theta = 0 axis does not cross the critical line inside the phi domain")
    y = 0.5 * (y_lo + y_hi)
    s_phis = np.linspace(y + instance.kappa, y + 2 * instance.kappa, resolution)
    thetas = np.linspace(*instance.theta_domain, theta_resolution or resolution)
    points = [(float(p), float(th)) for p in s_phis for th in thetas]
    phases = _map(lambda pt: oracle.classify(*pt), points, workers)
    grid = list(zip(points, phases))
    crit: dict[float, tuple[float, float]] = {}
    single = True
    for i, p in enumerate(s_phis):
        column = phases[i * len(thetas) : (i + 1) * len(thetas)]
        crit[float(p)] = _first_change(thetas, column, Phase.A)
        single &= sum(1 for a, b in zip(column, column[1:]) if a is not b) <= 1
    in_rect = [
        ph for (p, th), ph in grid if instance.alpha1 <= th <= instance.beta1
    ]
    if in_rect and all(ph is Phase.A for ph in in_rect):
        decision = Decision.YES
    elif in_rect and all(ph is Phase.B for ph in in_rect):
        decision = Decision.NO
    else:
        raise PromiseViolation("the rectangle is split between both phases")
    notes = {"y_interval": [y_lo, y_hi], "single_crossing": single}
    return PhaseDiagram("2crt", grid, crit, decision, oracle.query_count - start, notes)


def _first_change(xs: Sequence[float], phases: Sequence[Phase], left: Phase) -> tuple[float, float]:
    if phases[0] is not left:
        return (-math.inf, float(xs[0]))
    for i in range(1, len(xs)):
        if phases[i] is not left:
            return (float(xs[i - 1]), float(xs[i]))
    return (float(xs[-1]), math.inf)


def toy_instance_1p() -> CrtPrmInstance:
    """Instance matched to the one-parameter toy oracle; its critical point lies below 0.2."""
    return CrtPrmInstance("1crt", N=4, alpha=0.2, beta=0.3, phi_domain=(0.0, 0.5))


def toy_instance_2p(oracle: HardOracleSpec | None = None) -> CrtPrmInstance:
    """Instance matched to the two-parameter toy oracles: ``S_kappa`` is the promised window."""
    delta = 0.08 if oracle is None else oracle.delta
    return CrtPrmInstance(
        "2crt",
        N=4,
        phi_domain=(0.0, 0.3),
        alpha1=0.7,
        beta1=1.4,
        kappa=delta / 3,
        theta_domain=(0.0, 2.0),
    )
