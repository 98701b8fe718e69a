"""``critline`` command-line front end.

Exit codes: 0 on success, 1 on usage or input errors (and on failed checks
for ``verify``), 2 when a promise is violated.  Output goes to ``--output``,
else to ``$CRITLINE_OUTPUT_DIR/<command>.<ext>``, else to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import assembly as asm
from . import circuit as cs
from . import encoding as enc
from . import hamsim as hs
from . import phasediag as pd
from . import qpe
from . import spectral as sp
from . import verify as vf
from .eta import (
    eta_one,
    eta_one_max,
    eta_two,
    eta_two_max,
    oracle_from_dict,
    toy_one_param_oracle,
    toy_two_param_oracle,
)
from .output import csv_text, dumps, metadata

__all__ = ["main", "run", "build_parser", "RunConfig"]

OUTPUT_ENV = "CRITLINE_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    max_qubits: int
    max_dense_dim: int
    output: str | None
    fmt: str
    timestamp: bool
    workers: int


def _common(p: argparse.ArgumentParser, fmt: str = "json") -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output file (default: $CRITLINE_OUTPUT_DIR or stdout)")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default=fmt)
    p.add_argument("--config", help="JSON file whose keys mirror the flags")
    p.add_argument("--timestamp", action="store_true", help="record wall-clock time in the metadata")
    p.add_argument("--max-qubits", type=int, default=cs.MAX_QUBITS)
    p.add_argument("--max-dense-dim", type=int, default=hs.MAX_DENSE_DIM)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="critline", description="Phase-comparator and phase-diagram toolkit.")
    parser.add_argument("--version", action="version", version=f"critline {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    subs: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("encode", help="print the base-4 encoding of N")
    p.add_argument("N", type=int)
    subs["encode"] = p

    p = sub.add_parser("decode", help="print the integer encoded by a base-4 string")
    p.add_argument("string")
    subs["decode"] = p

    p = sub.add_parser("qpe", help="closed-form readout amplitudes")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--xi", type=float, required=True)
    _common(p, "csv")
    subs["qpe"] = p

    p = sub.add_parser("compare", help="simulate the phase comparator on two eigenphases")
    p.add_argument("--lam-a", type=float, required=True)
    p.add_argument("--lam-b", type=float, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    _common(p, "csv")
    subs["compare"] = p

    p = sub.add_parser("trotter", help="product-formula error scaling on a small chain")
    p.add_argument("--sites", type=int, default=4)
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--steps", type=int, nargs="+", default=[1, 2, 4, 8, 16, 32, 64, 100])
    _common(p)
    subs["trotter"] = p

    p = sub.add_parser("spectrum", help="low spectrum, gap and classification")
    p.add_argument("--model", choices=("xy", "trivial", "guarded"), required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--method", choices=("closed", "dense", "lanczos"), default="dense")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--h-prime", type=float, default=1.0)
    p.add_argument("--p", type=float, nargs="+", default=[2.0], help="coefficients of p(L), increasing degree")
    p.add_argument("--q", type=float, nargs="+", default=[0.0, 0.5], help="coefficients of q(L), increasing degree")
    _common(p)
    subs["spectrum"] = p

    p = sub.add_parser("eta", help="evaluate the acceptance functional")
    p.add_argument("--mode", choices=("one", "two"), required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--theta", type=float)
    p.add_argument("--t", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--oracle", help="oracle JSON file")
    src.add_argument("--toy", choices=("1p", "2p-yes", "2p-no"))
    p.add_argument("--input", type=int, help="eigenstate index (default: maximize over eigenstates)")
    p.add_argument("--path", choices=("fast", "circuit"), default="fast")
    p.add_argument("--noise", type=float, default=0.0)
    _common(p)
    subs["eta"] = p

    p = sub.add_parser("assemble", help="square and lattice energy from an acceptance value")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--b", type=int, default=asm.DEFAULT_B)
    p.add_argument("--theta", type=float, help="use the two-parameter square energy")
    p.add_argument("--target-L", type=int, help="L_N (default: L)")
    p.add_argument("--target-m", type=int, help="m_N (default: m)")
    p.add_argument("--lattice", type=int, help="lattice side (default: 2 L)")
    _common(p)
    subs["assemble"] = p

    p = sub.add_parser("phase-diagram", help="solve a critical-parameter instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=("1crt", "2crt"), required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--brute", type=int, help="also classify a grid of this resolution")
    _common(p)
    subs["phase-diagram"] = p

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--suite", default="all", choices=vf.SUITES)
    _common(p)
    subs["verify"] = p
    return parser, subs


def _apply_config(argv: list[str], subs: dict[str, argparse.ArgumentParser]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        data = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    command = next((a for a in argv if a in subs), None)
    if command is None:
        raise UsageError("config given without a subcommand")
    target = subs[command]
    dests = {a.dest for a in target._actions}
    clean = {k.replace("-", "_"): v for k, v in data.items()}
    if "format" in clean:
        clean["fmt"] = clean.pop("format")
    unknown = set(clean) - dests
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    for action in target._actions:
        if action.dest in clean:
            action.required = False
    target.set_defaults(**clean)


def _echo(args: argparse.Namespace) -> dict[str, Any]:
    skip = {"output", "config", "timestamp", "seed", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _destination(cfg: RunConfig) -> Path | None:
    if cfg.output:
        return Path(cfg.output)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env) / f"{cfg.command}.{cfg.fmt}"
    return None


def _write(cfg: RunConfig, text: str, stdout) -> None:
    dest = _destination(cfg)
    if dest is None:
        stdout.write(text)
        return
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(text)


def _emit(cfg, args, payload: dict[str, Any], stdout, table: tuple[list[str], list[list[Any]]] | None = None) -> None:
    meta = metadata(_echo(args), cfg.seed, cfg.timestamp)
    if cfg.fmt == "csv":
        if table is None:
            raise UsageError(f"{cfg.command} has no tabular output; use --format json")
        header, rows = table
        summary = {k: v for k, v in payload.items() if not isinstance(v, (list, dict))}
        _write(cfg, csv_text(header, rows, {**meta, "summary": summary}), stdout)
    else:
        _write(cfg, dumps({"metadata": meta, "result": payload}), stdout)


def _cmd_qpe(cfg, args, stdout) -> int:
    if args.t < 1 or args.t > 24:
        raise UsageError("--t must lie in 1..24")
    prof = qpe.amplitude_profile(qpe.QpePoint(args.t, args.xi))
    low = float(np.sum(prof.probabilities[prof.labels <= 0]))
    rows = [[int(L), a.real, a.imag, abs(a) ** 2] for L, a in zip(prof.labels, prof.amplitudes)]
    payload = {"t": args.t, "xi": args.xi, "low_half_mass": low, "rows": rows}
    _emit(cfg, args, payload, stdout, (["label", "re", "im", "probability"], rows))
    return 0


def _cmd_compare(cfg, args, stdout) -> int:
    if args.t + 2 > cfg.max_qubits:
        raise UsageError(f"{args.t + 2} qubits exceeds --max-qubits {cfg.max_qubits}")
    noise = cs.NoiseSpec(args.noise, cfg.seed) if args.noise > 0 else None
    u_a = np.diag([np.exp(2j * np.pi * args.lam_a), 1.0])
    u_b = np.diag([np.exp(2j * np.pi * args.lam_b), 1.0])
    state = cs.phase_comparator(u_a, u_b, cs.StateVector.basis(1, 0), cs.StateVector.basis(1, 0), args.t, noise)
    probs = cs.readout_distribution(state, args.t)
    rows = [[x, cs.signed_label(x, args.t), float(p)] for x, p in enumerate(probs)]
    payload = {"low_outcome_probability": cs.low_outcome_probability(state, args.t), "rows": rows}
    _emit(cfg, args, payload, stdout, (["register", "label", "probability"], rows))
    return 0


def _cmd_trotter(cfg, args, stdout) -> int:
    if 2**args.sites > cfg.max_dense_dim:
        raise UsageError("chain exceeds --max-dense-dim")
    h = hs.ChainHamiltonian(2, args.sites, hs.field_heisenberg_term())
    deltas = np.array([args.time / n for n in args.steps])
    g = [hs.trotter_error(h, hs.TrotterPlan(args.time, d)) for d in deltas]
    s = [hs.trotter_error(h, hs.TrotterPlan(d, d)) for d in deltas]
    rows = [[n, d, a, b] for n, d, a, b in zip(args.steps, deltas, g, s)]
    payload = {
        "global_slope": hs.loglog_slope(deltas, g) if len(deltas) > 1 else None,
        "step_slope": hs.loglog_slope(deltas, s) if len(deltas) > 1 else None,
        "rows": rows,
    }
    _emit(cfg, args, payload, stdout, (["steps", "delta", "global_error", "step_error"], rows))
    return 0


def _cmd_spectrum(cfg, args, stdout) -> int:
    L = args.L
    crit = sp.GapCriterion(tuple(args.p), tuple(args.q))
    order = None
    if args.model == "xy":
        if args.method == "closed":
            spec = sp.xy_spectrum(L, levels=args.levels)
        else:
            h = hs.ChainHamiltonian(2, L, hs.xy_two_site_term())
            spec = _numeric(h.dim, lambda: h.matrix, sp.chain_matvec(h), cfg, args)
    elif args.model == "trivial":
        if 2**L > cfg.max_dense_dim:
            raise UsageError("chain exceeds --max-dense-dim")
        spec = sp.SpectrumResult.from_eigenvalues(np.sort(np.diag(sp.trivial_chain(L))))
    else:
        if 4**L > cfg.max_dense_dim:
            raise UsageError("guarded chain exceeds --max-dense-dim")
        chain = sp.guarded_chain(L, args.h_prime)
        w, v = np.linalg.eigh(chain.matrix)
        spec = sp.SpectrumResult.from_eigenvalues(w)
        order = sp.order_parameter_expectation(v[:, 0], chain.order_spec, L)
    try:
        cls: str | None = sp.classify_gap(spec, crit, L).value
    except ValueError:
        cls = None  # the criterion does not separate the thresholds at this size
    low = spec.eigenvalues[: args.levels]
    payload = {
        "model": args.model,
        "L": L,
        "ground_energy": spec.ground_energy,
        "ground_degeneracy": spec.ground_degeneracy,
        "gap": spec.gap,
        "classification": cls,
        "order_parameter": order,
        "levels": low.tolist(),
    }
    _emit(cfg, args, payload, stdout, (["index", "energy"], [[i, e] for i, e in enumerate(low)]))
    return 0


def _numeric(dim, dense, matvec, cfg, args) -> sp.SpectrumResult:
    if args.method == "dense":
        if dim > cfg.max_dense_dim:
            raise UsageError(f"dimension {dim} exceeds --max-dense-dim; use --method lanczos")
        return sp.diagonalize(dense())
    k = min(args.levels, dim)
    return sp.SpectrumResult.from_eigenvalues(sp.extremal_eigs(matvec, k, seed=cfg.seed, dim=dim))


def _load_oracle(args):
    if args.oracle:
        try:
            return oracle_from_dict(json.loads(Path(args.oracle).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read oracle {args.oracle}: {exc}") from exc
    toy = args.toy or ("1p" if args.mode == "one" else "2p-yes")
    if toy == "1p":
        return toy_one_param_oracle()
    return toy_two_param_oracle(2 if toy == "2p-yes" else 1)


def _cmd_eta(cfg, args, stdout) -> int:
    oracle = _load_oracle(args)
    if oracle.hamiltonian.dim > cfg.max_dense_dim:
        raise UsageError("oracle exceeds --max-dense-dim")
    if args.path == "circuit" and args.t + oracle.N + 1 > cfg.max_qubits:
        raise UsageError("circuit exceeds --max-qubits")
    noise = cs.NoiseSpec(args.noise, cfg.seed) if args.noise > 0 else None
    kw = {"path": args.path, "noise": noise}
    if args.mode == "two":
        if args.theta is None:
            raise UsageError("--theta is required with --mode two")
        if args.input is None:
            ev = eta_two_max(oracle, args.phi, args.theta, args.t, **kw)
        else:
            ev = eta_two(oracle, args.phi, args.theta, args.t, args.input, **kw)
    else:
        ev = eta_one_max(oracle, args.phi, args.t, **kw) if args.input is None else eta_one(oracle, args.phi, args.t, args.input, **kw)
    payload = ev.to_dict()
    rows = [[r.get("z"), r.get("z_prime"), r.get("g"), r.get("weight"), r.get("low")] for r in ev.branch_masses]
    _emit(cfg, args, payload, stdout, (["z", "z_prime", "g", "weight", "low"], rows))
    return 0


def _cmd_assemble(cfg, args, stdout) -> int:
    target = (args.target_L or args.L, args.target_m if args.target_m is not None else args.m)
    if args.theta is None:
        sq = asm.square_energy_1p(args.eta, args.L, args.m, target, args.b)
    else:
        sq = asm.square_energy_2p(args.eta, args.L, args.m, target, args.b)
    lattice = args.lattice or 2 * args.L
    lat = asm.lattice_energy(sq, lattice, target[0])
    payload = {"square": sq.to_dict(), "lattice": lat.to_dict()}
    if sq.sign is asm.Sign.NEGATIVE and sq.certain:
        payload["threshold_size"] = asm.threshold_size(sq, target[0], args.b)
    _emit(cfg, args, payload, stdout)
    return 0


def _instance_oracle(data: dict[str, Any], mode: str):
    spec = data.get("oracle", {"toy": "1p" if mode == "1crt" else "2p-yes"})
    if "planted" in data:
        planted = data["planted"]
        if mode == "1crt":
            return pd.PlantedStepOracle(float(planted["phi_star"]))
        return pd.PlantedLineOracle(float(planted["y"]), float(planted["theta_star"]))
    t = int(data.get("t", 6 if mode == "1crt" else 8))
    b = int(data.get("b", asm.DEFAULT_B))
    params = 1 if mode == "1crt" else 2
    if "toy" in spec:
        toy = spec["toy"]
        if toy not in ("1p", "2p-yes", "2p-no"):
            raise UsageError(f"unknown toy oracle {toy!r}")
        hard = toy_one_param_oracle() if toy == "1p" else toy_two_param_oracle(2 if toy == "2p-yes" else 1)
    else:
        hard = oracle_from_dict(spec)
    return pd.end_to_end_eta_oracle(hard, t=t, b=b, params=params, mode=data.get("mode", "limit"))


def _cmd_phase_diagram(cfg, args, stdout) -> int:
    try:
        data = json.loads(Path(args.instance).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read instance {args.instance}: {exc}") from exc
    data.setdefault("kind", args.mode)
    if data["kind"] != args.mode:
        raise UsageError(f"instance kind {data['kind']} does not match --mode {args.mode}")
    inst = pd.instance_from_dict(data)
    oracle = _instance_oracle(data, args.mode)
    diagram = pd.solve_1crt(inst, oracle, args.tol) if args.mode == "1crt" else pd.solve_2crt(inst, oracle, args.tol)
    payload: dict[str, Any] = {"instance": inst.to_dict(), "solution": diagram.to_dict()}
    grid = diagram
    if args.brute:
        scan = pd.brute_scan(inst, oracle, args.brute, workers=cfg.workers)
        payload["brute"] = scan.to_dict()
        payload["agree"] = scan.decision is diagram.decision
        grid = scan
    header = ["phi", "phase"] if args.mode == "1crt" else ["phi", "theta", "phase"]
    table = (header, grid.csv_rows())
    if cfg.fmt == "json":
        _emit(cfg, args, payload, stdout)
        dest = _destination(cfg)
        if dest is not None:
            # a plot-ready grid next to the JSON document
            meta = metadata(_echo(args), cfg.seed, cfg.timestamp)
            dest.with_suffix(".csv").write_text(csv_text(*table, meta))
    else:
        _emit(cfg, args, {"decision": diagram.decision.value, "queries": diagram.queries}, stdout, table)
    return 0


def _cmd_verify(cfg, args, stdout) -> int:
    lines: list[str] = []

    def report(res: vf.CheckResult) -> None:
        line = res.line()
        lines.append(line)
        if _destination(cfg) is not None:
            stdout.write(line + "\n")
            stdout.flush()

    results = vf.run_suite(args.suite, cfg.seed, progress=report)
    passed = all(r.passed for r in results)
    payload = {
        "suite": args.suite,
        "passed": passed,
        "summary": lines,
        "checks": [r.to_dict(timings=cfg.timestamp) for r in results],
    }
    rows = [[r.criterion, r.name, "PASS" if r.passed else "FAIL"] for r in results]
    _emit(cfg, args, payload, stdout, (["criterion", "check", "status"], rows))
    return 0 if passed else 1


_COMMANDS = {
    "qpe": _cmd_qpe,
    "compare": _cmd_compare,
    "trotter": _cmd_trotter,
    "spectrum": _cmd_spectrum,
    "eta": _cmd_eta,
    "assemble": _cmd_assemble,
    "phase-diagram": _cmd_phase_diagram,
    "verify": _cmd_verify,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        _apply_config(argv, subs)
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("critline: error: a subcommand is required")
        if args.command == "encode":
            stdout.write(enc.encode(args.N).text + "\n")
            return 0
        if args.command == "decode":
            stdout.write(f"{enc.decode(enc.EncodedString.parse(args.string))}\n")
            return 0
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        cfg = RunConfig(
            args.command, args.seed, args.max_qubits, args.max_dense_dim, args.output, args.fmt, args.timestamp, args.workers
        )
        return _COMMANDS[args.command](cfg, args, stdout)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return 1
    except (pd.PromiseViolation, pd.UndeterminedPoint) as exc:
        stderr.write(f"critline: promise violated: {exc}\n")
        return 2
    except ValueError as exc:
        stderr.write(f"critline: error: {exc}\n")
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
