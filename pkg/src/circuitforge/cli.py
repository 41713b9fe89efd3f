"""Command-line front end.

Every command writes ``<command>.json`` (SI units, with a complete ``config``
block) and ``<command>.txt`` (human summary, GHz) into ``--out``. With
``--plots`` it also writes gnuplot-ready ``.dat`` files. Exit codes: 0 on
success, 1 on a domain error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    ALL_PARAMETERS,
    SINGLE_CAPACITOR,
    PerturbationSpec,
    flux_sweep,
    robustness_study,
    write_robustness_csv,
    write_sweep_csv,
)
from .circuit import Branch, BranchKind, CircuitError, circuit_to_dict, load_circuit, validate_topology
from .constants import FF, GHZ, NH
from .dynamics import DriveSpec, evolve_driven, write_populations_csv
from .ga import GAConfig, evaluate_circuit, optimize_parameters, optimize_topology, run_manifest
from .network import DegenerateNetwork
from .objectives import LADDER, LAMBDA, CostSpec
from .quantization import DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF, convergence_study, quantize
from .spectrum import anharmonicity, spectrum

# component values used by topology search when no circuit is given
DEFAULT_FIXED = {
    BranchKind.CAPACITOR: Branch.capacitor(101 * FF),
    BranchKind.INDUCTOR: Branch.inductor(18.25 * NH),
    BranchKind.JUNCTION: Branch.junction(54.2 * FF, 9.127 * GHZ),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, circuit_required: bool = True) -> None:
    p.add_argument("--circuit", required=circuit_required, help="circuit JSON file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--n-max", type=int, default=DEFAULT_CHARGE_CUTOFF, help="charge-basis cutoff")
    p.add_argument("--m-max", type=int, default=DEFAULT_FOCK_CUTOFF, help="Fock-basis cutoff")
    p.add_argument("--loop-levels", type=int, default=None, help="per-loop eigenstates kept for chains")
    p.add_argument("--flux", type=float, default=None, help="external flux (rad), overrides the file")
    p.add_argument("--plots", action="store_true", help="also write gnuplot data files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="circuitforge", description="Superconducting loop circuits: spectra, design search, dynamics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("quantize", help="reduce and assemble a circuit")
    _common(p)

    p = sub.add_parser("spectrum", help="lowest levels, transitions and matrix elements")
    _common(p)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--operator", default="charge-edge-left")

    p = sub.add_parser("sweep", help="spectrum versus external flux")
    _common(p)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--flux-min", type=float, default=-2 * math.pi)
    p.add_argument("--flux-max", type=float, default=2 * math.pi)
    p.add_argument("--flux-steps", type=int, default=101)
    p.add_argument("--operator", default="charge-edge-left")

    p = sub.add_parser("optimize", help="genetic topology or parameter search")
    _common(p, circuit_required=False)
    p.add_argument("--target", choices=(LADDER, LAMBDA), required=True)
    p.add_argument("--stage", choices=("topology", "parameters"), default="topology")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--population", type=int, default=16)
    p.add_argument("--mutation-rate", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=1.0, help="detuning floor in GHz")
    p.add_argument("--omega-max", type=float, default=16.0, help="spectral cut-off in GHz")

    p = sub.add_parser("dynamics", help="driven evolution of eigenstate populations")
    _common(p)
    p.add_argument("--omega", type=float, default=None, help="drive strength in GHz")
    p.add_argument("--nu", default="w10", help="w10, w21, w20 or a frequency in GHz")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--t-max", type=float, default=2.0, help="duration in units of t_eff")
    p.add_argument("--samples", type=int, default=401)
    p.add_argument("--operator", default="charge-edge-left")

    p = sub.add_parser("robustness", help="Monte Carlo spread of transition ratios")
    _common(p)
    p.add_argument("--target", choices=(LADDER, LAMBDA), required=True)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--mode", choices=(SINGLE_CAPACITOR, ALL_PARAMETERS), default=ALL_PARAMETERS)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convergence", help="relative level change versus Fock cutoff")
    _common(p)
    p.add_argument("--m-min", type=int, default=2)
    p.add_argument("--m-stop", type=int, default=24)
    p.add_argument("--tolerance", type=float, default=1e-3)
    return parser


# --- helpers ------------------------------------------------------------------


def _load(args):
    circuit = load_circuit(args.circuit)
    for k, loop in enumerate(circuit.loops):
        report = validate_topology(loop)
        if not report.valid:
            raise CircuitError("BadStructure", f"invalid topology: {report.reason}", f"loops[{k}]")
    if args.flux is not None:
        circuit = circuit.with_flux(args.flux)
    return circuit


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}
    if getattr(args, "circuit", None):
        with open(args.circuit, "rb") as fh:
            cfg["circuit_data"] = json.loads(fh.read())
    return cfg


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _write(out: Path, name: str, result: dict, summary: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.json").write_text(json.dumps(_clean(result), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / f"{name}.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)


def _ghz(x: float) -> str:
    return f"{x / GHZ:.4f} GHz"


def emit_plot_data(path: Path, header: list[str], rows) -> None:
    """Whitespace-separated columns with a commented header, readable by gnuplot."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


# --- commands -------------------------------------------------------------------


def cmd_quantize(args) -> int:
    circuit = _load(args)
    system = quantize(circuit, args.n_max, args.m_max, loop_levels=args.loop_levels)
    loops = []
    for spec in system.specs:
        if spec is None:
            loops.append(None)
            continue
        loops.append(
            {
                "nodes": [list(n) for n in spec.nodes],
                "E_C": spec.E_C,
                "E_L": spec.E_L,
                "junctions": [{"EJ": t.EJ, "coefficients": list(t.coefficients), "closure": t.closure} for t in spec.josephson_terms],
            }
        )
    result = {
        "config": _config(args),
        "bases": [{"kind": b.kind, "cutoff": b.cutoff} for b in system.bases],
        "dims": list(system.dims),
        "dimension": system.dimension,
        "loops": loops,
    }
    lines = [f"dimension {system.dimension} = " + " x ".join(str(d) for d in system.dims)]
    lines += [f"node {i}: {b.kind} basis, cutoff {b.cutoff}" for i, b in enumerate(system.bases)]
    _write(Path(args.out), "quantize", result, "\n".join(lines))
    return 0


def cmd_spectrum(args) -> int:
    circuit = _load(args)
    system = quantize(circuit, args.n_max, args.m_max, loop_levels=args.loop_levels)
    report = spectrum(system, args.levels, labels=(args.operator,))
    w = report.eigenvalues - report.eigenvalues[0]
    elems = report.matrix_elements[args.operator]
    result = {
        "config": _config(args),
        "eigenvalues_hz": report.eigenvalues,
        "levels_hz": w,
        "matrix_elements_abs": np.abs(elems),
    }
    lines = [f"w{i}0 = {_ghz(w[i])}" for i in range(1, len(w))]
    lines += [f"w{i}{i - 1} = {_ghz(w[i] - w[i - 1])}" for i in range(2, len(w))]
    if len(w) >= 3:
        try:
            lines.append(f"A21,10 = {anharmonicity(report, (2, 1), (1, 0)):.4f}")
        except ArithmeticError:
            pass
    _write(Path(args.out), "spectrum", result, "\n".join(lines))
    return 0


def cmd_sweep(args) -> int:
    circuit = _load(args)
    res = flux_sweep(
        circuit, (args.flux_min, args.flux_max), args.flux_steps, max(args.levels, 4),
        (args.n_max, args.m_max), (args.operator,), args.loop_levels,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / "sweep.csv", res)
    if args.plots:
        rows = [(r[0], r[1], r[2], r[3], r[6], r[7], r[8]) for r in res.rows()]
        emit_plot_data(out / "sweep.dat", ["phi_x", "w10", "w21", "w32", "abs_N01", "abs_N12", "abs_N02"], rows)
    w10 = res.transition(1, 0)
    result = {"config": _config(args), "grid": res.grid, "rows": res.rows(), "failures": res.failures}
    summary = (
        f"{len(res.grid)} flux points, {len(res.failures)} failures; "
        f"w10 from {_ghz(np.nanmin(w10))} to {_ghz(np.nanmax(w10))}"
    )
    _write(out, "sweep", result, summary)
    return 0


def cmd_optimize(args) -> int:
    spec = CostSpec(target=args.target, gamma=args.gamma * GHZ, omega_max=args.omega_max * GHZ)
    config = GAConfig(population=args.population, mutation_rate=args.mutation_rate, epochs=args.epochs, seed=args.seed)

    def cost(circuit):
        return evaluate_circuit(circuit, spec, (args.n_max, args.m_max), loop_levels=args.loop_levels)

    if args.stage == "topology":
        fixed = dict(DEFAULT_FIXED)
        if args.circuit:
            # take one component of each kind from the given circuit as the fixed values
            for loop in _load(args).loops:
                for b in loop.branches:
                    if b.kind is not BranchKind.ABSENT:
                        fixed[b.kind] = b
        result = optimize_topology(cost, fixed, config, phi_x=args.flux or 0.0)
    else:
        if not args.circuit:
            raise UsageError("optimize --stage parameters needs --circuit")
        result = optimize_parameters(_load(args), cost, config)
    manifest = run_manifest(result, config, {"config_cli": _config(args), "target": args.target})
    out = Path(args.out)
    summary = f"best cost {result.best_cost:.6g} after {config.epochs} epochs (seed {config.seed})"
    if result.circuit is not None:
        summary += "\nbest circuit: " + json.dumps(circuit_to_dict(result.circuit))
    _write(out, "optimize", manifest, summary)
    if args.plots:
        emit_plot_data(out / "optimize_history.dat", ["epoch", "best_cost"], list(enumerate(result.history)))
    return 0


def cmd_dynamics(args) -> int:
    circuit = _load(args)
    nu = args.nu if args.nu in ("w10", "w21", "w20") else float(args.nu) * GHZ
    omega = args.omega * GHZ if args.omega is not None else None
    drive = DriveSpec(omega=omega, nu=nu, operator_label=args.operator, t_max=args.t_max, levels=args.levels, samples=args.samples)
    system = quantize(circuit, args.n_max, args.m_max, loop_levels=args.loop_levels)
    rep = evolve_driven(system, drive)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_populations_csv(out / "dynamics.csv", rep)
    if args.plots:
        header = ["t_over_t_eff"] + [f"P{j}" for j in range(rep.populations.shape[1])]
        emit_plot_data(out / "dynamics.dat", header, [(t, *p) for t, p in zip(rep.times_eff, rep.populations)])
    result = {
        "config": _config(args),
        "t_eff_s": rep.t_eff,
        "omega_hz": rep.omega,
        "nu_hz": rep.nu,
        "initial_state": rep.initial_state,
        "max_population": rep.populations.max(axis=0),
    }
    peak = ", ".join(f"P{j} {p:.4f}" for j, p in enumerate(rep.populations.max(axis=0)))
    summary = f"drive {_ghz(rep.nu)}, Omega {_ghz(rep.omega)}, t_eff {rep.t_eff:.4e} s\npeak populations: {peak}"
    _write(out, "dynamics", result, summary)
    return 0


def cmd_robustness(args) -> int:
    circuit = _load(args)
    pspec = PerturbationSpec(mode=args.mode, sigma=args.sigma, samples=args.samples)
    res = robustness_study(circuit, pspec, args.target, args.seed, (args.n_max, args.m_max), args.loop_levels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_robustness_csv(out / "robustness.csv", res)
    if args.plots:
        emit_plot_data(out / "robustness_samples.dat", ["sample", *res.names], [(i, *r) for i, r in zip(res.sample_index, res.samples)])
        emit_plot_data(out / "robustness_summary.dat", ["ratio_index", "nominal", "mean", "std"],
                       [(k, res.nominal[k], res.mean[k], res.std[k]) for k in range(len(res.names))])
    result = {
        "config": _config(args),
        "names": res.names,
        "nominal": res.nominal,
        "mean": res.mean,
        "std": res.std,
        "failed": res.failed,
    }
    lines = [f"{n}: nominal {res.nominal[k]:.4f}, mean {res.mean[k]:.4f}, sd {res.std[k]:.4f}" for k, n in enumerate(res.names)]
    lines.append(f"{len(res.samples)} samples evaluated, {res.failed} failed")
    _write(out, "robustness", result, "\n".join(lines))
    return 0


def cmd_convergence(args) -> int:
    circuit = _load(args)
    rep = convergence_study(circuit, range(args.m_min, args.m_stop + 1), 4, args.n_max, args.tolerance)
    result = {
        "config": _config(args),
        "m_values": list(rep.m_values),
        "errors": rep.errors,
        "converged_m": rep.converged_m,
    }
    out = Path(args.out)
    if args.plots:
        out.mkdir(parents=True, exist_ok=True)
        emit_plot_data(out / "convergence.dat", ["m", "eps0", "eps1", "eps2", "eps3"],
                       [(m, *e) for m, e in zip(rep.m_values, rep.errors)])
    summary = f"converged at m = {rep.converged_m}" if rep.converged_m is not None else "not converged in range"
    _write(out, "convergence", result, summary)
    return 0


COMMANDS = {
    "quantize": cmd_quantize,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "dynamics": cmd_dynamics,
    "robustness": cmd_robustness,
    "convergence": cmd_convergence,
}


def run(argv=None) -> int:
    """Parse ``argv`` and dispatch; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    threads = os.environ.get("CIRCUITFORGE_THREADS")
    if threads is not None and not threads.isdigit():
        print("usage error: CIRCUITFORGE_THREADS must be a positive integer", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot access {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1
    except CircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateNetwork, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())

