"""Flux sweeps and Monte Carlo robustness of transition ratios."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Chain, Loop, PARAMETERS, as_chain
from .objectives import LADDER, LAMBDA
from .quantization import DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF, quantize
from .spectrum import DEFAULT_OPERATOR, DegenerateDenominator, SpectrumReport, spectrum, transition_ratio

SINGLE_CAPACITOR = "single-cap"
ALL_PARAMETERS = "all"
UNIFORM = "uniform"
NORMAL = "normal"

SWEEP_COLUMNS = ("phi_x", "w10", "w21", "w32", "w20", "w30", "abs_N01", "abs_N12", "abs_N02")


@dataclass
class SweepResult:
    """Spectra along a strictly increasing flux grid; failed points hold ``None``."""

    grid: np.ndarray
    reports: list[SpectrumReport | None]
    failures: dict[int, str] = field(default_factory=dict)
    label: str = DEFAULT_OPERATOR

    def transition(self, i: int, j: int) -> np.ndarray:
        return np.array([r.omega(i, j) if r is not None else np.nan for r in self.reports])

    def element(self, i: int, j: int, label: str | None = None) -> np.ndarray:
        label = label or self.label
        return np.array([abs(r.element(i, j, label)) if r is not None else np.nan for r in self.reports])

    def rows(self) -> list[tuple[float, ...]]:
        """One row per grid point in ``SWEEP_COLUMNS`` order (SI units)."""
        cols = [
            self.grid,
            self.transition(1, 0),
            self.transition(2, 1),
            self.transition(3, 2),
            self.transition(2, 0),
            self.transition(3, 0),
            self.element(0, 1),
            self.element(1, 2),
            self.element(0, 2),
        ]
        return [tuple(float(c[i]) for c in cols) for i in range(len(self.grid))]


def flux_sweep(
    circuit: Loop | Chain,
    flux_range: tuple[float, float] = (-2 * math.pi, 2 * math.pi),
    steps: int = 101,
    k: int = 4,
    truncations: tuple[int, int] = (DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF),
    labels: Sequence[str] = (DEFAULT_OPERATOR,),
    loop_levels: int | None = None,
) -> SweepResult:
    """Re-assemble and diagonalize at each external flux with fixed truncations."""
    if steps < 2:
        raise ValueError("a sweep needs at least two points")
    lo, hi = flux_range
    if not hi > lo:
        raise ValueError("flux range must be increasing")
    grid = np.linspace(lo, hi, steps)
    reports: list[SpectrumReport | None] = []
    failures = {}
    for i, phi in enumerate(grid):
        try:
            system = quantize(circuit, *truncations, phi_x=float(phi), loop_levels=loop_levels)
            r = spectrum(system, k, labels)
            r.vectors = None
            reports.append(r)
        except (ValueError, ArithmeticError, RuntimeError, KeyError) as exc:
            reports.append(None)
            failures[i] = f"{type(exc).__name__}: {exc}"
    return SweepResult(grid, reports, failures, labels[0] if labels else DEFAULT_OPERATOR)


# --- perturbations -----------------------------------------------------------


@dataclass(frozen=True)
class PerturbationSpec:
    mode: str = ALL_PARAMETERS
    sigma: float = 0.05
    distribution: str | None = None  # default: uniform for single-cap, normal for all
    samples: int = 100
    designated: int | None = None  # index into the parameter vector for single-cap mode

    def __post_init__(self):
        if self.mode not in (SINGLE_CAPACITOR, ALL_PARAMETERS):
            raise ValueError(f"unknown perturbation mode {self.mode!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.distribution not in (None, UNIFORM, NORMAL):
            raise ValueError(f"unknown distribution {self.distribution!r}")

    @property
    def law(self) -> str:
        if self.distribution is not None:
            return self.distribution
        return UNIFORM if self.mode == SINGLE_CAPACITOR else NORMAL


def parameter_names(circuit: Loop | Chain) -> list[str]:
    """Names aligned with ``parameter_vector()``, e.g. ``loops[0].branches[3].CJ`` or ``couplings[0]``."""
    chain = as_chain(circuit)
    names = [
        f"loops[{k}].branches[{l}].{p}"
        for k, loop in enumerate(chain.loops)
        for l, b in enumerate(loop.branches)
        for p in PARAMETERS[b.kind]
    ]
    return names + [f"couplings[{k}]" for k in range(len(chain.couplings))]


def designated_capacitor(circuit: Loop | Chain) -> int:
    """The first coupling capacitor of a chain, otherwise the largest capacitor branch.

    Circuits without capacitor branches fall back to the largest junction capacitance.
    """
    names = parameter_names(circuit)
    values = circuit.parameter_vector()
    for i, n in enumerate(names):
        if n.startswith("couplings"):
            return i
    caps = [i for i, n in enumerate(names) if n.endswith(".C")]
    caps = caps or [i for i, n in enumerate(names) if n.endswith(".CJ")]
    if not caps:
        raise ValueError("circuit has no capacitor to perturb")
    return max(caps, key=lambda i: values[i])


def _draw(rng: np.random.Generator, law: str, sigma: float, size=None):
    if law == UNIFORM:
        return rng.uniform(-sigma, sigma, size)
    return rng.normal(0.0, sigma, size)


def perturb_parameters(circuit: Loop | Chain, spec: PerturbationSpec, rng: np.random.Generator) -> Loop | Chain:
    """One random sample around the nominal values; results stay strictly positive."""
    nominal = np.asarray(circuit.parameter_vector(), dtype=float)
    if spec.sigma == 0:
        return circuit
    values = nominal.copy()
    if spec.mode == SINGLE_CAPACITOR:
        i = spec.designated if spec.designated is not None else designated_capacitor(circuit)
        values[i] = nominal[i] * (1 + _draw(rng, spec.law, spec.sigma))
    else:
        values = nominal * (1 + _draw(rng, spec.law, spec.sigma, len(nominal)))
    values = np.maximum(values, 1e-6 * nominal)
    return circuit.with_parameters(values)


# --- robustness ------------------------------------------------------------------


RATIOS = {
    LADDER: (((2, 1), (1, 0)), ((3, 2), (2, 1))),
    LAMBDA: (((2, 1), (2, 0)),),
}


def ratio_names(target: str) -> list[str]:
    return [f"R{a}{b},{c}{d}" for (a, b), (c, d) in RATIOS[target]]


@dataclass
class RobustnessResult:
    target: str
    names: list[str]
    samples: np.ndarray  # (accepted samples, ratios)
    sample_index: list[int]
    failed: int
    nominal: np.ndarray
    envelopes: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0) if len(self.samples) else np.full(len(self.names), np.nan)

    @property
    def std(self) -> np.ndarray:
        return self.samples.std(axis=0, ddof=1) if len(self.samples) > 1 else np.zeros(len(self.names))


def _ratios(circuit, target, truncations, loop_levels) -> np.ndarray:
    system = quantize(circuit, *truncations, loop_levels=loop_levels)
    report = spectrum(system, 4, labels=())
    return np.array([transition_ratio(report, jk, lm) for jk, lm in RATIOS[target]])


def robustness_study(
    circuit: Loop | Chain,
    spec: PerturbationSpec,
    target: str,
    seed: int = 0,
    truncations: tuple[int, int] = (DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF),
    loop_levels: int | None = None,
    sweep: dict | None = None,
) -> RobustnessResult:
    """Transition ratios over ``spec.samples`` perturbed copies of ``circuit``.

    All samples are drawn up front from one seeded stream, so the statistics do
    not depend on evaluation order. With ``sweep`` (keyword arguments of
    ``flux_sweep``) the per-sample flux sweeps are reduced to min/max envelopes
    of the lowest transitions.
    """
    if target not in RATIOS:
        raise ValueError(f"unknown target {target!r}")
    rng = np.random.default_rng(seed)
    circuits = [perturb_parameters(circuit, spec, rng) for _ in range(spec.samples)]
    nominal = _ratios(circuit, target, truncations, loop_levels)
    rows, index, failed = [], [], 0
    curves = {"w10": [], "w21": [], "w20": []}
    grid = None
    for i, c in enumerate(circuits):
        try:
            rows.append(_ratios(c, target, truncations, loop_levels))
            index.append(i)
        except (ValueError, ArithmeticError, RuntimeError, DegenerateDenominator):
            failed += 1
            continue
        if sweep is not None:
            s = flux_sweep(c, truncations=truncations, loop_levels=loop_levels, labels=(), **sweep)
            grid = s.grid
            curves["w10"].append(s.transition(1, 0))
            curves["w21"].append(s.transition(2, 1))
            curves["w20"].append(s.transition(2, 0))
    envelopes = {}
    if grid is not None:
        envelopes["phi_x"] = grid
        for name, data in curves.items():
            data = np.array(data)
            envelopes[f"{name}_min"] = np.nanmin(data, axis=0)
            envelopes[f"{name}_max"] = np.nanmax(data, axis=0)
    samples = np.array(rows) if rows else np.zeros((0, len(RATIOS[target])))
    return RobustnessResult(target, ratio_names(target), samples, index, failed, nominal, envelopes)


# --- CSV ------------------------------------------------------------------------------


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_sweep_csv(path, result: SweepResult) -> None:
    write_csv(path, SWEEP_COLUMNS, result.rows())


def write_robustness_csv(path, result: RobustnessResult) -> None:
    rows = [(i, *r) for i, r in zip(result.sample_index, result.samples)]
    write_csv(path, ("sample", *result.names), rows)
