"""Driven evolution ``H + Omega cos(nu t) O`` in a truncated eigenbasis.

Energies, ``Omega`` and ``nu`` are cyclic frequencies in hertz, so the
Schrodinger equation reads ``d psi / dt = -2 pi i H(t) psi``. The natural time
unit ``t_eff = pi / (2 pi Omega |O_ab|)`` is the resonant half Rabi period of
the driven transition ``a <-> b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .circuit import Chain, Loop
from .quantization import QuantizedSystem, quantize
from .spectrum import DEFAULT_OPERATOR, eigensystem, matrix_elements

TOLERANCE = 1e-9
# elements below this fraction of the largest one count as symmetry-forbidden
SELECTION_RULE = 1e-10


class IntegrationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class DriveSpec:
    """Drive settings.

    ``omega`` defaults to one fiftieth of the driven transition (``w10 / 50``
    for a ``w10`` drive) and ``t_eff`` uses the operator element of that
    transition, so a lambda system with ``w10 = 0`` still has a Rabi scale. ``nu`` is a frequency in hertz or one of
    ``"w10"``, ``"w21"``, ``"w20"``. ``initial_state`` defaults to ``|1>`` for a
    ``w20`` drive and ``|0>`` otherwise. ``t_max`` is in units of ``t_eff``.
    """

    omega: float | None = None
    nu: float | str = "w10"
    operator_label: str = DEFAULT_OPERATOR
    initial_state: int | None = None
    t_max: float = 2.0
    levels: int = 8
    samples: int = 401

    def __post_init__(self):
        if self.omega is not None and self.omega < 0:
            raise ValueError("drive strength must be non-negative")
        if self.levels < 2:
            raise ValueError("at least two levels are needed")
        if self.initial_state is not None and not 0 <= self.initial_state < self.levels:
            raise ValueError("initial state must lie inside the truncated eigenbasis")
        if isinstance(self.nu, str) and self.nu not in ("w10", "w21", "w20"):
            raise ValueError(f"unknown drive frequency {self.nu!r}")
        if self.t_max <= 0 or self.samples < 2:
            raise ValueError("t_max must be positive and samples >= 2")


@dataclass
class DynamicsReport:
    times: np.ndarray  # seconds
    populations: np.ndarray  # (samples, levels)
    t_eff: float
    omega: float
    nu: float
    initial_state: int
    norm: np.ndarray

    @property
    def times_eff(self) -> np.ndarray:
        return self.times / self.t_eff


def projected_operators(system: QuantizedSystem, levels: int, label: str = DEFAULT_OPERATOR):
    """Eigenenergies and the operator matrix on the lowest ``levels`` eigenstates."""
    pairs = eigensystem(system, levels)
    return pairs[0], matrix_elements(system, pairs, label)


def evolve_state(
    energies: np.ndarray,
    op: np.ndarray,
    psi0: np.ndarray,
    times: np.ndarray,
    omega: float,
    nu: float,
    rtol: float = TOLERANCE,
    atol: float = TOLERANCE,
) -> np.ndarray:
    """Integrate the driven equation on the given time points (increasing or decreasing)."""
    E = 2 * np.pi * (np.asarray(energies) - energies[0])
    V = 2 * np.pi * omega * np.asarray(op)
    w = 2 * np.pi * nu

    def rhs(t, y):
        return -1j * (E * y + math.cos(w * t) * (V @ y))

    sol = solve_ivp(rhs, (times[0], times[-1]), np.asarray(psi0, dtype=complex), method="DOP853",
                    t_eval=times, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(f"integration stopped: {sol.message}")
    return sol.y.T


def evolve_driven(circuit: Loop | Chain | QuantizedSystem, drive: DriveSpec = DriveSpec(), **quantize_kw) -> DynamicsReport:
    """Populations of the lowest ``drive.levels`` eigenstates under a cosine drive."""
    system = circuit if isinstance(circuit, QuantizedSystem) else quantize(circuit, **quantize_kw)
    levels = min(drive.levels, system.dimension)
    energies, op = projected_operators(system, levels, drive.operator_label)
    w = energies - energies[0]
    # driven pair: the transition named by ``nu``, or 1 <-> 0 for a numeric frequency
    a, b = {"w10": (1, 0), "w21": (2, 1), "w20": (2, 0)}.get(drive.nu, (1, 0)) if isinstance(drive.nu, str) else (1, 0)
    nu = w[a] - w[b] if isinstance(drive.nu, str) else float(drive.nu)
    omega = drive.omega if drive.omega is not None else (w[a] - w[b]) / 50
    start = drive.initial_state
    if start is None:
        start = 1 if drive.nu == "w20" else 0
    element = abs(op[a, b])
    if omega > 0 and element > SELECTION_RULE * np.abs(op).max():
        t_eff = math.pi / (2 * math.pi * omega * element)
    else:
        # forbidden or undriven transition: fall back to one period of it
        t_eff = 1.0 / max(w[a] - w[b], 1.0)
    times = np.linspace(0.0, drive.t_max * t_eff, drive.samples)
    psi0 = np.zeros(levels, dtype=complex)
    psi0[start] = 1.0
    psi = evolve_state(energies, op, psi0, times, omega, nu)
    pops = np.abs(psi) ** 2
    return DynamicsReport(times, pops, t_eff, omega, nu, start, np.sqrt(pops.sum(axis=1)))


def dump_operator_matrix(
    circuit: Loop | Chain | QuantizedSystem, operator_label: str = DEFAULT_OPERATOR, k: int = 6, **quantize_kw
) -> np.ndarray:
    """``|<i|O|j>|`` on the lowest ``k`` eigenstates."""
    system = circuit if isinstance(circuit, QuantizedSystem) else quantize(circuit, **quantize_kw)
    _, op = projected_operators(system, min(k, system.dimension), operator_label)
    table = np.abs(op)
    return (table + table.T) / 2


def write_populations_csv(path, report: DynamicsReport) -> None:
    from .analysis import write_csv

    header = ("t", "t_over_t_eff", *[f"P{j}" for j in range(report.populations.shape[1])])
    rows = [(t, t / report.t_eff, *p) for t, p in zip(report.times, report.populations)]
    write_csv(path, header, rows)


def write_matrix_csv(path, table: np.ndarray) -> None:
    from .analysis import write_csv

    write_csv(path, [f"col{j}" for j in range(table.shape[1])], table.tolist())

