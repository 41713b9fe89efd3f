"""Ladder (three-level cascade) and lambda cost functions over spectrum reports."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import GHZ
from .spectrum import DEFAULT_OPERATOR, SpectrumReport

LADDER = "ladder"
LAMBDA = "lambda"


class InsufficientLevels(ValueError):
    pass


@dataclass(frozen=True)
class CostSpec:
    """Cost configuration.

    Frequency distances are divided by ``frequency_scale`` before squaring.
    With ``normalize_elements`` the element magnitudes are divided by the
    largest ``|<i|O|j>|`` among the lowest three levels, so a target of one is
    reachable independently of the charging-energy scale. ``clamp`` replaces the
    signed detuning terms of the ladder cost by ``max(., 0)``.
    """

    target: str = LADDER
    gamma: float = 1.0 * GHZ
    omega_max: float = 16.0 * GHZ
    operator_label: str = DEFAULT_OPERATOR
    frequency_scale: float = 1.0 * GHZ
    normalize_elements: bool = True
    clamp: bool = False

    def __post_init__(self):
        if self.target not in (LADDER, LAMBDA):
            raise ValueError(f"unknown target {self.target!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        if self.frequency_scale <= 0:
            raise ValueError("frequency_scale must be positive")


@dataclass(frozen=True)
class CostBreakdown:
    distances: tuple[float, ...]
    total: float


def _elements(report: SpectrumReport, spec: CostSpec) -> np.ndarray:
    if report.levels < 4:
        raise InsufficientLevels(f"need at least 4 levels, report has {report.levels}")
    table = np.abs(np.asarray(report.matrix_elements[spec.operator_label]))[:3, :3]
    if spec.normalize_elements:
        peak = float(table.max())
        if peak > 0:
            table = table / peak
    return table


def _total(d: list[float]) -> CostBreakdown:
    d = tuple(float(x) for x in d)
    return CostBreakdown(d, float(np.sum(np.square(d)) / len(d) ** 2))


def ladder_cost(report: SpectrumReport, spec: CostSpec = CostSpec()) -> CostBreakdown:
    """Seven distances for equal, Gamma-detuned cascade transitions; ``F = sum d^2 / 49``."""
    e = _elements(report, spec)
    w, s = report.omega, spec.frequency_scale
    g = spec.gamma
    d2 = abs(w(3, 2) - w(2, 1)) - g
    d3 = abs(w(3, 2) - w(1, 0)) - g
    if spec.clamp:
        d2, d3 = max(d2, 0.0), max(d3, 0.0)
    return _total(
        [
            abs(w(2, 1) - w(1, 0)) / s,
            d2 / s,
            d3 / s,
            abs(w(3, 0) - spec.omega_max) / s,
            abs(e[0, 1] - 1),
            abs(e[1, 2] - 1),
            e[0, 2],
        ]
    )


def lambda_cost(report: SpectrumReport, spec: CostSpec = CostSpec(target=LAMBDA)) -> CostBreakdown:
    """Six distances for a degenerate ground doublet with a shared excited state; ``F = sum d^2 / 36``."""
    e = _elements(report, spec)
    w, s = report.omega, spec.frequency_scale
    return _total(
        [
            abs(w(1, 0)) / s,
            abs(w(2, 0) - w(2, 1)) / s,
            abs(w(3, 0) - spec.omega_max) / s,
            e[0, 1],
            abs(e[0, 2] - 1),
            abs(e[1, 2] - 1),
        ]
    )


def cost(report: SpectrumReport, spec: CostSpec) -> CostBreakdown:
    return ladder_cost(report, spec) if spec.target == LADDER else lambda_cost(report, spec)
