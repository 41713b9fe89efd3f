"""Published reference circuits (ladder I-III, lambda IV-VI) and convergence test loops.

Component values in the tables are given in pF, nH and GHz; here they are
converted to SI, with Josephson energies as ``E_J / h`` in hertz.
"""
from __future__ import annotations

import math

from .circuit import ABSENT, Branch, Chain, Loop
from .constants import FF, GHZ, NH, PF


def _C(pf: float) -> Branch:
    return Branch.capacitor(pf * PF)


def _L(nh: float) -> Branch:
    return Branch.inductor(nh * NH)


def _JJ(cj_pf: float, ej_ghz: float) -> Branch:
    return Branch.junction(cj_pf * PF, ej_ghz * GHZ)


_ = ABSENT


def circuit_I(phi_x: float = 0.0) -> Loop:
    return Loop((_JJ(0.00192, 1.0), _, _, _JJ(0.0542, 9.127)), phi_x)


def circuit_II(phi_x: float = 0.0) -> Loop:
    return Loop((_JJ(1.50, 88.2), _JJ(3.403, 100.0), _, _C(0.00015)), phi_x)


def circuit_III(phi_x: float = 0.0) -> Chain:
    box1 = Loop((_C(0.101), _JJ(1.59, 1.0), _L(18.25), _L(150.0)), phi_x)
    box2 = Loop((_, _, _JJ(0.52, 59.45), _), phi_x)
    return Chain((box1, box2), (0.803 * PF,))


def circuit_IV(phi_x: float = 0.0) -> Loop:
    return Loop((_L(150.0), _, _, _JJ(0.028, 64.21)), phi_x)


def circuit_V(phi_x: float = 0.0) -> Loop:
    return Loop((_JJ(0.015, 100.0), _L(19.84), _, _C(0.045)), phi_x)


def circuit_VI(phi_x: float = 0.0) -> Chain:
    box1 = Loop((_JJ(0.0021, 100.0), _L(0.24), _, _C(0.00015)), phi_x)
    box2 = Loop((_JJ(0.356, 34.28), _L(113.0), _, _C(0.00015)), phi_x)
    return Chain((box1, box2), (0.173 * PF,))


LADDER = {"I": circuit_I, "II": circuit_II, "III": circuit_III}
LAMBDA = {"IV": circuit_IV, "V": circuit_V, "VI": circuit_VI}
REFERENCE = {**LADDER, **LAMBDA}

# (w10, w21, w32, w30) for the ladder designs, (w10, w21, w20, w30) for lambda, in GHz
REFERENCE_TRANSITIONS = {
    "I": (4.90, 4.47, 4.06, 13.43),
    "II": (3.53, 5.22, 7.04, 15.8),
    "III": (2.09, 2.44, 0.61, 5.15),
    "IV": (0.0, 18.27, 18.27, 18.27),
    "V": (0.0, 5.07, 5.07, 5.07),
    "VI": (0.0, 13.3, 13.3, 15.9),
}


def convergence_loops() -> dict[str, Loop]:
    """The four loops of the Hilbert-space convergence study.

    C = C_J = 10 fF and L = 645 nH. The junction energy is ``E_J / hbar = 1e10``
    rad/s, that is ``E_J / h = 1e10 / 2 pi`` Hz.
    """
    c = Branch.capacitor(10 * FF)
    l = Branch.inductor(645 * NH)
    j = Branch.junction(10 * FF, 1e10 / (2 * math.pi))
    return {
        "a": Loop((c, _, _, l)),
        "b": Loop((c, _, _, j)),
        "c": Loop((j, j, j, _)),
        "d": Loop((c, l, j, _)),
    }


def series_lc_loop(L1: float = 10 * NH, L2: float = 20 * NH, C1: float = 30 * FF, C2: float = 60 * FF) -> Loop:
    """Two series inductors and two series capacitors: one effective LC mode."""
    return Loop((Branch.inductor(L1), Branch.inductor(L2), Branch.capacitor(C1), Branch.capacitor(C2)))
