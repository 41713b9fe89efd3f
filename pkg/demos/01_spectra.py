"""
Spectra of the reference circuits
=================================

Quantize the six reference designs, print their lowest transitions and the
charge matrix elements on the left edge of the loop.
"""
import math

import numpy as np

from circuitforge import library as lib
from circuitforge.quantization import quantize
from circuitforge.spectrum import anharmonicity, spectrum

GHZ = 1e9

# Ladder designs are evaluated at zero flux, lambda designs at half a flux quantum.
# Fock cutoffs are raised where the default of 12 is not yet converged.
designs = {
    "I": (lib.circuit_I(), dict(n_max=10, m_max=12)),
    "II": (lib.circuit_II(), dict(n_max=30, m_max=12)),
    "III": (lib.circuit_III(), dict(n_max=10, m_max=40)),
    "IV": (lib.circuit_IV(math.pi), dict(n_max=10, m_max=60)),
    "V": (lib.circuit_V(math.pi), dict(n_max=10, m_max=30)),
    "VI": (lib.circuit_VI(math.pi), dict(n_max=10, m_max=30, loop_levels=30)),
}

for name, (circuit, truncation) in designs.items():
    system = quantize(circuit, **truncation)
    report = spectrum(system, k=4)
    w = (report.eigenvalues - report.eigenvalues[0]) / GHZ
    print(f"circuit {name}: dimension {system.dimension}")
    print("  levels above ground (GHz):", np.round(w[1:], 4))
    try:
        print(f"  A21,10 = {anharmonicity(report, (2, 1), (1, 0)):+.4f}")
    except ZeroDivisionError:
        print("  A21,10 undefined (degenerate levels)")
    print("  |<i|N|j>|:\n", np.round(np.abs(report.matrix_elements["charge-edge-left"]), 4))
