"""
Flux sweep and sweet spot
=========================

Sweep the external flux through circuit IV, locate the flux where the lowest
transition nearly closes, and save the sweep as CSV.
"""
import math

import numpy as np

from circuitforge import library as lib
from circuitforge.analysis import flux_sweep, write_sweep_csv

GHZ = 1e9

sweep = flux_sweep(lib.circuit_IV(), flux_range=(0, 2 * math.pi), steps=81, truncations=(10, 60))
w10 = sweep.transition(1, 0)
w21 = sweep.transition(2, 1)

best = int(np.argmin(w10))
print(f"w10 is smallest at phi_x = {sweep.grid[best]:.4f} rad ({sweep.grid[best] / math.pi:.3f} pi)")
print(f"there w10 = {w10[best] / GHZ:.3e} GHz and w21 = {w21[best] / GHZ:.3f} GHz")
print(f"w10 / w21 = {w10[best] / w21[best]:.2e}")

write_sweep_csv("circuit_IV_sweep.csv", sweep)
print("sweep written to circuit_IV_sweep.csv")
