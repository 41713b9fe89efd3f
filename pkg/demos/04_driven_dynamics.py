"""
Rabi oscillation under a weak resonant drive
============================================

Drive circuit I at its lowest transition and follow the level populations
over two effective half periods.
"""
import numpy as np

from circuitforge import library as lib
from circuitforge.dynamics import DriveSpec, evolve_driven, write_populations_csv

report = evolve_driven(lib.circuit_I(), DriveSpec(nu="w10", levels=6, t_max=2.0, samples=201))

print(f"drive frequency {report.nu / 1e9:.4f} GHz, strength {report.omega / 1e9:.4f} GHz")
print(f"t_eff = {report.t_eff:.3e} s")
for t, p in zip(report.times_eff[::25], report.populations[::25]):
    print(f"t/t_eff = {t:4.2f}  P0 = {p[0]:.3f}  P1 = {p[1]:.3f}  P2 = {p[2]:.4f}")

peak = int(np.argmax(report.populations[:, 1]))
print(f"largest P1 = {report.populations[peak, 1]:.4f} at t/t_eff = {report.times_eff[peak]:.3f}")
print(f"worst norm error {np.abs(report.norm - 1).max():.1e}")
write_populations_csv("circuit_I_rabi.csv", report)
