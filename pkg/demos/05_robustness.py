"""
Robustness to fabrication spread
================================

Perturb every component of circuit III by a 5 % normal spread and look at
how the transition ratios move.
"""
from circuitforge import library as lib
from circuitforge.analysis import ALL_PARAMETERS, PerturbationSpec, robustness_study, write_robustness_csv
from circuitforge.objectives import LADDER

study = robustness_study(
    lib.circuit_III(), PerturbationSpec(ALL_PARAMETERS, sigma=0.05, samples=50), LADDER, seed=1, truncations=(10, 40)
)
for k, name in enumerate(study.names):
    print(f"{name}: nominal {study.nominal[k]:.4f}, mean {study.mean[k]:.4f}, sd {study.std[k]:.4f}")
print(f"{len(study.samples)} samples, {study.failed} failed")
write_robustness_csv("circuit_III_robustness.csv", study)
