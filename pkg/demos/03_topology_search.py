"""
Genetic topology search
=======================

With component values fixed, search the 225 single-loop topologies for the
most ladder-like spectrum and compare the result with exhaustive enumeration.
"""
from circuitforge.circuit import Branch, BranchKind, all_kind_assignments, validate_topology
from circuitforge.constants import FF, GHZ, NH
from circuitforge.ga import GAConfig, build_from_kinds, evaluate_circuit, optimize_topology
from circuitforge.objectives import LADDER, CostSpec

fixed = {
    BranchKind.CAPACITOR: Branch.capacitor(101 * FF),
    BranchKind.INDUCTOR: Branch.inductor(18.25 * NH),
    BranchKind.JUNCTION: Branch.junction(54.2 * FF, 9.127 * GHZ),
}
spec = CostSpec(LADDER)


def cost(circuit):
    return evaluate_circuit(circuit, spec)


# every valid topology, scored once
table = {
    kinds: cost(build_from_kinds(kinds, fixed))
    for kinds in all_kind_assignments()
    if validate_topology(kinds).valid
}
ranked = sorted(table, key=table.get)
print(f"{len(table)} topologies; best three by exhaustive search:")
for kinds in ranked[:3]:
    print("  ", [k.value for k in kinds], f"cost {table[kinds]:.5f}")

# the GA sees the same costs through its cache
result = optimize_topology(cost, fixed, GAConfig(seed=7, epochs=50), cache=dict(table))
print("GA best:", [k.value for k in result.best_genome], f"cost {result.best_cost:.5f}")
print("best cost per epoch:", [round(c, 5) for c in result.history[::10]])
