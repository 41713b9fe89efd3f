"""Design and analysis of superconducting loop circuits.

Typical use::

    from circuitforge import library, quantize, spectrum

    system = quantize(library.circuit_I())
    report = spectrum(system, k=4)
    print(report.omega(1, 0) / 1e9, "GHz")
"""
from . import library
from .circuit import Branch, BranchKind, Chain, CircuitError, Loop, load_circuit, parse_circuit, serialize_circuit
from .network import DegenerateNetwork, reduce_loop
from .quantization import QuantizedSystem, assemble_chain_hamiltonian, assemble_hamiltonian, convergence_study, quantize
from .spectrum import SpectrumReport, anharmonicity, spectrum, transition_ratio

__all__ = [
    "Branch",
    "BranchKind",
    "Chain",
    "CircuitError",
    "DegenerateNetwork",
    "Loop",
    "QuantizedSystem",
    "SpectrumReport",
    "anharmonicity",
    "assemble_chain_hamiltonian",
    "assemble_hamiltonian",
    "convergence_study",
    "library",
    "load_circuit",
    "parse_circuit",
    "quantize",
    "reduce_loop",
    "serialize_circuit",
    "spectrum",
    "transition_ratio",
]
