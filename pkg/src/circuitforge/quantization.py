"""Basis selection, truncated node operators and Hamiltonian assembly.

Each active node is quantized either in the charge basis (Cooper-pair number
eigenstates, cosine terms become shift operators) or in a harmonic-oscillator
Fock basis. Operators of all nodes are combined with Kronecker products in
node order; loops of a chain are concatenated in loop order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .circuit import Chain, Loop, as_chain
from .constants import E_CHARGE, PLANCK
from .network import DegenerateNetwork, HamiltonianSpec, contract_wires, eliminate_passive_nodes, legendre_transform

DEFAULT_CHARGE_CUTOFF = 10
DEFAULT_FOCK_CUTOFF = 12
DEFAULT_MAX_DIMENSION = 200_000


class MissingInductance(ValueError):
    """A Fock basis was requested for a node without inductive energy."""


class DimensionOverflow(ValueError):
    pass


@dataclass(frozen=True)
class Basis:
    """``Basis("charge", n_max)`` spans N = -n_max..n_max; ``Basis("fock", m_max)`` spans 0..m_max."""

    kind: str
    cutoff: int

    def __post_init__(self):
        if self.kind not in ("charge", "fock"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")

    @property
    def dimension(self) -> int:
        return 2 * self.cutoff + 1 if self.kind == "charge" else self.cutoff + 1


def charge(n_max: int = DEFAULT_CHARGE_CUTOFF) -> Basis:
    return Basis("charge", n_max)


def fock(m_max: int = DEFAULT_FOCK_CUTOFF) -> Basis:
    return Basis("fock", m_max)


def quartic_coefficient(spec: HamiltonianSpec, node: int) -> float:
    """Fourth derivative of the quartic potential expansion along one node, at phi = 0.

    Each junction contributes ``-EJ c^4 / 24`` times ``4!``; the test only
    needs to know whether any junction couples to the node, which this makes
    explicit through coefficient inspection.
    """
    return -sum(t.EJ * t.coefficients[node] ** 4 for t in spec.josephson_terms)


def select_basis(spec: HamiltonianSpec, node: int) -> str:
    """``"fock"`` unless a junction acts on the node and the node has no inductance."""
    if quartic_coefficient(spec, node) == 0:
        return "fock"
    if spec.node_has_inductance[node]:
        return "fock"
    return "charge"


def choose_bases(
    spec: HamiltonianSpec, n_max: int = DEFAULT_CHARGE_CUTOFF, m_max: int = DEFAULT_FOCK_CUTOFF
) -> tuple[Basis, ...]:
    return tuple(charge(n_max) if select_basis(spec, i) == "charge" else fock(m_max) for i in range(spec.size))


@dataclass(frozen=True)
class NodeOperators:
    """Single-node operators in the truncated basis.

    ``N2`` and ``phi2`` are the squares projected from a larger space, so the
    diagonal of the harmonic part is exact at the truncation edge.
    """

    basis: Basis
    N: np.ndarray
    N2: np.ndarray
    exp_iphi: np.ndarray | None = None
    phi: np.ndarray | None = None
    phi2: np.ndarray | None = None
    n_zpf: float | None = None
    phi_zpf: float | None = None
    _phi_eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def exp_i(self, c: int) -> np.ndarray:
        """``exp(i c phi)``: a shift in the charge basis, a matrix function in the Fock basis."""
        if self.basis.kind == "charge":
            shift = self.exp_iphi if c > 0 else self.exp_iphi.T
            return np.linalg.matrix_power(shift, abs(c))
        w, v = self._phi_eig
        return (v * np.exp(1j * c * w)) @ v.conj().T

    def cos_sin(self, c: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Hermitian ``cos(c phi)`` and ``sin(c phi)``."""
        if self.basis.kind == "charge":
            e = self.exp_i(c)
            return (e + e.conj().T) / 2, (e - e.conj().T) / 2j
        w, v = self._phi_eig
        return (v * np.cos(c * w)) @ v.T, (v * np.sin(c * w)) @ v.T


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


def build_node_operators(basis: Basis, E_C: float, E_L: float = 0.0) -> NodeOperators:
    """Operators for one node with diagonal charging energy ``E_C`` and inductive energy ``E_L``."""
    if basis.kind == "charge":
        n = np.arange(-basis.cutoff, basis.cutoff + 1, dtype=float)
        N = np.diag(n)
        shift = np.eye(basis.dimension, k=-1)  # |N+1><N|
        return NodeOperators(basis, N, N @ N, exp_iphi=shift)
    if not E_L > 0:
        raise MissingInductance("a Fock basis needs a positive inductive energy on the node")
    n_zpf = (E_L / (32 * E_C)) ** 0.25
    phi_zpf = (2 * E_C / E_L) ** 0.25
    dim = basis.dimension
    big = _annihilation(dim + 2)
    Nbig = n_zpf * 1j * (big.T - big)
    Pbig = phi_zpf * (big.T + big)
    N = Nbig[:dim, :dim]
    phi = Pbig[:dim, :dim]
    N2 = (Nbig @ Nbig)[:dim, :dim].real.astype(complex)
    phi2 = (Pbig @ Pbig)[:dim, :dim]
    w, v = np.linalg.eigh(phi)
    return NodeOperators(basis, N, N2, phi=phi, phi2=phi2, n_zpf=n_zpf, phi_zpf=phi_zpf, _phi_eig=(w, v))


def _lift(op, i: int, dims: Sequence[int]) -> sp.csr_matrix:
    """Embed a single-factor operator at position ``i`` of the tensor product."""
    left = int(np.prod(dims[:i])) if i else 1
    right = int(np.prod(dims[i + 1 :])) if i + 1 < len(dims) else 1
    out = sp.csr_matrix(op)
    if left > 1:
        out = sp.kron(sp.identity(left, format="csr"), out, format="csr")
    if right > 1:
        out = sp.kron(out, sp.identity(right, format="csr"), format="csr")
    return out


def _kron_all(factors: Sequence) -> sp.csr_matrix:
    out = sp.csr_matrix(factors[0])
    for f in factors[1:]:
        out = sp.kron(out, sp.csr_matrix(f), format="csr")
    return out


@dataclass
class QuantizedSystem:
    """Assembled Hamiltonian (hertz) plus lifted node operators.

    ``node_loop[i]`` is the loop of the chain that node ``i`` belongs to and
    ``node_labels[i]`` its (merged) node label inside that loop.
    """

    H: sp.csr_matrix
    bases: tuple[Basis, ...]
    dims: tuple[int, ...]
    node_loop: tuple[int, ...]
    node_labels: tuple[tuple[int, ...], ...]
    charge_ops: tuple[sp.csr_matrix, ...]
    phase_ops: tuple[sp.csr_matrix | None, ...]
    specs: tuple[HamiltonianSpec | None, ...] = ()

    @property
    def dimension(self) -> int:
        return self.H.shape[0]

    def dense(self) -> np.ndarray:
        return self.H.toarray()


def _check_dimension(dims: Sequence[int], max_dim: int) -> None:
    total = int(np.prod(dims)) if dims else 1
    if total > max_dim:
        raise DimensionOverflow(f"Hilbert-space dimension {total} exceeds the cap {max_dim}")


def _loop_terms(spec: HamiltonianSpec, bases: Sequence[Basis], phi_x: float, dims, offset: int):
    """Hamiltonian pieces of one loop placed at factor positions ``offset..``."""
    ops = [build_node_operators(b, spec.E_C[i, i], spec.E_L[i, i]) for i, b in enumerate(bases)]
    dim = int(np.prod(dims))
    H = sp.csr_matrix((dim, dim), dtype=complex)
    n = spec.size
    N = [_lift(o.N, offset + i, dims) for i, o in enumerate(ops)]
    phi = [_lift(o.phi, offset + i, dims) if o.phi is not None else None for i, o in enumerate(ops)]
    for i in range(n):
        H = H + 4 * spec.E_C[i, i] * _lift(ops[i].N2, offset + i, dims)
        for j in range(i + 1, n):
            if spec.E_C[i, j] != 0:
                H = H + 8 * spec.E_C[i, j] * (N[i] @ N[j])
    for i in range(n):
        if spec.E_L[i, i] == 0:
            continue
        if ops[i].phi2 is None:
            raise MissingInductance(f"node {spec.nodes[i]} carries inductive energy but is in the charge basis")
        H = H + 0.5 * spec.E_L[i, i] * _lift(ops[i].phi2, offset + i, dims)
        for j in range(i + 1, n):
            if spec.E_L[i, j] != 0:
                if phi[j] is None:
                    raise MissingInductance(f"node {spec.nodes[j]} carries inductive energy but is in the charge basis")
                H = H + spec.E_L[i, j] * (phi[i] @ phi[j])
    for term in spec.josephson_terms:
        factors = [np.eye(d) for d in dims]
        for i, c in enumerate(term.coefficients):
            if c:
                factors[offset + i] = ops[i].exp_i(c)
        E = np.exp(-1j * term.offset(phi_x)) * _kron_all(factors)
        H = H - term.EJ * (E + E.conj().T) / 2
    return H, N, phi


def assemble_hamiltonian(
    spec: HamiltonianSpec,
    bases: Sequence[Basis] | None = None,
    phi_x: float | None = None,
    max_dim: int = DEFAULT_MAX_DIMENSION,
) -> QuantizedSystem:
    """Hermitian Hamiltonian of one reduced loop.

    Junction cosines are built as ``(E + E^dag)/2`` with ``E`` the product of
    per-node ``exp(i c phi)`` factors and the flux phase.
    """
    bases = tuple(bases) if bases is not None else choose_bases(spec)
    if len(bases) != spec.size:
        raise ValueError("one basis per node is required")
    phi_x = spec.phi_x if phi_x is None else phi_x
    dims = tuple(b.dimension for b in bases)
    _check_dimension(dims, max_dim)
    H, N, phi = _loop_terms(spec, bases, phi_x, dims, 0)
    H = ((H + H.conj().T) / 2).tocsr()
    return QuantizedSystem(H, bases, dims, (0,) * spec.size, spec.nodes, tuple(N), tuple(phi), (spec,))


def reduce_chain(chain: Chain) -> list[HamiltonianSpec | None]:
    """Per-loop Hamiltonian descriptions; ``None`` for loops left without any degree of freedom.

    A single loop without degrees of freedom is an error.
    """
    specs = []
    for loop in chain.loops:
        net = eliminate_passive_nodes(contract_wires(loop))
        specs.append(legendre_transform(net) if net.size else None)
    if all(s is None for s in specs):
        raise DegenerateNetwork("circuit has no active degrees of freedom")
    return specs


def coupling_energy(capacitance: float) -> float:
    """``E_Cc = e^2 / C_c`` in hertz."""
    return E_CHARGE**2 / capacitance / PLANCK


def _lowest_eigenpairs(H: sp.csr_matrix, k: int) -> tuple[np.ndarray, np.ndarray]:
    from .spectrum import lowest_eigenpairs

    return lowest_eigenpairs(H, k)


def assemble_chain_hamiltonian(
    chain: Chain | Loop,
    bases: Sequence[Sequence[Basis]] | None = None,
    truncations: tuple[int, int] | None = None,
    phi_x: float | None = None,
    coupling_nodes: Sequence[tuple[int, int]] | None = None,
    max_dim: int = DEFAULT_MAX_DIMENSION,
    specs: Sequence[HamiltonianSpec | None] | None = None,
    loop_levels: int | None = None,
) -> QuantizedSystem:
    """Sum of loop Hamiltonians plus ``4 E_Cc N_k N_k+1`` between neighbours.

    Loop ``k`` couples through its rightmost active node and loop ``k+1``
    through its leftmost one, unless ``coupling_nodes[k] = (right_of_k,
    left_of_k+1)`` overrides the node indices. ``truncations = (n_max, m_max)``
    sets default cutoffs; ``phi_x`` overrides every loop's flux.

    With ``loop_levels`` set, every loop is first diagonalized on its own and
    only its lowest ``loop_levels`` eigenstates enter the tensor product; node
    operators are expressed in that eigenbasis.
    """
    chain = as_chain(chain)
    specs = list(specs) if specs is not None else reduce_chain(chain)
    n_max, m_max = truncations or (DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF)
    if bases is None:
        bases = [choose_bases(s, n_max, m_max) if s is not None else () for s in specs]
    bases = [tuple(b) for b in bases]
    live = [k for k, s in enumerate(specs) if s is not None]

    # per-loop blocks: (H, N ops, phi ops) on the loop's own space
    blocks = []
    for k in live:
        spec, bb = specs[k], bases[k]
        ldims = tuple(b.dimension for b in bb)
        _check_dimension(ldims, max_dim)
        flux = chain.loops[k].phi_x if phi_x is None else phi_x
        Hk, N, phi = _loop_terms(spec, bb, flux, ldims, 0)
        Hk = ((Hk + Hk.conj().T) / 2).tocsr()
        if loop_levels is not None and loop_levels < Hk.shape[0]:
            w, v = _lowest_eigenpairs(Hk, loop_levels)
            vh = v.conj().T
            Hk = sp.csr_matrix(np.diag(w).astype(complex))
            N = [sp.csr_matrix(vh @ (n @ v)) for n in N]
            phi = [sp.csr_matrix(vh @ (p @ v)) if p is not None else None for p in phi]
        blocks.append((Hk, N, phi))

    dims = tuple(b[0].shape[0] for b in blocks)
    _check_dimension(dims, max_dim)
    total = int(np.prod(dims))
    H = sp.csr_matrix((total, total), dtype=complex)
    N_all, phi_all, loop_of, labels = [], [], [], []
    for pos, (k, (Hk, N, phi)) in enumerate(zip(live, blocks)):
        H = H + _lift(Hk, pos, dims)
        N_all += [_lift(n, pos, dims) for n in N]
        phi_all += [_lift(p, pos, dims) if p is not None else None for p in phi]
        loop_of += [k] * specs[k].size
        labels += list(specs[k].nodes)
    for k, cc in enumerate(chain.couplings):
        a, b = specs[k], specs[k + 1]
        if a is None or b is None:
            continue  # a loop without degrees of freedom has nothing to couple to
        if coupling_nodes is not None:
            ia, ib = coupling_nodes[k]
        else:
            ia, ib = a.size - 1, 0
        ga = loop_of.index(k) + ia
        gb = loop_of.index(k + 1) + ib
        H = H + 4 * coupling_energy(cc) * (N_all[ga] @ N_all[gb])
    H = ((H + H.conj().T) / 2).tocsr()
    return QuantizedSystem(
        H, tuple(b for bb in bases for b in bb), dims, tuple(loop_of), tuple(labels), tuple(N_all), tuple(phi_all), tuple(specs)
    )


def quantize(
    circuit: Loop | Chain,
    n_max: int = DEFAULT_CHARGE_CUTOFF,
    m_max: int = DEFAULT_FOCK_CUTOFF,
    phi_x: float | None = None,
    max_dim: int = DEFAULT_MAX_DIMENSION,
    loop_levels: int | None = None,
) -> QuantizedSystem:
    """Reduce and assemble any loop or chain with uniform cutoffs."""
    return assemble_chain_hamiltonian(
        circuit, truncations=(n_max, m_max), phi_x=phi_x, max_dim=max_dim, loop_levels=loop_levels
    )


@dataclass
class ConvergenceReport:
    """Relative level changes ``|e_n(m) - e_n(m+1)| / |e_n(m+1)|`` for each cutoff ``m``."""

    m_values: tuple[int, ...]
    energies: np.ndarray  # (len(m_values) + 1, levels), hertz
    errors: np.ndarray  # (len(m_values), levels)
    tolerance: float
    converged_m: int | None

    def error(self, m: int) -> np.ndarray:
        return self.errors[self.m_values.index(m)]


def convergence_study(
    circuit: Loop | Chain,
    m_range: Sequence[int] = range(2, 25),
    levels: int = 4,
    n_max: int = DEFAULT_CHARGE_CUTOFF,
    tolerance: float = 1e-3,
    phi_x: float | None = None,
) -> ConvergenceReport:
    """Track the lowest ``levels`` eigenvalues as the Fock cutoff grows.

    Charge-basis nodes keep ``n_max``. Non-convergence is reported through
    ``converged_m = None`` rather than raised.
    """
    from .spectrum import lowest_eigenpairs

    m_values = tuple(int(m) for m in m_range)
    grid = m_values + (m_values[-1] + 1,)
    energies = []
    for m in grid:
        system = quantize(circuit, n_max, m, phi_x=phi_x)
        k = min(levels, system.dimension)
        w, _ = lowest_eigenpairs(system.H, k)
        energies.append(np.pad(w, (0, levels - k), constant_values=np.nan))
    energies = np.array(energies)
    # consecutive cutoffs in m_values need not be adjacent integers; compare with m + 1
    nxt = {m: i for i, m in enumerate(grid)}
    errors = []
    for m in m_values:
        a = energies[nxt[m]]
        b = energies[nxt[m + 1]] if m + 1 in nxt else _energies_at(circuit, n_max, m + 1, levels, phi_x)
        with np.errstate(divide="ignore", invalid="ignore"):
            errors.append(np.abs(a - b) / np.abs(b))
    errors = np.array(errors)
    converged = next((m for m, e in zip(m_values, errors) if np.nanmax(e) < tolerance), None)
    return ConvergenceReport(m_values, energies, errors, tolerance, converged)


def _energies_at(circuit, n_max: int, m: int, levels: int, phi_x) -> np.ndarray:
    from .spectrum import lowest_eigenpairs

    system = quantize(circuit, n_max, m, phi_x=phi_x)
    k = min(levels, system.dimension)
    w, _ = lowest_eigenpairs(system.H, k)
    return np.pad(w, (0, levels - k), constant_values=np.nan)
