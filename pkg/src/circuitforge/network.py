"""Node-flux Lagrangian of a loop, passive-node elimination, Legendre transform.

Pipeline for one loop::

    build_matrices -> contract_wires -> eliminate_passive_nodes -> legendre_transform

Absent branches are wires: ``contract_wires`` merges the nodes they join
(a node wired to ground is grounded). Matrices stay in SI units until the
Legendre transform, which returns energies in hertz.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import BRANCH_NODES, BranchKind, Loop
from .constants import E_CHARGE, PLANCK, REDUCED_FLUX_QUANTUM

C_ZERO = 1e-18  # farads; far below the smallest allowed component
REL_ZERO = 1e-12


class DegenerateNetwork(ValueError):
    """The reduced network has no well-defined Hamiltonian."""


@dataclass(frozen=True)
class JosephsonTerm:
    """``-EJ cos(coefficients . phi - phi_x * closure)``."""

    EJ: float
    coefficients: tuple[int, ...]
    closure: bool = False
    branch: int | None = None

    def offset(self, phi_x: float) -> float:
        return phi_x if self.closure else 0.0


@dataclass(frozen=True)
class EliminationMap:
    """``eliminated = weights . remaining`` for a coordinate or a velocity."""

    node: tuple[int, ...]
    kind: str  # "coordinate" or "velocity"
    weights: tuple[float, ...]
    remaining: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ReducedNetwork:
    """Quadratic Lagrangian on the active nodes.

    Node labels are tuples of original node indices: wire contraction can
    merge several loop nodes into one.
    """

    active_nodes: tuple[tuple[int, ...], ...]
    C_matrix: np.ndarray
    Linv_matrix: np.ndarray
    josephson_terms: tuple[JosephsonTerm, ...]
    phi_x: float = 0.0
    elimination_maps: tuple[EliminationMap, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.active_nodes)

    def junction_nodes(self) -> set[int]:
        return {i for t in self.josephson_terms for i, c in enumerate(t.coefficients) if c}


@dataclass(frozen=True)
class HamiltonianSpec:
    """``H = 4 N.E_C.N + phi.E_L.phi / 2 - sum EJ cos(...)``, energies in hertz."""

    nodes: tuple[tuple[int, ...], ...]
    E_C: np.ndarray
    E_L: np.ndarray
    josephson_terms: tuple[JosephsonTerm, ...]
    phi_x: float = 0.0

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def node_has_inductance(self) -> tuple[bool, ...]:
        scale = float(np.max(np.abs(self.E_L))) if self.E_L.size else 0.0
        return tuple(bool(self.E_L[i, i] > REL_ZERO * scale and self.E_L[i, i] > 0) for i in range(self.size))

    def with_flux(self, phi_x: float) -> HamiltonianSpec:
        return replace(self, phi_x=float(phi_x))


def _branch_sums(loop: Loop) -> tuple[np.ndarray, np.ndarray]:
    csum = np.zeros(4)
    lsum = np.zeros(4)
    for l, b in enumerate(loop.branches):
        if b.kind is BranchKind.CAPACITOR:
            csum[l] = b.C
        elif b.kind is BranchKind.JUNCTION:
            csum[l] = b.CJ
        elif b.kind is BranchKind.INDUCTOR:
            lsum[l] = 1.0 / b.L
    return csum, lsum


def _tridiagonal(s: np.ndarray) -> np.ndarray:
    m = np.diag([s[0] + s[1], s[1] + s[2], s[2] + s[3]])
    m[0, 1] = m[1, 0] = -s[1]
    m[1, 2] = m[2, 1] = -s[2]
    return m


def build_matrices(topology: Loop) -> tuple[np.ndarray, np.ndarray]:
    """3x3 capacitance and inverse-inductance matrices on node0..node2.

    Branch ``l`` contributes ``C_l`` (capacitor) or ``C_J,l`` (junction) to the
    capacitance and ``1/L_l`` (inductor) to the inverse inductance.
    """
    csum, lsum = _branch_sums(topology)
    return _tridiagonal(csum), _tridiagonal(lsum)


def apply_fluxoid_rule(topology: Loop) -> int | None:
    """Closure branch: the first junction branch, or ``None``."""
    for l, g in enumerate(topology.gamma):
        if g:
            return l
    return None


def _branch_vector(l: int) -> np.ndarray:
    """Coefficients of the branch phase on node0..node2, as in the loop Lagrangian."""
    w = np.zeros(3, dtype=int)
    tail, head = BRANCH_NODES[l]
    if head is not None:
        w[head] += 1
    if tail is not None:
        w[tail] -= 1
    if l == 3:
        w = -w  # B3 enters as cos(phi_2)
    return w


def node_classes(topology: Loop) -> list[int]:
    """Union-find over {ground, node0, node1, node2} joined by absent branches.

    Returns the representative of each of the four vertices, ground first.
    """
    parent = list(range(4))  # 0 = ground, k+1 = node k

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for l, b in enumerate(topology.branches):
        if b.kind is BranchKind.ABSENT:
            a, c = (0 if n is None else n + 1 for n in BRANCH_NODES[l])
            ra, rc = find(a), find(c)
            if ra != rc:
                # keep ground as the root so grounded classes are easy to spot
                lo, hi = min(ra, rc), max(ra, rc)
                parent[hi] = lo
    return [find(i) for i in range(4)]


def contract_wires(topology: Loop) -> ReducedNetwork:
    """Network on merged nodes, with absent branches acting as wires.

    Substituting the wire constraints ``phi = P theta`` into the 3x3 Lagrangian
    gives ``P^T C P`` and ``P^T Linv P``; junction phases map with ``P^T``.
    Junctions shorted by a wire only add a constant and are dropped.
    """
    C3, L3 = build_matrices(topology)
    roots = node_classes(topology)
    labels = sorted({roots[k + 1] for k in range(3) if roots[k + 1] != 0})
    P = np.zeros((3, len(labels)))
    for k in range(3):
        if roots[k + 1] != 0:
            P[k, labels.index(roots[k + 1])] = 1.0
    active = tuple(tuple(k for k in range(3) if roots[k + 1] == lab) for lab in labels)
    closure = apply_fluxoid_rule(topology)
    terms = []
    for l, b in enumerate(topology.branches):
        if b.kind is not BranchKind.JUNCTION:
            continue
        coeffs = P.T @ _branch_vector(l)
        if not np.any(coeffs):
            continue
        terms.append(JosephsonTerm(b.EJ, tuple(int(round(c)) for c in coeffs), l == closure, l))
    return ReducedNetwork(active, P.T @ C3 @ P, P.T @ L3 @ P, tuple(terms), topology.phi_x)


def _is_zero_row(m: np.ndarray, i: int, absolute: float) -> bool:
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    return float(np.max(np.abs(m[i]))) < max(absolute, REL_ZERO * scale)


def _drop(network: ReducedNetwork, q: int, C: np.ndarray, Linv: np.ndarray, emap: EliminationMap | None) -> ReducedNetwork:
    keep = [i for i in range(network.size) if i != q]
    terms = tuple(replace(t, coefficients=tuple(t.coefficients[i] for i in keep)) for t in network.josephson_terms)
    maps = network.elimination_maps + ((emap,) if emap else ())
    return replace(
        network,
        active_nodes=tuple(network.active_nodes[i] for i in keep),
        C_matrix=C[np.ix_(keep, keep)],
        Linv_matrix=Linv[np.ix_(keep, keep)],
        josephson_terms=terms,
        elimination_maps=maps,
    )


def _schur(m: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Schur complement of ``m`` removing index ``q``, and the solve weights."""
    keep = [i for i in range(m.shape[0]) if i != q]
    weights = -m[q, keep] / m[q, q]
    out = m.copy()
    out[np.ix_(keep, keep)] = m[np.ix_(keep, keep)] + np.outer(m[keep, q], weights)
    return out, weights


def eliminate_passive_nodes(network: ReducedNetwork) -> ReducedNetwork:
    """Remove nodes lacking a kinetic or a potential term.

    A node without capacitance is coordinate-only: solving
    ``dL/dphi_q = 0`` expresses it through its neighbours (series inductors).
    A node without inductance or junction is velocity-only: ``dL/dphidot_q = 0``
    (series capacitors). Repeats until no passive node is left.
    """
    while True:
        jnodes = network.junction_nodes()
        for q in range(network.size):
            c_zero = _is_zero_row(network.C_matrix, q, C_ZERO)
            l_zero = _is_zero_row(network.Linv_matrix, q, C_ZERO)
            if c_zero and q in jnodes:
                raise DegenerateNetwork(f"junction node {network.active_nodes[q]} has no capacitance")
            if c_zero and l_zero and q not in jnodes:
                network = _drop(network, q, network.C_matrix, network.Linv_matrix, None)
                break
            if c_zero:
                Linv, w = _schur(network.Linv_matrix, q)
                emap = _map(network, q, "coordinate", w)
                network = _drop(network, q, network.C_matrix, Linv, emap)
                break
            if l_zero and q not in jnodes:
                C, w = _schur(network.C_matrix, q)
                emap = _map(network, q, "velocity", w)
                network = _drop(network, q, C, network.Linv_matrix, emap)
                break
        else:
            break
    if network.size:
        eig = np.linalg.eigvalsh(network.C_matrix)
        if eig[0] <= REL_ZERO * eig[-1]:
            raise DegenerateNetwork("capacitance matrix is singular after elimination (floating island)")
    return network


def _map(network: ReducedNetwork, q: int, kind: str, weights: np.ndarray) -> EliminationMap:
    remaining = tuple(n for i, n in enumerate(network.active_nodes) if i != q)
    return EliminationMap(network.active_nodes[q], kind, tuple(float(w) for w in weights), remaining)


def legendre_transform(network: ReducedNetwork) -> HamiltonianSpec:
    """Charging and inductive energy matrices in hertz.

    ``E_C = e^2 C^-1 / 2`` and ``E_L = (Phi_0/2pi)^2 Linv``, so the kinetic term
    reads ``4 N.E_C.N`` with ``N`` the Cooper-pair number.
    """
    if network.size == 0:
        raise DegenerateNetwork("no active degrees of freedom")
    try:
        Cinv = np.linalg.inv(network.C_matrix)
    except np.linalg.LinAlgError:
        raise DegenerateNetwork("capacitance matrix is not invertible; eliminate passive nodes first") from None
    Cinv = (Cinv + Cinv.T) / 2
    E_C = E_CHARGE**2 * Cinv / 2 / PLANCK
    E_L = REDUCED_FLUX_QUANTUM**2 * network.Linv_matrix / PLANCK
    return HamiltonianSpec(network.active_nodes, E_C, (E_L + E_L.T) / 2, network.josephson_terms, network.phi_x)


def reduce_loop(loop: Loop) -> HamiltonianSpec:
    """Full reduction of one loop to its Hamiltonian description."""
    return legendre_transform(eliminate_passive_nodes(contract_wires(loop)))
