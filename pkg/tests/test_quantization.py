import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitforge import library as lib
from circuitforge.circuit import Branch, BranchKind, Chain, Loop, enumerate_single_loop_topologies, DEFAULT_TEMPLATE
from circuitforge.constants import FF, GHZ, NH
from circuitforge.network import DegenerateNetwork, reduce_loop
from circuitforge.quantization import (
    Basis,
    DimensionOverflow,
    MissingInductance,
    assemble_chain_hamiltonian,
    assemble_hamiltonian,
    build_node_operators,
    charge,
    choose_bases,
    convergence_study,
    coupling_energy,
    fock,
    quantize,
    reduce_chain,
    select_basis,
)
from circuitforge.spectrum import lowest_eigenpairs

from strategies import loops


def _levels(system, k=4):
    return lowest_eigenpairs(system.H, k)[0]


# --- basis selection -----------------------------------------------------------


def test_basis_examples():
    assert select_basis(reduce_loop(lib.series_lc_loop()), 0) == "fock"
    assert select_basis(reduce_loop(lib.circuit_I()), 0) == "charge"
    assert select_basis(reduce_loop(lib.circuit_IV()), 0) == "fock"


def test_every_node_of_every_topology_gets_one_basis():
    template = {
        BranchKind.CAPACITOR: Branch.capacitor(50 * FF),
        BranchKind.INDUCTOR: Branch.inductor(10 * NH),
        BranchKind.JUNCTION: Branch.junction(20 * FF, 10 * GHZ),
        BranchKind.ABSENT: DEFAULT_TEMPLATE[BranchKind.ABSENT],
    }
    count = 0
    for loop in enumerate_single_loop_topologies(template):
        try:
            spec = reduce_loop(loop)
        except DegenerateNetwork:
            continue
        bases = choose_bases(spec)
        assert len(bases) == spec.size
        assert all(b.kind in ("charge", "fock") for b in bases)
        count += 1
    assert count > 150


# --- node operators ------------------------------------------------------------


def test_smallest_charge_lattice():
    ops = build_node_operators(charge(1), 1.0)
    np.testing.assert_array_equal(ops.N, np.diag([-1.0, 0.0, 1.0]))
    np.testing.assert_array_equal(ops.exp_iphi, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])


def test_charge_commutator_interior_rows():
    ops = build_node_operators(charge(6), 1.0)
    comm = ops.N @ ops.exp_iphi - ops.exp_iphi @ ops.N
    np.testing.assert_allclose(comm, ops.exp_iphi, atol=0)


def test_fock_zero_point_factor():
    ops = build_node_operators(fock(5), 1.0, 1.0)
    assert ops.phi_zpf == pytest.approx(2**0.25, rel=1e-15)
    assert ops.n_zpf == pytest.approx(32**-0.25, rel=1e-15)


@pytest.mark.parametrize("ratio", [0.1, 1.0, 7.0])
def test_fock_commutator_interior_block(ratio):
    ops = build_node_operators(fock(20), 1.0, ratio)
    comm = ops.phi @ ops.N - ops.N @ ops.phi
    np.testing.assert_allclose(comm[:19, :19], 1j * np.eye(19), atol=1e-12)
    np.testing.assert_allclose(ops.N, ops.N.conj().T)
    np.testing.assert_allclose(ops.phi, ops.phi.conj().T)


def test_fock_requires_inductance():
    with pytest.raises(MissingInductance):
        build_node_operators(fock(4), 1.0, 0.0)


def test_basis_invariants():
    assert charge(3).dimension == 7
    assert fock(3).dimension == 4
    with pytest.raises(ValueError):
        Basis("charge", 0)
    with pytest.raises(ValueError):
        Basis("sine", 2)


# --- assembly --------------------------------------------------------------------


def test_circuit_I_reference_values():
    w = _levels(quantize(lib.circuit_I()))
    w = w - w[0]
    assert w[1] / GHZ == pytest.approx(4.90, rel=0.02)
    assert (w[2] - w[1]) / GHZ == pytest.approx(4.47, rel=0.02)
    assert (w[3] - w[2]) / GHZ == pytest.approx(4.06, rel=0.02)


def test_lc_loop_is_exactly_harmonic():
    spec = reduce_loop(lib.series_lc_loop())
    omega = math.sqrt(8 * spec.E_C[0, 0] * spec.E_L[0, 0])
    w = _levels(assemble_hamiltonian(spec, [fock(12)]), 6)
    np.testing.assert_allclose(np.diff(w), omega, rtol=1e-12)
    assert w[0] == pytest.approx(omega / 2, rel=1e-12)


def test_mixed_basis_cosine_equals_direct_shift_construction():
    # three junctions with B3 a wire: two charge nodes and the term cos(phi1 - phi0)
    j = Branch.junction(10 * FF, 10 * GHZ)
    loop = Loop((j, j, j, Branch.absent()), 0.7)
    spec = reduce_loop(loop)
    assert [b.kind for b in choose_bases(spec)] == ["charge", "charge"]
    system = assemble_hamiltonian(spec, [charge(2), charge(2)])

    n = np.diag(np.arange(-2.0, 3.0))
    S = np.eye(5, k=-1)
    I = np.eye(5)
    N0, N1 = np.kron(n, I), np.kron(I, n)
    H = 4 * spec.E_C[0, 0] * N0 @ N0 + 4 * spec.E_C[1, 1] * N1 @ N1 + 8 * spec.E_C[0, 1] * N0 @ N1
    direct = {(1, 0): np.kron(S, I), (-1, 1): np.kron(S.T, S), (0, -1): np.kron(I, S.T)}
    for term in spec.josephson_terms:
        E = np.exp(-1j * term.offset(loop.phi_x)) * direct[term.coefficients]
        H = H - term.EJ * (E + E.conj().T) / 2
    np.testing.assert_allclose(system.dense(), H, atol=1e-6 * np.abs(H).max())

    # the same cosine through cos(A)cos(B) + sin(A)sin(B) with per-node cos/sin
    ops = build_node_operators(charge(2), spec.E_C[0, 0])
    c, s = ops.cos_sin(1)
    via_trig = np.kron(c, c) + np.kron(s, s)
    E = direct[(-1, 1)]
    np.testing.assert_allclose(via_trig, (E + E.conj().T) / 2, atol=1e-14)


def test_fock_cos_sin_are_hermitian_functions():
    ops = build_node_operators(fock(15), 1.0, 2.0)
    c, s = ops.cos_sin(1)
    np.testing.assert_allclose(c @ c + s @ s, np.eye(16), atol=1e-12)
    np.testing.assert_allclose(ops.exp_i(1), c + 1j * s, atol=1e-12)


def test_dimension_cap():
    with pytest.raises(DimensionOverflow):
        quantize(lib.circuit_VI(), m_max=12, max_dim=1000)


def test_uncoupled_chain_is_direct_sum():
    a, b = lib.circuit_I(), lib.circuit_IV(0.3)
    chain = Chain((a, b), (1.0,))  # one farad: coupling energy ~ 1e-5 Hz
    assert coupling_energy(1.0) < 1e-3
    wa = _levels(quantize(a), 4)
    wb = _levels(quantize(b), 4)
    expected = np.sort((wa[:, None] + wb[None, :]).ravel())[:4]
    np.testing.assert_allclose(_levels(quantize(chain), 4), expected, rtol=1e-9)


def test_first_order_coupling_shift():
    # first-order shift <00|4 E_Cc N N|00>; stationary states have <N> = 0, so
    # the full shift must be of second order in the coupling energy
    a = Loop((Branch.junction(20 * FF, 5 * GHZ), Branch.capacitor(30 * FF), Branch.absent(), Branch.inductor(20 * NH)), 0.9)
    b = lib.circuit_IV(0.4)
    shifts, firsts = [], []
    for cc in (2000 * FF, 4000 * FF):
        chain = Chain((a, b), (cc,))
        sysc = quantize(chain)
        sys0 = quantize(Chain((a, b), (1e6,)))
        e0 = _levels(sys0, 1)[0]
        v0 = lowest_eigenpairs(sys0.H, 1)[1][:, 0]
        coupling = sysc.H - sys0.H
        firsts.append(np.real(v0.conj() @ (coupling @ v0)))
        shifts.append(_levels(sysc, 1)[0] - e0)
    # the residual beyond first order scales as the square of the coupling
    r_big, r_small = shifts[0] - firsts[0], shifts[1] - firsts[1]
    assert abs(firsts[0]) < 1e-6 * abs(shifts[0])
    assert r_small == pytest.approx(r_big / 4, rel=0.05)


def test_empty_loops_are_skipped_but_all_empty_is_an_error():
    specs = reduce_chain(lib.circuit_III())
    assert specs[0] is not None and specs[1] is None
    dead = Loop((Branch.junction(1 * FF, 1 * GHZ), Branch.absent(), Branch.absent(), Branch.absent()))
    with pytest.raises(DegenerateNetwork):
        quantize(Chain((dead, dead), (1 * FF,)))


def test_loop_level_truncation_matches_full_product():
    chain = Chain((lib.circuit_I(), lib.circuit_IV(0.5)), (50 * FF,))
    full = _levels(quantize(chain, 6, 10), 4)
    reduced = _levels(quantize(chain, 6, 10, loop_levels=11), 4)
    np.testing.assert_allclose(reduced, full, rtol=1e-6)


# --- convergence --------------------------------------------------------------------


def test_harmonic_convergence_is_exact():
    rep = convergence_study(lib.series_lc_loop(), range(4, 10))
    assert np.all(rep.errors < 1e-14)
    assert rep.converged_m == 4


@pytest.mark.parametrize("name", ["a", "b", "c", "d"])
def test_refinement_is_monotone(name):
    loop = lib.convergence_loops()[name]
    rep = convergence_study(loop, [12, 24])
    assert np.all(rep.errors >= 0)
    assert np.all(rep.error(24) <= rep.error(12) + 1e-10)


# --- invariants ----------------------------------------------------------------------


@settings(max_examples=200)
@given(loops())
def test_hermitian_real_spectrum_and_flux_periodicity(loop):
    try:
        system = quantize(loop, 3, 5)
    except DegenerateNetwork:
        return
    H = system.H
    scale = abs(H).max()
    assert abs(H - H.conj().T).max() <= 1e-12 * scale
    assert system.dimension == int(np.prod(system.dims))
    w = np.linalg.eigvalsh(H.toarray())
    assert np.all(np.isfinite(w))
    shifted = np.linalg.eigvalsh(quantize(loop, 3, 5, phi_x=loop.phi_x + 2 * math.pi).H.toarray())
    np.testing.assert_allclose(shifted, w, rtol=1e-9, atol=1e-9 * np.abs(w).max())
