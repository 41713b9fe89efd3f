import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitforge import library as lib
from circuitforge.dynamics import (
    DriveSpec,
    dump_operator_matrix,
    evolve_driven,
    evolve_state,
    projected_operators,
    write_populations_csv,
)
from circuitforge.quantization import quantize

GHZ = 1e9


@pytest.fixture(scope="module")
def system_I():
    return quantize(lib.circuit_I())


def test_zero_drive_keeps_eigenstates_stationary(system_I):
    for start in range(4):
        r = evolve_driven(system_I, DriveSpec(omega=0.0, initial_state=start, levels=4, samples=50))
        np.testing.assert_allclose(r.populations[:, start], 1.0, atol=1e-9)


@pytest.mark.parametrize("ratio", [100, 200])
def test_two_level_rabi_matches_rotating_wave(system_I, ratio):
    energies, op = projected_operators(system_I, 2)
    w10 = energies[1] - energies[0]
    omega = w10 / ratio
    r = evolve_driven(system_I, DriveSpec(omega=omega, nu="w10", levels=2, t_max=2.0, samples=201))
    # resonant Rabi oscillation: P1 = sin^2(pi Omega |O10| t / 1) with the time unit chosen so that P1(t_eff) = 1
    rabi = np.sin(math.pi / 2 * r.times_eff) ** 2
    np.testing.assert_allclose(r.populations[:, 1], rabi, atol=0.02)
    assert r.t_eff == pytest.approx(1 / (2 * omega * abs(op[1, 0])))


def test_norm_is_conserved(system_I):
    r = evolve_driven(system_I, DriveSpec(levels=6, t_max=2.0))
    np.testing.assert_allclose(r.norm, 1.0, atol=1e-7)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20)
def test_backward_integration_recovers_initial_state(seed):
    rng = np.random.default_rng(seed)
    energies = np.sort(rng.uniform(0, 5, 4))
    a = rng.normal(size=(4, 4))
    op = (a + a.T) / 2
    psi0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi0 /= np.linalg.norm(psi0)
    forward = evolve_state(energies, op, psi0, np.linspace(0, 3, 5), 0.3, 1.7, rtol=1e-11, atol=1e-11)
    backward = evolve_state(energies, op, forward[-1], np.linspace(3, 0, 5), 0.3, 1.7, rtol=1e-11, atol=1e-11)
    np.testing.assert_allclose(backward[-1], psi0, atol=1e-7)


def test_dump_is_symmetric_and_nonnegative():
    table = dump_operator_matrix(lib.circuit_I(), k=5)
    assert table.shape == (5, 5)
    np.testing.assert_array_equal(table, table.T)
    assert np.all(table >= 0)


def test_harmonic_dump_is_tridiagonal():
    table = dump_operator_matrix(lib.series_lc_loop(), operator_label="charge:0", k=6, m_max=30)
    off = np.abs(np.subtract.outer(np.arange(6), np.arange(6)))
    assert np.all(table[off > 1] < 1e-8 * table.max())
    # harmonic oscillator ladder: |<n+1|N|n>| grows like sqrt(n+1)
    first = np.diag(table, 1)
    np.testing.assert_allclose(first / first[0], np.sqrt(np.arange(1, 6)), rtol=1e-6)


def test_circuit_III_dump_is_dominated_by_adjacent_elements():
    table = dump_operator_matrix(lib.circuit_III(), k=4, m_max=40)
    adjacent = np.diag(table, 1)
    farther = np.concatenate([np.diag(table, 2), np.diag(table, 3)])
    assert adjacent.min() > 10 * farther.max()


def test_doubling_levels_does_not_change_dynamics(system_I):
    small = evolve_driven(system_I, DriveSpec(levels=4, t_max=1.0, samples=41))
    large = evolve_driven(system_I, DriveSpec(levels=8, t_max=1.0, samples=41))
    np.testing.assert_allclose(small.populations[:, :4], large.populations[:, :4], atol=1e-4)


def test_drive_spec_validation_and_defaults(system_I):
    for kwargs in ({"omega": -1.0}, {"levels": 1}, {"initial_state": 9, "levels": 4}, {"nu": "w31"}, {"t_max": 0}):
        with pytest.raises(ValueError):
            DriveSpec(**kwargs)
    r = evolve_driven(system_I, DriveSpec(nu="w20", levels=4, t_max=0.1, samples=3))
    assert r.initial_state == 1
    energies, _ = projected_operators(system_I, 4)
    assert r.nu == pytest.approx(energies[2] - energies[0])
    assert r.omega == pytest.approx(r.nu / 50)


def test_population_csv(tmp_path, system_I):
    r = evolve_driven(system_I, DriveSpec(levels=3, t_max=0.1, samples=4))
    write_populations_csv(tmp_path / "p.csv", r)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "t,t_over_t_eff,P0,P1,P2" and len(lines) == 5
