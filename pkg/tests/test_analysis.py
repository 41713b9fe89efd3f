import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitforge import library as lib
from circuitforge.analysis import (
    ALL_PARAMETERS,
    SINGLE_CAPACITOR,
    SWEEP_COLUMNS,
    PerturbationSpec,
    designated_capacitor,
    flux_sweep,
    parameter_names,
    perturb_parameters,
    robustness_study,
    write_robustness_csv,
    write_sweep_csv,
)
from circuitforge.circuit import Branch, Loop
from circuitforge.constants import FF, GHZ
from circuitforge.objectives import LADDER, LAMBDA


def test_sweep_is_periodic_and_even_in_flux():
    s = flux_sweep(lib.circuit_I(), (-2 * math.pi, 2 * math.pi), 17)
    w10 = s.transition(1, 0)
    np.testing.assert_allclose(w10, w10[::-1], rtol=1e-8)
    # the grid spacing is pi/4, so 8 steps make one flux quantum
    np.testing.assert_allclose(w10[:9], w10[8:], rtol=1e-8)
    assert not s.failures


def test_sweep_rows_follow_column_order():
    s = flux_sweep(lib.circuit_I(), (0, math.pi), 3)
    rows = s.rows()
    assert len(rows) == 3 and len(rows[0]) == len(SWEEP_COLUMNS)
    r = s.reports[1]
    assert rows[1][0] == pytest.approx(math.pi / 2)
    assert rows[1][1] == pytest.approx(r.omega(1, 0))
    assert rows[1][4] == pytest.approx(r.omega(2, 0))
    assert rows[1][8] == pytest.approx(abs(r.element(0, 2, s.label)))


def test_sweep_rejects_bad_grid():
    with pytest.raises(ValueError):
        flux_sweep(lib.circuit_I(), steps=1)
    with pytest.raises(ValueError):
        flux_sweep(lib.circuit_I(), (1.0, 0.0))


def test_sweep_records_failures_instead_of_aborting(monkeypatch):
    import circuitforge.analysis as analysis

    real = analysis.spectrum
    calls = []

    def flaky(system, k, labels):
        calls.append(1)
        if len(calls) == 2:
            raise ArithmeticError("solver failed")
        return real(system, k, labels)

    monkeypatch.setattr(analysis, "spectrum", flaky)
    s = flux_sweep(lib.circuit_I(), (0, 1), 4)
    assert list(s.failures) == [1]
    assert s.reports[1] is None and np.isnan(s.transition(1, 0)[1])
    assert all(r is not None for i, r in enumerate(s.reports) if i != 1)


def test_circuit_IV_sweet_spot_at_half_flux():
    s = flux_sweep(lib.circuit_IV(), (0, 2 * math.pi), 21, truncations=(10, 60), labels=())
    w10, w21 = s.transition(1, 0), s.transition(2, 1)
    i = int(np.argmin(w10))
    assert s.grid[i] == pytest.approx(math.pi)
    assert w10[i] / w21[i] < 0.05
    np.testing.assert_allclose(w10, w10[::-1], rtol=1e-6, atol=1e3)


# --- perturbations ---------------------------------------------------------------------


def test_zero_sigma_leaves_circuit_untouched():
    c = lib.circuit_III()
    rng = np.random.default_rng(0)
    for mode in (SINGLE_CAPACITOR, ALL_PARAMETERS):
        assert perturb_parameters(c, PerturbationSpec(mode, 0.0), rng).parameter_vector() == c.parameter_vector()


def test_designated_capacitor_choice():
    chain = lib.circuit_III()
    names = parameter_names(chain)
    assert names[designated_capacitor(chain)] == "couplings[0]"
    loop = lib.circuit_II()
    names = parameter_names(loop)
    i = designated_capacitor(loop)
    values = loop.parameter_vector()
    assert names[i].endswith(".C")
    assert values[i] == max(v for v, n in zip(values, names) if n.endswith(".C"))
    # no capacitor branch: the largest junction capacitance is used
    loop = lib.circuit_I()
    names = parameter_names(loop)
    i = designated_capacitor(loop)
    assert names[i].endswith(".CJ")
    assert loop.parameter_vector()[i] == max(v for v, n in zip(loop.parameter_vector(), names) if n.endswith(".CJ"))


@given(st.integers(0, 2**32 - 1), st.floats(0.001, 0.3))
def test_single_cap_mode_changes_only_designated_value(seed, sigma):
    c = lib.circuit_III()
    out = perturb_parameters(c, PerturbationSpec(SINGLE_CAPACITOR, sigma), np.random.default_rng(seed))
    before, after = np.array(c.parameter_vector()), np.array(out.parameter_vector())
    changed = np.flatnonzero(before != after)
    assert set(changed) <= {designated_capacitor(c)}
    assert abs(after[designated_capacitor(c)] / before[designated_capacitor(c)] - 1) <= sigma + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_perturbed_values_stay_positive(seed):
    c = lib.circuit_I()
    out = perturb_parameters(c, PerturbationSpec(ALL_PARAMETERS, 2.0), np.random.default_rng(seed))
    assert all(v > 0 for v in out.parameter_vector())


@pytest.mark.parametrize("mode", [SINGLE_CAPACITOR, ALL_PARAMETERS])
def test_perturbation_mean_converges_to_nominal(mode):
    c = lib.circuit_I()
    nominal = np.array(c.parameter_vector())
    rng = np.random.default_rng(1)
    spec = PerturbationSpec(mode, 0.1)
    samples = np.array([perturb_parameters(c, spec, rng).parameter_vector() for _ in range(10_000)])
    np.testing.assert_allclose(samples.mean(axis=0), nominal, rtol=0.01)
    rel_std = samples.std(axis=0) / nominal
    if mode == ALL_PARAMETERS:
        np.testing.assert_allclose(rel_std, 0.1, rtol=0.05)
    else:
        # uniform on [-sigma, sigma] has standard deviation sigma / sqrt(3)
        assert rel_std.max() == pytest.approx(0.1 / math.sqrt(3), rel=0.05)


def test_perturbation_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec("some", 0.1)
    with pytest.raises(ValueError):
        PerturbationSpec(sigma=-1)
    with pytest.raises(ValueError):
        PerturbationSpec(samples=0)
    assert PerturbationSpec(SINGLE_CAPACITOR).law == "uniform"
    assert PerturbationSpec(ALL_PARAMETERS).law == "normal"


# --- robustness ------------------------------------------------------------------


def test_zero_sigma_robustness_reproduces_nominal():
    r = robustness_study(lib.circuit_I(), PerturbationSpec(ALL_PARAMETERS, 0.0, samples=5), LADDER)
    np.testing.assert_allclose(r.samples, np.tile(r.nominal, (5, 1)), rtol=1e-12)
    np.testing.assert_allclose(r.std, 0.0, atol=1e-12)
    assert r.names == ["R21,10", "R32,21"]


def test_robustness_is_deterministic_and_counts_samples():
    spec = PerturbationSpec(ALL_PARAMETERS, 0.05, samples=6)
    a = robustness_study(lib.circuit_I(), spec, LADDER, seed=3)
    b = robustness_study(lib.circuit_I(), spec, LADDER, seed=3)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert len(a.samples) + a.failed == 6
    c = robustness_study(lib.circuit_I(), spec, LADDER, seed=4)
    assert not np.array_equal(a.samples, c.samples)


def test_robustness_failures_are_counted():
    # a bare capacitor loop with a junction: w21 - w10 may vanish but w20 never does
    loop = Loop((Branch.junction(5 * FF, 10 * GHZ), Branch.absent(), Branch.absent(), Branch.capacitor(5 * FF)))
    r = robustness_study(loop, PerturbationSpec(ALL_PARAMETERS, 0.05, samples=3), LAMBDA)
    assert len(r.samples) + r.failed == 3
    assert r.names == ["R21,20"]


def test_robustness_envelopes_bracket_samples():
    spec = PerturbationSpec(SINGLE_CAPACITOR, 0.05, samples=3)
    r = robustness_study(lib.circuit_I(), spec, LADDER, sweep={"flux_range": (0, math.pi), "steps": 5})
    assert set(r.envelopes) == {"phi_x", "w10_min", "w10_max", "w21_min", "w21_max", "w20_min", "w20_max"}
    assert np.all(r.envelopes["w10_min"] <= r.envelopes["w10_max"])


def test_csv_writers(tmp_path):
    s = flux_sweep(lib.circuit_I(), (0, 1), 3)
    write_sweep_csv(tmp_path / "s.csv", s)
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert tuple(rows[0]) == SWEEP_COLUMNS and len(rows) == 4
    r = robustness_study(lib.circuit_I(), PerturbationSpec(samples=2), LADDER)
    write_robustness_csv(tmp_path / "r.csv", r)
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == ["sample", "R21,10", "R32,21"]
    assert float(rows[1][1]) == r.samples[0, 0]
