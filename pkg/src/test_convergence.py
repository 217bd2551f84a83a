import numpy as np
import pytest

from convergence import *
from misc_tools import df_to_csv_text, scaling_prefactors

DOUBLING_N = [64, 128, 256]


@pytest.fixture(scope="module")
def reference_sweep():
    """Reference gaussian pulse swept over N = 64, 128, 256."""
    return sweep(DOUBLING_N, REFERENCE_OMEGA_E, REFERENCE_PULSE, reference_grid())


def test_sweep_rows_are_ordered(reference_sweep):
    assert reference_sweep["n_total"].tolist() == DOUBLING_N
    assert not reference_sweep["failed"].any()
    assert np.isnan(reference_sweep["e0_ratio"].iloc[0])


def test_zeroth_order_error_halves(reference_sweep):
    """
    <N_e> - |beta|^2 is O(1/N): doubling N halves it.
    """
    ratios = reference_sweep["e0_ratio"].iloc[1:]
    assert ratios.between(0.375, 0.625).all(), f"E0 ratios {ratios.tolist()}"


def test_first_order_error_quarters(reference_sweep):
    """
    The first-order correction leaves an O(1/N^2) error.
    """
    ratios = reference_sweep["e1_ratio"].iloc[1:]
    assert ratios.between(0.1875, 0.3125).all(), f"E1 ratios {ratios.tolist()}"
    assert (reference_sweep["e1"] < reference_sweep["e0"]).all()


def test_uncertainty_gap_scales_as_inverse_square(reference_sweep):
    prefactors = scaling_prefactors(DOUBLING_N, reference_sweep["uncertainty_gap"], 2)
    mean = prefactors.mean()
    assert np.all(np.abs(prefactors - mean) <= 0.5 * mean), f"C/N^2 prefactors {prefactors}"


def test_variance_errors_shrink(reference_sweep):
    for column in ("var_x1_ratio", "var_x2_ratio"):
        ratios = reference_sweep[column].iloc[1:]
        assert ratios.between(0.1875, 0.3125).all(), f"{column} {ratios.tolist()}"


def test_robertson_margin(reference_sweep):
    assert (reference_sweep["robertson_margin"] >= -1e-9).all()


def test_commutator_gap_quarters(reference_sweep):
    """
    <[X1, X2]> differs from i(1 - 2 eta <b^dagger b>) at order eta^2.
    """
    ratios = reference_sweep["comm_gap_ratio"].iloc[1:]
    assert ratios.between(0.1875, 0.3125).all(), f"comm gap ratios {ratios.tolist()}"


def test_reference_pulse_stays_perturbative(reference_sweep):
    assert not reference_sweep["validity_warning"].any()
    assert (reference_sweep["validity"] < 0.25).all()


def test_single_point_sweep_has_no_ratios():
    table = sweep([16], REFERENCE_OMEGA_E, REFERENCE_PULSE, reference_grid(8.0, 41))
    assert len(table) == 1
    assert not any(column.endswith("_ratio") for column in table.columns)


def test_sweep_sorts_n_values():
    table = sweep([32, 8, 16], REFERENCE_OMEGA_E, REFERENCE_PULSE, reference_grid(8.0, 41))
    assert table["n_total"].tolist() == [8, 16, 32]


def test_strong_pulse_flags_validity():
    strong = PulseProfile.gaussian(amplitude=2.0, omega_f=1.0, center=3.0, width=1.0)
    table = sweep([4, 8], 1.0, strong, reference_grid(8.0, 81))
    assert table["validity_warning"].all()
    assert not table["failed"].any()


def test_failed_point_keeps_its_row():
    table = sweep([4, 8], 1.0, REFERENCE_PULSE, np.linspace(1.0, 8.0, 15))
    assert table["failed"].all()
    assert table["error"].str.startswith("ValueError").all()
    assert table["n_total"].tolist() == [4, 8]


def test_column_order_survives_a_failed_first_point():
    """
    N = 0 fails and sorts first; the table still leads with the fixed column order.
    """
    table = sweep([8, 0], 1.0, REFERENCE_PULSE, reference_grid(8.0, 41))
    assert table["failed"].tolist() == [True, False]
    assert list(table.columns)[: len(SWEEP_COLUMNS)] == SWEEP_COLUMNS
    assert table.loc[1, "e0"] > 0
    assert np.isnan(table.loc[1, "e0_ratio"]), "no ratio against a failed point"


def test_sweep_is_independent_of_workers():
    grid = reference_grid(8.0, 41)
    serial = sweep([8, 16, 32], 1.0, REFERENCE_PULSE, grid, workers=1)
    parallel = sweep([8, 16, 32], 1.0, REFERENCE_PULSE, grid, workers=2)
    assert df_to_csv_text(serial) == df_to_csv_text(parallel)


def test_resolve_sign_picks_negative():
    """
    The b^dagger coefficient -beta^2 e^{i omega_e t} beats +beta^2 by more than a factor 10.
    """
    resolution = resolve_sign()
    assert resolution.sign == -1
    assert resolution.separation > 10
    assert resolution.ratios[-1] == pytest.approx(0.25, abs=0.0625)
    assert resolution.errors[-1][-1] < resolution.errors[1][-1]

    report = resolution.to_dict()
    assert report["resolved_sign_s"] == -1
    assert report["n_values"] == list(REFERENCE_N)
    assert set(report["var_x1_errors"]) == {"1", "-1"}


def test_convergence_metrics_on_vacuum_run():
    """
    Without drive every error vanishes and the commutator gap is zero.
    """
    import dynamics

    params = dynamics.ModelParams(8, 1.0, PulseProfile.constant(0.0))
    result = dynamics.simulate(params, np.linspace(0, 2, 5))
    metrics = convergence_metrics(result.table, 8)
    assert metrics["n_total"] == 8
    for key in ("e0", "e1", "var_x1_error", "var_x2_error", "uncertainty_gap", "comm_gap"):
        assert metrics[key] == pytest.approx(0.0, abs=1e-10), key
    assert metrics["robertson_margin"] == pytest.approx(0.0, abs=1e-10)
