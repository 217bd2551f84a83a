"""
Exact-versus-perturbative comparisons across atom numbers.

At fixed effective coupling mu the deformation eta = 1/N shrinks as N grows,
so the zeroth-order error in <N_e> should halve and the first-order error
quarter whenever N doubles. `sweep` measures this, and `resolve_sign` uses the
same machinery to pick the sign of the b^dagger coefficient in the first-order
solution.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pandas as pd

import dynamics
import fock_core
from dynamics import ModelParams, PulseProfile
from gardiner import make_algebra
from misc_tools import move_columns_to_front, pairwise_ratios

logger = logging.getLogger(__name__)

# smooth resonant pulse with max |beta|^2 close to 1
REFERENCE_PULSE = PulseProfile.gaussian(amplitude=0.4, omega_f=1.0, center=3.0, width=1.0)
REFERENCE_OMEGA_E = 1.0
REFERENCE_T_MAX = 8.0
REFERENCE_POINTS = 161
REFERENCE_N = (128, 256)

# fixed leading order of the sweep table, whichever rows failed
SWEEP_COLUMNS = [
    "n_total",
    "e0",
    "e1",
    "var_x1_error",
    "var_x2_error",
    "uncertainty_gap",
    "robertson_margin",
    "comm_gap",
    "validity",
    "validity_warning",
    "failed",
    "error",
]

RATIO_COLUMNS = {
    "e0": "e0_ratio",
    "e1": "e1_ratio",
    "var_x1_error": "var_x1_ratio",
    "var_x2_error": "var_x2_ratio",
    "uncertainty_gap": "uncertainty_gap_ratio",
    "comm_gap": "comm_gap_ratio",
}


def reference_grid(t_max=REFERENCE_T_MAX, n_points=REFERENCE_POINTS):
    return np.linspace(0.0, t_max, n_points)


def convergence_metrics(table, n_total, eta=None):
    """Error summary of one simulated run.

    Parameters:
        table: merged observables from `dynamics.simulate`
        n_total: atom number N of the run
        eta: deformation used for the commutator gap, 1/N unless given

    Returns:
        dict with e0, e1, the variance errors, the uncertainty gap against
        1/4 - eta|beta|^2, the smallest Robertson margin and the gap between
        the exact quadrature commutator and i(1 - 2 eta <b^dagger b>).
    """
    eta = 1.0 / n_total if eta is None else eta
    comm = table["re_comm_x1x2"] + 1j * table["im_comm_x1x2"]
    comm_first_order = 1j * (1.0 - 2.0 * eta * table["mean_bdb_exact"])
    return {
        "n_total": int(n_total),
        "e0": float((table["mean_ne_exact"] - table["mean_ne_order0"]).abs().max()),
        "e1": float((table["mean_ne_exact"] - table["mean_ne_order1"]).abs().max()),
        "var_x1_error": float((table["var_x1_exact"] - table["var_x1_pert"]).abs().max()),
        "var_x2_error": float((table["var_x2_exact"] - table["var_x2_pert"]).abs().max()),
        "uncertainty_gap": float((table["product_exact"] - table["product_pert"]).abs().max()),
        "robertson_margin": float((table["product_exact"] - table["robertson_bound"]).min()),
        "comm_gap": float(np.max(np.abs(comm - comm_first_order))),
    }


def _sweep_point(task):
    n_total, omega_e, pulse, grid, sign, substeps, refinement = task
    row = {"n_total": n_total}
    try:
        params = ModelParams(n_total=n_total, omega_e=omega_e, pulse=pulse)
        result = dynamics.simulate(params, grid, sign, substeps, refinement)
        row.update(convergence_metrics(result.table, n_total))
        row.update(validity=result.validity, validity_warning=result.validity_warning)
        row.update(failed=False, error="")
    except Exception as e:
        logger.error("sweep point N=%d failed: %s", n_total, e)
        row.update(failed=True, error=f"{type(e).__name__}: {e}")
    return row


def sweep(n_values, omega_e, pulse, time_grid, sign=-1, workers=1, substeps=None, refinement=None):
    """One row of convergence metrics per N, ordered by N.

    Points run in up to `workers` processes; rows are reassembled in input
    order so the table does not depend on scheduling. Ratio columns compare
    each row to the previous one and are left out for a single N. Failed
    points keep their row with `failed` set.
    """
    n_values = sorted(int(n) for n in n_values)
    if not n_values:
        raise ValueError("sweep needs at least one N")
    grid = np.asarray(time_grid, dtype=float)
    tasks = [(n, omega_e, pulse, grid, sign, substeps, refinement) for n in n_values]

    if workers <= 1 or len(tasks) == 1:
        rows = [_sweep_point(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_sweep_point, tasks))

    table = pd.DataFrame(rows)
    move_columns_to_front(table, [c for c in SWEEP_COLUMNS if c in table])
    if len(table) > 1:
        for metric, ratio in RATIO_COLUMNS.items():
            if metric in table:
                table[ratio] = pairwise_ratios(table[metric])
    return table


@dataclass(frozen=True)
class SignResolution:
    sign: int
    n_values: tuple
    errors: dict
    ratios: dict
    separation: float
    printed_error: float

    def to_dict(self):
        return {
            "resolved_sign_s": self.sign,
            "n_values": list(self.n_values),
            "var_x1_errors": {str(s): list(errs) for s, errs in self.errors.items()},
            "doubling_ratios": {str(s): r for s, r in self.ratios.items()},
            "separation": self.separation,
            "printed_form_error": self.printed_error,
        }


@lru_cache(maxsize=8)
def resolve_sign(
    n_values=REFERENCE_N,
    omega_e=REFERENCE_OMEGA_E,
    pulse=REFERENCE_PULSE,
    t_max=REFERENCE_T_MAX,
    n_points=REFERENCE_POINTS,
    substeps=None,
):
    """Pick the sign of the b^dagger coefficient by exact evolution.

    Both candidate signs predict Var X1 in the evolving vacuum. The correct
    one is off by O(1/N^2), the wrong one by O(1/N); the sign with the
    smaller error at the largest N wins.
    """
    grid = reference_grid(t_max, n_points)
    errors = {1: [], -1: []}
    printed_error = None
    for n_total in n_values:
        params = ModelParams(n_total=n_total, omega_e=omega_e, pulse=pulse)
        algebra = make_algebra(fock_core.build_sector(n_total))
        trajectory = dynamics.evolve(dynamics.trapped_vacuum(algebra.sector), params, grid, substeps)
        exact = dynamics.observables_exact(trajectory, algebra, grid)["var_x1_exact"].to_numpy()
        for sign in errors:
            solution = dynamics.perturbative_solution(params, grid, sign=sign)
            predicted = dynamics.observables_perturbative(solution, params.eta)["var_x1_pert"]
            errors[sign].append(float(np.max(np.abs(exact - predicted.to_numpy()))))
        printed, _ = dynamics.printed_quadrature_variances(solution.beta, params.eta)
        printed_error = float(np.max(np.abs(exact - printed)))

    sign = min(errors, key=lambda s: errors[s][-1])
    ratios = {
        s: errs[-1] / errs[0] if len(errs) > 1 and errs[0] else float("nan")
        for s, errs in errors.items()
    }
    separation = errors[-sign][-1] / errors[sign][-1] if errors[sign][-1] else float("inf")
    logger.info("resolved sign %+d: Var X1 errors %s, separation %.1f", sign, errors, separation)
    return SignResolution(
        sign=sign,
        n_values=tuple(n_values),
        errors={s: tuple(errs) for s, errs in errors.items()},
        ratios=ratios,
        separation=separation,
        printed_error=printed_error,
    )
