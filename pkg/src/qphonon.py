"""
Command-line entry point of the q-deformed phonon output-coupling simulator.

```
python ./src/qphonon.py algebra-check --config configs/algebra_check.json
python ./src/qphonon.py evolve --config configs/evolve.json --output-dir _output/run1
python ./src/qphonon.py sweep --config configs/sweep.json --workers 4
python ./src/qphonon.py dressed-check --config configs/dressed_check.json
python ./src/qphonon.py rabi --config configs/rabi.json
```

Each command writes a CSV table (time series or sweep rows) and a JSON
report to the output directory. Exit codes: 0 success, 1 numerical or
assertion failure, 2 configuration error.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

sys.path.insert(1, "./src/")

import numpy as np
import pandas as pd

import convergence
import dressed
import dynamics
import fock_core
import gardiner
from misc_tools import write_csv_atomic, write_json_atomic
from run_config import SCHEMA_VERSION, ConfigError, load_config
from settings import config

logger = logging.getLogger("qphonon")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

DERIVED_SIGN = -1
STEP_HALVING_TOL = 1e-8
RABI_AMPLITUDE_TOL = 1e-9


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qphonon",
        description="Exact and first-order simulation of q-deformed phonon output coupling.",
    )
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="run document (JSON)")
    parser.add_argument("--output-dir", type=Path, default=None)
    parser.add_argument("--workers", type=_positive_int, default=None)
    return parser


def strip_settings_flags(argv):
    """Drop all-caps --VAR=value / --VAR value flags; `settings` reads those."""
    kept = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        name = arg[2:].split("=", 1)[0] if arg.startswith("--") else ""
        if name and name.isupper():
            if "=" not in arg and i + 1 < len(argv) and not argv[i + 1].startswith("--"):
                i += 1
        else:
            kept.append(arg)
        i += 1
    return kept


def resolve_output_dir(flag, run_config):
    """--output-dir, then the document's output_dir, then settings OUTPUT_DIR."""
    if flag is not None:
        return Path(flag).resolve()
    if run_config.output_dir is not None:
        return Path(run_config.output_dir).resolve()
    return Path(config("OUTPUT_DIR"))


def _base_report(run_config):
    return {
        "command": run_config.command,
        "schema_version": SCHEMA_VERSION,
        "seed": run_config.seed,
        "_t0": time.perf_counter(),
    }


def _write_report(report, path):
    report["wall_clock_seconds"] = time.perf_counter() - report.pop("_t0")
    write_json_atomic(report, path)


def _sign_for(resolution, report, substeps=None):
    if resolution == "derived":
        report["resolved_sign_s"] = DERIVED_SIGN
        report["sign_source"] = "derived"
        return DERIVED_SIGN
    print("Resolving the sign of the first-order b^dagger coefficient...")
    outcome = convergence.resolve_sign(substeps=substeps)
    report.update(outcome.to_dict())
    report["sign_source"] = "oracle"
    return outcome.sign


def _residual_rows(label, n_total, delta, residuals):
    return [
        {
            "algebra": label,
            "n_total": n_total,
            "delta": delta,
            "check": key,
            "residual": r.residual,
            "tolerance": r.tolerance,
            "passed": r.passed,
        }
        for key, r in residuals.items()
    ]


########################################################################################
## Commands
########################################################################################


def cmd_algebra_check(run_config, output_dir, workers):
    block = run_config.block
    report = _base_report(run_config)
    report.update(resolved_sign_s=DERIVED_SIGN, sign_source="derived")
    rows = []

    print(f"Checking phonon algebra for N in {list(block.n_values)}...")
    report["gardiner"] = {}
    for n_total in block.n_values:
        algebra = gardiner.make_algebra(fock_core.build_sector(n_total), verify=False)
        residuals = gardiner.verify_algebra(algebra)
        report["gardiner"][f"N={n_total}"] = gardiner.report_to_dict(residuals)
        rows += _residual_rows("gardiner", n_total, None, residuals)

    report["dressed"] = {}
    for n_total, delta in block.dressed_pairs:
        algebra = dressed.make_dressed(fock_core.build_sector(n_total, delta), verify=False)
        residuals = dressed.verify_dressed(algebra)
        report["dressed"][f"N={n_total},Delta={delta}"] = gardiner.report_to_dict(residuals)
        rows += _residual_rows("dressed", n_total, delta, residuals)

    return _finish_residual_run("algebra_check", rows, report, output_dir)


def _dressed_sectors(block, seed):
    sectors = list(block.pairs)
    sectors += [
        (n, d) for n in range(1, block.exhaustive_max + 1) for d in range(1, block.exhaustive_max + 1)
    ]
    rng = np.random.default_rng(seed)
    drawn = rng.integers(1, block.random_max + 1, size=(block.random_pairs, 2))
    sectors += [(int(n), int(d)) for n, d in drawn]
    return list(dict.fromkeys(sectors))


def cmd_dressed_check(run_config, output_dir, workers):
    block = run_config.block
    freqs = block.frequencies
    report = _base_report(run_config)
    report.update(resolved_sign_s=DERIVED_SIGN, sign_source="derived")
    rows = []

    sectors = _dressed_sectors(block, run_config.seed)
    print(f"Checking dressed algebra on {len(sectors)} (N, Delta) sectors...")
    report["dressed"] = {}
    for n_total, delta in sectors:
        algebra = dressed.make_dressed(fock_core.build_sector(n_total, delta), verify=False)
        residuals = dressed.verify_dressed(algebra)
        params = dressed.DressedParams(
            n_total, delta, freqs.omega_e, freqs.g, freqs.omega_g, freqs.omega_0
        )
        scale = max(1.0, dressed.dressed_hamiltonian(params, algebra.sector).max_abs())
        residuals["hamiltonian_forms"] = gardiner.Residual(
            dressed.hamiltonian_form_residual(params, algebra), gardiner.EXACT_TOL * scale
        )
        report["dressed"][f"N={n_total},Delta={delta}"] = gardiner.report_to_dict(residuals)
        rows += _residual_rows("dressed", n_total, delta, residuals)

    dynamics_ok = True
    if block.dynamics is not None:
        dyn = block.dynamics
        print(f"Running dressed dynamics at N={dyn.n_total}, Delta={dyn.delta}...")
        params = dressed.DressedParams(
            dyn.n_total, dyn.delta, dyn.omega_e, dyn.g, dyn.omega_g, dyn.omega_0
        )
        result = dressed.dressed_first_order(
            params, dyn.time.values(), sign=DERIVED_SIGN, substeps=dyn.substeps
        )
        write_csv_atomic(
            result.table[dynamics.EVOLVE_COLUMNS], output_dir / "dressed_dynamics.csv"
        )
        report["dynamics"] = {
            "metrics": convergence.convergence_metrics(
                result.table, dyn.n_total, eta=params.eta_effective
            ),
            "validity": result.validity,
            "validity_warning": result.validity_warning,
            "omega_delta": params.omega_delta,
            "mu_d": params.mu_d,
        }
        dynamics_ok = report["dynamics"]["metrics"]["robertson_margin"] >= -1e-9

    code = _finish_residual_run("dressed_check", rows, report, output_dir)
    return code if dynamics_ok else EXIT_FAILURE


def _finish_residual_run(name, rows, report, output_dir):
    passed = all(row["passed"] for row in rows)
    report["passed"] = passed
    write_csv_atomic(pd.DataFrame(rows), output_dir / f"{name}_residuals.csv")
    _write_report(report, output_dir / f"{name}_report.json")
    failures = [f"{r['algebra']} N={r['n_total']} {r['check']}" for r in rows if not r["passed"]]
    for failure in failures:
        logger.error("residual above tolerance: %s", failure)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_evolve(run_config, output_dir, workers):
    block = run_config.block
    report = _base_report(run_config)
    sign = _sign_for(block.sign_resolution, report)

    params = dynamics.ModelParams(block.n_total, block.omega_e, block.pulse)
    print(f"Evolving N={block.n_total} over {block.time.n_points} grid points...")
    result = dynamics.simulate(
        params, block.time.values(), sign=sign, substeps=block.substeps, check_step=block.check_step
    )
    write_csv_atomic(result.table[dynamics.EVOLVE_COLUMNS], output_dir / "evolve.csv")

    report.update(
        metrics=convergence.convergence_metrics(result.table, block.n_total),
        validity=result.validity,
        validity_warning=result.validity_warning,
        substeps=block.substeps or dynamics.SUBSTEPS,
        step_halving_change=result.step_halving_change,
    )
    ok = report["metrics"]["robertson_margin"] >= -1e-9
    if result.step_halving_change is not None and result.step_halving_change >= STEP_HALVING_TOL:
        logger.error(
            "halving the step moved observables by %.3e; refine substeps",
            result.step_halving_change,
        )
        ok = False
    report["passed"] = ok
    _write_report(report, output_dir / "evolve_report.json")
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_sweep(run_config, output_dir, workers):
    block = run_config.block
    report = _base_report(run_config)
    sign = _sign_for(block.sign_resolution, report)

    print(f"Running sweep over N in {list(block.n_values)} with {workers} worker(s)...")
    table = convergence.sweep(
        block.n_values,
        block.omega_e,
        block.pulse,
        block.time.values(),
        sign=sign,
        workers=workers,
        substeps=block.substeps,
    )
    write_csv_atomic(table, output_dir / "sweep.csv")

    ratio_columns = [c for c in convergence.RATIO_COLUMNS.values() if c in table]
    report["ratios"] = {c: table[c].tolist() for c in ratio_columns}
    warned = table["validity_warning"].fillna(False).astype(bool) if "validity_warning" in table else []
    report["validity_warnings"] = table.loc[warned, "n_total"].tolist() if len(warned) else []
    report["failed_points"] = table.loc[table["failed"], "n_total"].tolist()
    report["passed"] = not report["failed_points"]
    _write_report(report, output_dir / "sweep_report.json")
    return EXIT_OK if report["passed"] else EXIT_FAILURE


def cmd_rabi(run_config, output_dir, workers):
    block = run_config.block
    report = _base_report(run_config)
    report.update(resolved_sign_s=DERIVED_SIGN, sign_source="derived")

    print(f"Comparing Rabi transfer at N={block.n_total}...")
    table = dynamics.rabi_comparison(
        block.g, block.omega_e, block.omega_f, block.n_total, block.time.values(), block.substeps
    )
    write_csv_atomic(table, output_dir / "rabi.csv")

    amplitude_gap = float((table["beta_sq_analytic"] - table["alpha_e_sq_numeric"]).abs().max())
    fock_gap = float((table["beta_sq_analytic"] - table["beta_sq_fock"]).abs().max())
    omega = dynamics.rabi_frequency(block.g, block.omega_e, block.omega_f)
    report.update(
        rabi_frequency=omega,
        peak_transfer_fraction=(block.g / omega) ** 2 if omega else 0.0,
        analytic_vs_amplitude=gardiner.Residual(amplitude_gap, RABI_AMPLITUDE_TOL).to_dict(),
        analytic_vs_fock=fock_gap,
    )
    report["passed"] = report["analytic_vs_amplitude"]["passed"]
    _write_report(report, output_dir / "rabi_report.json")
    return EXIT_OK if report["passed"] else EXIT_FAILURE


COMMANDS = {
    "algebra-check": cmd_algebra_check,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "dressed-check": cmd_dressed_check,
    "rabi": cmd_rabi,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(strip_settings_flags(argv))
    logging.basicConfig(
        level=str(config("LOG_LEVEL")).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    started = time.perf_counter()
    try:
        run_config = load_config(args.config)
        if run_config.command != args.command:
            raise ConfigError(
                "command", f"document is for '{run_config.command}', not '{args.command}'"
            )
        output_dir = resolve_output_dir(args.output_dir, run_config)
        output_dir.mkdir(parents=True, exist_ok=True)
        workers = args.workers or config("WORKERS", cast=int)
        code = COMMANDS[args.command](run_config, output_dir, workers)
    except ConfigError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except (gardiner.AlgebraIdentityError, dynamics.NormDriftError) as e:
        logger.error("%s", e)
        return EXIT_FAILURE
    except Exception:
        logger.exception("run failed")
        return EXIT_FAILURE

    elapsed = time.perf_counter() - started
    print(f"{args.command} finished in {elapsed:.1f}s with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
