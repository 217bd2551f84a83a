"""
Doit build file for the q-deformed phonon output-coupling simulator.

Run with: doit
"""

from os import environ, getcwd, path
import sys

sys.path.insert(1, "./src/")

from colorama import Fore, Style, init
from doit.reporter import ConsoleReporter
from settings import config


try:
    in_slurm = environ["SLURM_JOB_ID"] is not None
except KeyError:
    in_slurm = False


class GreenReporter(ConsoleReporter):
    def write(self, stuff, **kwargs):
        doit_mark = stuff.split(" ")[0].ljust(2)
        task = " ".join(stuff.split(" ")[1:]).strip() + "\n"
        output = (
            Fore.GREEN
            + doit_mark
            + f" {path.basename(getcwd())}: "
            + task
            + Style.RESET_ALL
        )
        self.outstream.write(output)


if not in_slurm:
    DOIT_CONFIG = {
        "reporter": GreenReporter,
        "backend": "sqlite3",
        "dep_file": "./.doit-db.sqlite",
    }
else:
    DOIT_CONFIG = {"backend": "sqlite3", "dep_file": "./.doit-db.sqlite"}
init(autoreset=True)


BASE_DIR = config("BASE_DIR")
OUTPUT_DIR = config("OUTPUT_DIR")
CONFIG_DIR = config("CONFIG_DIR")

SOURCES = [
    BASE_DIR / "src" / name
    for name in (
        "fock_core.py",
        "gardiner.py",
        "dynamics.py",
        "convergence.py",
        "dressed.py",
        "run_config.py",
        "misc_tools.py",
        "qphonon.py",
    )
]


def task_config():
    """Create the output directory if it doesn't exist"""
    return {
        "actions": ["python ./src/settings.py"],
        "targets": [OUTPUT_DIR],
        "file_dep": ["./src/settings.py"],
        "clean": [],
    }


# command -> (config file, files written)
runs = {
    "algebra-check": (
        "algebra_check.json",
        ["algebra_check_residuals.csv", "algebra_check_report.json"],
    ),
    "dressed-check": (
        "dressed_check.json",
        ["dressed_check_residuals.csv", "dressed_check_report.json", "dressed_dynamics.csv"],
    ),
    "evolve": ("evolve.json", ["evolve.csv", "evolve_report.json"]),
    "sweep": ("sweep.json", ["sweep.csv", "sweep_report.json"]),
    "rabi": ("rabi.json", ["rabi.csv", "rabi_report.json"]),
}


def _run_task(command):
    config_file, outputs = runs[command]
    return {
        "actions": [
            f"python ./src/qphonon.py {command} --config {CONFIG_DIR / config_file} "
            f"--output-dir {OUTPUT_DIR}"
        ],
        "file_dep": [CONFIG_DIR / config_file, *SOURCES],
        "targets": [OUTPUT_DIR / name for name in outputs],
        "task_dep": ["config"],
        "verbosity": 2,
        "clean": True,
    }


def task_algebra_check():
    """Check the phonon and dressed-phonon algebra identities."""
    return _run_task("algebra-check")


def task_dressed_check():
    """Check the dressed algebra on many sectors and run a dressed evolution."""
    return _run_task("dressed-check")


def task_evolve():
    """Exact versus first-order evolution of the reference pulse."""
    return _run_task("evolve")


def task_sweep():
    """Convergence orders of the first-order solution over N."""
    return _run_task("sweep")


def task_rabi():
    """Two-mode Rabi cross-check of the exact evolution."""
    return _run_task("rabi")


def task_test():
    """Run the test suite, doctests included."""
    return {
        "actions": ["pytest --doctest-modules src"],
        "file_dep": SOURCES + [BASE_DIR / "src" / "settings.py"],
        "verbosity": 2,
        "uptodate": [False],
    }
