"""
Time evolution of the output coupler.

The exact path evolves the trapped vacuum |N;0> under

    H(t) = omega_e N_e + g(t) b_e^dagger b_g + g(t)^* b_g^dagger b_e,
    g(t) = mu(t) / sqrt(N),

on the fixed-N sector and measures fixed operators in the evolving state.
The perturbative path integrates the first-order-in-eta Heisenberg solution

    b(t) = e^{-i omega_e t} b + beta + eta (xi b + c b^dagger - 2 beta b^dagger b + alpha)

with the running integrals beta, alpha, xi and c = s beta^2 e^{i omega_e t}.
Comparing the two is the point of the package: see `convergence.py`.

All frequencies are angular, hbar = 1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_simpson
from scipy.linalg import eigh, eigh_tridiagonal

import fock_core
from fock_core import SectorMismatchError, StateVector
from gardiner import AlgebraIdentityError, make_algebra
from settings import config

logger = logging.getLogger(__name__)

SUBSTEPS = config("SUBSTEPS", cast=int)
QUADRATURE_REFINEMENT = config("QUADRATURE_REFINEMENT", cast=int)

NORM_DRIFT_TOL = 1e-8
CONSERVATION_TOL = 1e-10
VALIDITY_THRESHOLD = 0.25

# Fourth-order commutator-free Magnus step: two Gauss-Legendre samples,
# two exponentials. Exact for a constant Hamiltonian.
_GL_NODES = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)
_CFM_A1 = (3 - 2 * math.sqrt(3)) / 12
_CFM_A2 = (3 + 2 * math.sqrt(3)) / 12

EVOLVE_COLUMNS = [
    "t",
    "re_beta",
    "im_beta",
    "mean_ne_exact",
    "mean_ne_order0",
    "mean_ne_order1",
    "var_x1_exact",
    "var_x2_exact",
    "var_x1_pert",
    "var_x2_pert",
    "product_exact",
    "product_pert",
    "re_comm_x1x2",
    "im_comm_x1x2",
]


class NormDriftError(RuntimeError):
    """The propagated state lost unitarity beyond tolerance."""


########################################################################################
## Parameters
########################################################################################

PULSE_KINDS = ("constant", "monochromatic", "gaussian")


@dataclass(frozen=True)
class PulseProfile:
    """Effective coupling mu(t) = amplitude * e^{-i omega_f t} * envelope(t).

    The envelope is 1 for "constant" and "monochromatic" pulses and
    exp(-(t - center)^2 / (2 width^2)) for "gaussian" ones. A constant pulse
    has omega_f = 0.

    >>> pulse = PulseProfile.constant(0.5)
    >>> complex(pulse(2.0))
    (0.5+0j)
    """

    kind: str
    amplitude: complex
    omega_f: float = 0.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ValueError(f"Unknown pulse kind '{self.kind}'. Expected one of {PULSE_KINDS}")
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if not np.isfinite(self.amplitude):
            raise ValueError(f"pulse amplitude must be finite, got {self.amplitude}")
        if self.kind == "constant" and self.omega_f != 0.0:
            raise ValueError("a constant pulse has omega_f = 0")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError(f"gaussian width must be > 0, got {self.width}")

    @classmethod
    def constant(cls, amplitude):
        return cls("constant", amplitude)

    @classmethod
    def monochromatic(cls, amplitude, omega_f):
        return cls("monochromatic", amplitude, omega_f=float(omega_f))

    @classmethod
    def gaussian(cls, amplitude, omega_f, center, width):
        return cls("gaussian", amplitude, float(omega_f), float(center), float(width))

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-((t - self.center) ** 2) / (2.0 * self.width**2))
        return np.ones_like(t)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.exp(-1j * self.omega_f * t) * self.envelope(t)

    def to_dict(self):
        data = {"kind": self.kind, "amplitude": [self.amplitude.real, self.amplitude.imag]}
        if self.kind != "constant":
            data["omega_f"] = self.omega_f
        if self.kind == "gaussian":
            data.update(center=self.center, width=self.width)
        return data


@dataclass(frozen=True)
class ModelParams:
    n_total: int
    omega_e: float
    pulse: PulseProfile

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")

    @property
    def eta(self):
        return 1.0 / self.n_total

    def coupling(self, t):
        """Single-atom coupling g(t) = mu(t) / sqrt(N)."""
        return self.pulse(t) / math.sqrt(self.n_total)


########################################################################################
## Hamiltonians
########################################################################################


@dataclass(frozen=True, eq=False)
class DrivenHamiltonian:
    """H(t) = static + drive(t) raise_op + drive(t)^* raise_op^dagger.

    When `static` is diagonal and `raise_op` only feeds the next basis state
    (the case for every model here), exponentials use the tridiagonal path.
    """

    static: fock_core.OperatorMatrix
    raise_op: fock_core.OperatorMatrix
    drive: Callable = field(repr=False)

    def __post_init__(self):
        fock_core._check_same_sector(self.static.sector, self.raise_op.sector)
        if not self.static.is_hermitian():
            raise fock_core.NonHermitianError("static part of a Hamiltonian must be Hermitian")

    @property
    def sector(self):
        return self.static.sector

    @property
    def is_tridiagonal(self):
        static = self.static.entries
        raise_ = self.raise_op.entries
        off_static = static - np.diag(np.diagonal(static))
        off_raise = raise_ - np.diag(np.diagonal(raise_, offset=-1), k=-1)
        return not (np.any(off_static) or np.any(off_raise))

    def at(self, t):
        mu = complex(self.drive(t))
        return (
            self.static
            + mu * self.raise_op
            + mu.conjugate() * fock_core.adjoint(self.raise_op)
        )


def _check_model_sector(params, sector):
    if sector.is_dressed or sector.n_total != params.n_total:
        raise SectorMismatchError(
            f"model with N={params.n_total} needs the 2-mode N={params.n_total} sector, got {sector}"
        )


def bare_hamiltonian(params, sector):
    """omega_e N_e + g(t) b_e^dagger b_g + h.c., from mode-transfer products."""
    _check_model_sector(params, sector)
    return DrivenHamiltonian(
        static=params.omega_e * fock_core.number_operator(sector, "excited"),
        raise_op=fock_core.transfer_operator(sector, "raise_excited"),
        drive=params.coupling,
    )


def phonon_hamiltonian(params, algebra):
    """omega_e N_e + mu(t) b^dagger + mu(t)^* b, from the phonon pair."""
    _check_model_sector(params, algebra.sector)
    return DrivenHamiltonian(
        static=params.omega_e * algebra.number,
        raise_op=algebra.b_raise,
        drive=params.pulse,
    )


def hamiltonian_at(t, params, sector):
    return bare_hamiltonian(params, sector).at(t)


def hamiltonian_q_form(t, params, algebra):
    return phonon_hamiltonian(params, algebra).at(t)


########################################################################################
## Propagation
########################################################################################


def _exp_tridiagonal(diag, sub, psi):
    """exp(-i K) psi for Hermitian tridiagonal K with real `diag` and complex `sub`."""
    if diag.size == 1:
        return np.exp(-1j * diag[0]) * psi
    # phase gauge U with U^dagger K U real symmetric
    gauge = np.exp(1j * np.concatenate(([0.0], np.cumsum(np.angle(sub)))))
    evals, evecs = eigh_tridiagonal(diag, np.abs(sub))
    rotated = evecs.T @ (gauge.conj() * psi)
    return gauge * (evecs @ (np.exp(-1j * evals) * rotated))


def _exp_dense(matrix, psi):
    evals, evecs = eigh(matrix)
    return evecs @ (np.exp(-1j * evals) * (evecs.conj().T @ psi))


def _check_grid(grid, start_at_zero=True):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("time grid must be a non-empty 1-D array")
    if start_at_zero and grid[0] != 0.0:
        raise ValueError(f"time grid must start at 0, starts at {grid[0]}")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly ascending")
    return grid


def propagate(initial, hamiltonian, grid, substeps=None):
    """Time-ordered evolution of `initial` sampled at every grid time.

    Each output interval is split into `substeps` equal steps of the
    fourth-order commutator-free Magnus scheme. Raises `NormDriftError` if the
    norm drifts by more than 1e-8.
    """
    substeps = SUBSTEPS if substeps is None else int(substeps)
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    fock_core._check_same_sector(initial.sector, hamiltonian.sector)
    grid = _check_grid(grid, start_at_zero=False)

    tridiagonal = hamiltonian.is_tridiagonal
    static_diag = hamiltonian.static.diagonal.real
    raise_sub = np.diagonal(hamiltonian.raise_op.entries, offset=-1)
    static_dense = hamiltonian.static.entries
    raise_dense = hamiltonian.raise_op.entries

    psi = initial.amplitudes.copy()
    states = [initial]
    for t_start, t_end in zip(grid[:-1], grid[1:]):
        h = (t_end - t_start) / substeps
        for j in range(substeps):
            t = t_start + j * h
            mu1 = complex(hamiltonian.drive(t + _GL_NODES[0] * h))
            mu2 = complex(hamiltonian.drive(t + _GL_NODES[1] * h))
            # right factor acts first
            for weight in (_CFM_A2 * mu1 + _CFM_A1 * mu2, _CFM_A1 * mu1 + _CFM_A2 * mu2):
                if tridiagonal:
                    psi = _exp_tridiagonal(0.5 * h * static_diag, h * weight * raise_sub, psi)
                else:
                    generator = 0.5 * h * static_dense + h * (
                        weight * raise_dense + np.conj(weight) * raise_dense.conj().T
                    )
                    psi = _exp_dense(generator, psi)
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > NORM_DRIFT_TOL:
            raise NormDriftError(
                f"norm drifted by {drift:.3e} at t={t_end:.6g} with step {h:.3e}; "
                f"increase substeps (currently {substeps}) or refine the grid"
            )
        states.append(StateVector(initial.sector, psi))
    return states


def evolve(initial, params, time_grid, substeps=None):
    """Exact trajectory |psi(t_k)> of `initial` under `hamiltonian_at`."""
    time_grid = _check_grid(time_grid)
    if not initial.is_normalized():
        raise ValueError(f"initial state must be normalized, norm is {initial.norm()}")
    return propagate(initial, bare_hamiltonian(params, initial.sector), time_grid, substeps)


########################################################################################
## Perturbative solution
########################################################################################


def _refine(grid, refinement):
    if refinement < 2 or refinement % 2:
        raise ValueError(f"quadrature refinement must be an even number >= 2, got {refinement}")
    coarse_index = np.arange(grid.size)
    fine_index = np.arange((grid.size - 1) * refinement + 1) / refinement
    return np.interp(fine_index, coarse_index, grid)


def _from_zero(grid):
    """Extend `grid` back to t = 0 with its first spacing; returns (grid, lead).

    `lead` is the number of prepended points to drop from the result.
    """
    if grid[0] < 0:
        raise ValueError(f"time grid must not start before 0, starts at {grid[0]}")
    if grid[0] == 0.0:
        return grid, 0
    step = grid[1] - grid[0] if grid.size > 1 else grid[0]
    lead = max(1, math.ceil(grid[0] / step - 1e-9))
    return np.concatenate((np.linspace(0.0, grid[0], lead + 1)[:-1], grid)), lead


def _running_integral(values, fine_grid):
    real = cumulative_simpson(values.real, x=fine_grid, initial=0)
    imag = cumulative_simpson(values.imag, x=fine_grid, initial=0)
    return real + 1j * imag


def _fine_beta(omega, pulse, fine_grid):
    phase = np.exp(1j * omega * fine_grid)
    return -1j * _running_integral(phase * pulse(fine_grid), fine_grid) / phase


def beta(params, time_grid, refinement=None):
    """beta(t) = -i int_0^t e^{-i omega_e (t - t')} mu(t') dt' on `time_grid`.

    Composite Simpson on a grid refined `refinement` times per interval. A
    grid starting after 0 is integrated from 0 all the same.
    """
    refinement = QUADRATURE_REFINEMENT if refinement is None else int(refinement)
    grid, lead = _from_zero(_check_grid(time_grid, start_at_zero=False))
    if grid.size == 1:
        return np.zeros(1, dtype=complex)
    fine = _refine(grid, refinement)
    return _fine_beta(params.omega_e, params.pulse, fine)[::refinement][lead:]


@dataclass(frozen=True, eq=False)
class PerturbativeSolution:
    time_grid: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    xi: np.ndarray
    b1_raise_coeff: np.ndarray
    b1_number_coeff: np.ndarray
    omega_e: float
    sign: int

    def __post_init__(self):
        for name in ("time_grid", "beta", "alpha", "xi", "b1_raise_coeff", "b1_number_coeff"):
            values = np.array(getattr(self, name))
            if values.shape != np.shape(self.time_grid):
                raise ValueError(f"{name} is not on the solution time grid")
            values.setflags(write=False)
            object.__setattr__(self, name, values)


def perturbative_solution(params, time_grid, sign=-1, refinement=None):
    """First-order coefficients of the phonon operator, on `time_grid`.

    alpha(t) = 2i int_0^t e^{-i omega (t - t')} mu(t') |beta(t')|^2 dt'
    xi(t)    = 2i e^{-i omega t} int_0^t mu(t') beta(t')^* dt'
    c(t)     = sign * beta(t)^2 e^{i omega t}   (coefficient of b^dagger)
    and -2 beta(t) multiplies b^dagger b.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    refinement = QUADRATURE_REFINEMENT if refinement is None else int(refinement)
    grid = _check_grid(time_grid, start_at_zero=False)
    omega = params.omega_e
    full, lead = _from_zero(grid)

    if full.size == 1:
        zero = np.zeros(1, dtype=complex)
        return PerturbativeSolution(grid, zero, zero, zero, zero, zero, omega, sign)

    fine = _refine(full, refinement)
    mu = params.pulse(fine)
    phase = np.exp(1j * omega * fine)
    beta_fine = _fine_beta(omega, params.pulse, fine)
    alpha_fine = 2j * _running_integral(phase * mu * np.abs(beta_fine) ** 2, fine) / phase
    xi_fine = 2j * _running_integral(mu * beta_fine.conj(), fine) / phase

    beta_t = beta_fine[::refinement][lead:]
    return PerturbativeSolution(
        time_grid=grid,
        beta=beta_t,
        alpha=alpha_fine[::refinement][lead:],
        xi=xi_fine[::refinement][lead:],
        b1_raise_coeff=sign * beta_t**2 * np.exp(1j * omega * grid),
        b1_number_coeff=-2.0 * beta_t,
        omega_e=omega,
        sign=sign,
    )


########################################################################################
## Observables
########################################################################################


def quadrature_operators(algebra):
    """X1 = (b + b^dagger)/sqrt(2), X2 = (b - b^dagger)/(i sqrt(2))."""
    root2 = math.sqrt(2.0)
    x1 = (algebra.b_lower + algebra.b_raise) * (1.0 / root2)
    x2 = (algebra.b_lower - algebra.b_raise) * (-1j / root2)
    return x1, x2


def _conserved_totals(sector):
    """(occupation sum per basis state, conserved value) pairs of the sector."""
    totals = [(sector.occupations("excited") + sector.occupations("ground"), sector.n_total)]
    if sector.is_dressed:
        totals.append((sector.occupations("photon") + sector.occupations("excited"), sector.delta))
    return totals


def observables_exact(trajectory, algebra, time_grid):
    """Exact moments of the phonon quadratures along a trajectory.

    Works for any algebra exposing `b_lower`, `b_raise`, `number` and
    `commutator_identity()`. Checks once that [X1, X2] = i [b, b^dagger]
    matches the closed form, and at every time that the conserved totals
    hold.
    """
    sector = algebra.sector
    grid = np.asarray(time_grid, dtype=float)
    if len(trajectory) != grid.size:
        raise ValueError(f"{len(trajectory)} states for {grid.size} grid times")
    for state in trajectory:
        fock_core._check_same_sector(state.sector, sector)

    x1, x2 = quadrature_operators(algebra)
    comm = fock_core.commutator(x1, x2)
    identity_residual = fock_core.max_entry_residual(comm, 1j * algebra.commutator_identity())
    if identity_residual > 1e-12 * max(1.0, comm.max_abs()):
        raise AlgebraIdentityError(f"[X1, X2] misses i[b, b^dagger] by {identity_residual:.3e}")

    psi = np.stack([state.amplitudes for state in trajectory])
    probs = np.abs(psi) ** 2
    for occupation_sum, conserved in _conserved_totals(sector):
        drift = np.max(np.abs(probs @ occupation_sum - conserved))
        if drift > CONSERVATION_TOL * max(1, conserved):
            raise AlgebraIdentityError(f"conserved total {conserved} drifted by {drift:.3e}")

    bdb = fock_core.multiply(algebra.b_raise, algebra.b_lower)
    var_x1 = np.array([fock_core.variance(state, x1) for state in trajectory])
    var_x2 = np.array([fock_core.variance(state, x2) for state in trajectory])
    comm_expect = np.array([fock_core.expectation(state, comm) for state in trajectory])

    return pd.DataFrame(
        {
            "t": grid,
            "mean_ne_exact": probs @ algebra.number.diagonal.real,
            "mean_bdb_exact": np.array(
                [fock_core.expectation(state, bdb).real for state in trajectory]
            ),
            "var_x1_exact": var_x1,
            "var_x2_exact": var_x2,
            "product_exact": var_x1 * var_x2,
            "re_comm_x1x2": comm_expect.real,
            "im_comm_x1x2": comm_expect.imag,
            "robertson_bound": 0.25 * np.abs(comm_expect) ** 2,
        }
    )


def printed_quadrature_variances(beta_values, eta):
    """Variances in the literal closed form 1/2 - eta(|beta|^2 +- (beta^2 + beta*^2)).

    Kept for comparison; the doubled beta^2 term makes these drift from the
    exact values at first order in eta.

    >>> v1, v2 = printed_quadrature_variances(np.array([1.0]), 0.01)
    >>> round(float(v1[0]), 12), round(float(v2[0]), 12)
    (0.47, 0.51)
    """
    beta_values = np.asarray(beta_values, dtype=complex)
    mod2 = np.abs(beta_values) ** 2
    two_re = 2.0 * (beta_values**2).real
    return 0.5 - eta * (mod2 + two_re), 0.5 - eta * (mod2 - two_re)


def uncertainty_product_first_order(beta_values, eta):
    """1/4 - eta |beta|^2"""
    return 0.25 - eta * np.abs(np.asarray(beta_values)) ** 2


def mean_excited_first_order(solution, eta):
    b, a = solution.beta, solution.alpha
    return np.abs(b) ** 2 + eta * (np.abs(b) ** 4 + 2.0 * (b * a.conj()).real)


def observables_perturbative(solution, eta):
    """Zeroth and first order predictions in the evolving vacuum."""
    grid = solution.time_grid
    rotation = np.exp(1j * solution.omega_e * grid)
    xi_term = (solution.xi * rotation).real
    raise_term = (solution.b1_raise_coeff / rotation).real
    var_x1 = 0.5 + eta * (xi_term + raise_term)
    var_x2 = 0.5 + eta * (xi_term - raise_term)
    return pd.DataFrame(
        {
            "t": grid,
            "re_beta": solution.beta.real,
            "im_beta": solution.beta.imag,
            "mean_ne_order0": np.abs(solution.beta) ** 2,
            "mean_ne_order1": mean_excited_first_order(solution, eta),
            "var_x1_pert": var_x1,
            "var_x2_pert": var_x2,
            "product_pert": uncertainty_product_first_order(solution.beta, eta),
            "product_pert_truncated": 0.25 + 0.5 * eta * (2.0 * xi_term),
        }
    )


def validity_indicator(solution, eta):
    """max_t eta |beta(t)|^2; first-order results are unreliable above 0.25."""
    if solution.beta.size == 0:
        return 0.0
    return float(eta * np.max(np.abs(solution.beta) ** 2))


########################################################################################
## Full runs
########################################################################################


@dataclass(frozen=True, eq=False)
class SimulationResult:
    table: pd.DataFrame
    solution: PerturbativeSolution
    validity: float
    step_halving_change: float | None = None

    @property
    def validity_warning(self):
        return self.validity > VALIDITY_THRESHOLD


def merge_observables(exact, perturbative):
    table = perturbative.merge(exact, on="t", how="inner", validate="one_to_one")
    if len(table) != len(exact):
        raise RuntimeError("exact and perturbative observables are on different grids")
    extra = [c for c in table.columns if c not in EVOLVE_COLUMNS]
    return table[EVOLVE_COLUMNS + extra]


def trapped_vacuum(sector):
    """|N;0>, every atom in the trapped mode."""
    return fock_core.basis_state(sector, 0)


def step_halving_diagnostic(params, time_grid, substeps=None, algebra=None):
    """Largest change of any exact observable when the sub-step is halved."""
    substeps = SUBSTEPS if substeps is None else int(substeps)
    algebra = algebra or make_algebra(fock_core.build_sector(params.n_total))
    start = trapped_vacuum(algebra.sector)
    coarse = observables_exact(evolve(start, params, time_grid, substeps), algebra, time_grid)
    fine = observables_exact(evolve(start, params, time_grid, 2 * substeps), algebra, time_grid)
    columns = [c for c in coarse.columns if c != "t"]
    return float(np.max(np.abs(coarse[columns].to_numpy() - fine[columns].to_numpy())))


def simulate(params, time_grid, sign=-1, substeps=None, refinement=None, check_step=False):
    """Exact and first-order observables of one output-coupling run."""
    algebra = make_algebra(fock_core.build_sector(params.n_total))
    trajectory = evolve(trapped_vacuum(algebra.sector), params, time_grid, substeps)
    exact = observables_exact(trajectory, algebra, time_grid)

    solution = perturbative_solution(params, time_grid, sign=sign, refinement=refinement)
    table = merge_observables(exact, observables_perturbative(solution, params.eta))

    validity = validity_indicator(solution, params.eta)
    if validity > VALIDITY_THRESHOLD:
        logger.warning(
            "eta*max|beta|^2 = %.3f exceeds %.2f at N=%d; first-order columns are unreliable",
            validity,
            VALIDITY_THRESHOLD,
            params.n_total,
        )
    change = step_halving_diagnostic(params, time_grid, substeps, algebra) if check_step else None
    return SimulationResult(table, solution, validity, change)


########################################################################################
## Two-mode Rabi cross-check
########################################################################################


def rabi_frequency(g, omega_e, omega_f):
    return math.sqrt((omega_e - omega_f) ** 2 / 4.0 + g**2)


def rabi_reference(g, omega_e, omega_f, n_total, time_grid):
    """|beta(t)|^2 = N (g/Omega)^2 sin^2(Omega t) for a monochromatic drive."""
    t = np.asarray(time_grid, dtype=float)
    if g == 0:
        return np.zeros_like(t)
    omega = rabi_frequency(g, omega_e, omega_f)
    return n_total * (g / omega) ** 2 * np.sin(omega * t) ** 2


def mode_amplitude_evolution(alpha_g0, alpha_e0, g, omega_e, omega_f, time_grid):
    """Coherent amplitudes of the trapped and output modes under a monochromatic drive.

    Solves i d/dt (a_g, a_e) = [[0, g e^{i omega_f t}], [g e^{-i omega_f t}, omega_e]] (a_g, a_e)
    exactly in the frame rotating at omega_f.

    Returns:
        (alpha_g, alpha_e): complex arrays on `time_grid`
    """
    t = np.asarray(time_grid, dtype=float)
    rotating = np.array([[0.0, g], [g, omega_e - omega_f]])
    evals, evecs = np.linalg.eigh(rotating)
    start = evecs.T @ np.array([alpha_g0, alpha_e0], dtype=complex)
    amplitudes = evecs @ (np.exp(-1j * np.outer(evals, t)) * start[:, None])
    return amplitudes[0], amplitudes[1] * np.exp(-1j * omega_f * t)


def rabi_comparison(g, omega_e, omega_f, n_total, time_grid, substeps=None):
    """Analytic, 2x2 amplitude and exact Fock populations of the output mode."""
    t = _check_grid(time_grid)
    _, alpha_e = mode_amplitude_evolution(math.sqrt(n_total), 0.0, g, omega_e, omega_f, t)
    params = ModelParams(
        n_total=n_total,
        omega_e=omega_e,
        pulse=PulseProfile.monochromatic(g * math.sqrt(n_total), omega_f),
    )
    sector = fock_core.build_sector(n_total)
    trajectory = evolve(trapped_vacuum(sector), params, t, substeps)
    excited = sector.occupations("excited")
    return pd.DataFrame(
        {
            "t": t,
            "beta_sq_analytic": rabi_reference(g, omega_e, omega_f, n_total, t),
            "alpha_e_sq_numeric": np.abs(alpha_e) ** 2,
            "beta_sq_fock": np.array([np.abs(s.amplitudes) ** 2 @ excited for s in trajectory]),
        }
    )
