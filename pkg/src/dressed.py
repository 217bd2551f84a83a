"""
Dressed phonons: the output coupler with a quantized r.f. mode.

On the three-mode sector with N atoms and Delta = n_0 + n_e the dressed
phonon B = a^dagger b_g^dagger b_e / sqrt(N Delta) satisfies, exactly,

    [B, B^dagger] = I - 2(eta + eta0) N_e + eta eta0 (3 N_e^2 - N_e)

with eta = 1/N and eta0 = 1/Delta. To first order this is the phonon algebra
with eta replaced by eta + eta0, so the dressed dynamics reuse the
perturbative machinery of `dynamics` with omega_e -> omega_delta and
mu -> mu_d.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

import dynamics
import fock_core
from fock_core import FockSector, OperatorMatrix, SectorMismatchError
from gardiner import EXACT_TOL, AlgebraIdentityError, Residual

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DressedAlgebra:
    sector: FockSector
    b_lower: OperatorMatrix
    b_raise: OperatorMatrix

    @property
    def eta(self):
        return 1.0 / self.sector.n_total

    @property
    def eta0(self):
        return 1.0 / self.sector.delta

    @property
    def eta_effective(self):
        return self.eta + self.eta0

    @property
    def q_d(self):
        return 1.0 - 2.0 * self.eta_effective

    @cached_property
    def number(self):
        return fock_core.number_operator(self.sector, "excited")

    def commutator_identity(self):
        """Closed form of [B, B^dagger] on the sector."""
        n = self.sector.occupations("excited")
        values = 1.0 - 2.0 * self.eta_effective * n + self.eta * self.eta0 * (3.0 * n**2 - n)
        return fock_core.diagonal_operator(self.sector, values)


def make_dressed(sector, verify=True):
    if not sector.is_dressed:
        raise ValueError("dressed phonons need a 3-mode sector; pass delta to build_sector")
    if sector.n_total < 1 or sector.delta < 1:
        raise ValueError(
            f"the 1/sqrt(N Delta) normalization needs N >= 1 and Delta >= 1, "
            f"got N={sector.n_total}, Delta={sector.delta}"
        )
    norm = 1.0 / math.sqrt(sector.n_total * sector.delta)
    algebra = DressedAlgebra(
        sector=sector,
        b_lower=fock_core.transfer_operator(sector, "dressed_lower") * norm,
        b_raise=fock_core.transfer_operator(sector, "dressed_raise") * norm,
    )
    if not verify:
        return algebra
    failed = {k: r for k, r in verify_dressed(algebra).items() if not r.passed}
    if failed:
        raise AlgebraIdentityError(
            f"dressed algebra at (N={sector.n_total}, Delta={sector.delta}) failed: "
            + ", ".join(f"{k}={r.residual:.3e}" for k, r in failed.items())
        )
    return algebra


def verify_dressed(algebra):
    """Residuals of the dressed identities, key -> `Residual`."""
    sector = algebra.sector
    b, bd = algebra.b_lower, algebra.b_raise
    n = sector.occupations("excited")
    comm = fock_core.commutator(b, bd)
    first_order = 1.0 - 2.0 * algebra.eta_effective * n
    second_order = algebra.eta * algebra.eta0 * n * (3.0 * n - 1.0)
    top = fock_core.basis_state(sector, sector.max_excited)
    return {
        "adjoint_pair": Residual(fock_core.max_entry_residual(bd, fock_core.adjoint(b)), EXACT_TOL),
        "exact_commutator": Residual(
            fock_core.max_entry_residual(comm, algebra.commutator_identity()), EXACT_TOL
        ),
        "first_order_deviation": Residual(
            float(np.max(np.abs(np.abs(comm.diagonal.real - first_order) - second_order))),
            EXACT_TOL,
        ),
        "vacuum_annihilation": Residual(
            fock_core.apply(b, dressed_vacuum(sector)).norm(), EXACT_TOL
        ),
        "top_annihilation": Residual(fock_core.apply(bd, top).norm(), EXACT_TOL),
    }


@dataclass(frozen=True)
class DressedParams:
    n_total: int
    delta: int
    omega_e: float
    g: float
    omega_g: float = 0.0
    omega_0: float = 0.0

    def __post_init__(self):
        if self.n_total < 1 or self.delta < 1:
            raise ValueError(f"need N >= 1 and Delta >= 1, got ({self.n_total}, {self.delta})")
        if isinstance(self.g, complex):
            raise ValueError("the dressed coupling g must be real")

    @classmethod
    def with_mu_d(cls, n_total, delta, omega_e, mu_d, omega_g=0.0, omega_0=0.0):
        """Parameters whose effective drive g sqrt(N Delta) equals `mu_d`."""
        return cls(n_total, delta, omega_e, mu_d / math.sqrt(n_total * delta), omega_g, omega_0)

    @property
    def omega_delta(self):
        return self.omega_e - self.omega_g - self.omega_0

    @property
    def mu_d(self):
        return self.g * math.sqrt(self.n_total * self.delta)

    @property
    def eta_effective(self):
        return 1.0 / self.n_total + 1.0 / self.delta

    def sector(self):
        return fock_core.build_sector(self.n_total, self.delta)


def _check_dressed_sector(params, sector):
    if sector != params.sector():
        raise SectorMismatchError(f"params need sector {params.sector()}, got {sector}")


def _driven_dressed(params, sector):
    _check_dressed_sector(params, sector)
    static = (
        params.omega_e * fock_core.number_operator(sector, "excited")
        + params.omega_g * fock_core.number_operator(sector, "ground")
        + params.omega_0 * fock_core.number_operator(sector, "photon")
    )
    g = float(params.g)
    return dynamics.DrivenHamiltonian(
        static=static,
        raise_op=fock_core.transfer_operator(sector, "dressed_raise"),
        drive=lambda t: g,
    )


def dressed_hamiltonian(params, sector):
    """omega_e N_e + omega_g N_g + omega_0 N_0 + g(a^dagger b_g^dagger b_e + a b_g b_e^dagger)."""
    return _driven_dressed(params, sector).at(0.0)


def dressed_hamiltonian_phonon_form(params, algebra):
    """omega_g N + omega_0 Delta + omega_delta N_e + mu_d (B + B^dagger)."""
    sector = algebra.sector
    _check_dressed_sector(params, sector)
    shift = params.omega_g * sector.n_total + params.omega_0 * sector.delta
    return (
        shift * fock_core.identity(sector)
        + params.omega_delta * algebra.number
        + params.mu_d * (algebra.b_lower + algebra.b_raise)
    )


def hamiltonian_form_residual(params, algebra):
    return fock_core.max_entry_residual(
        dressed_hamiltonian(params, algebra.sector),
        dressed_hamiltonian_phonon_form(params, algebra),
    )


def dressed_vacuum(sector):
    """|n_0 = Delta, n_e = 0, n_g = N>: every photon present, every atom trapped."""
    return fock_core.basis_state(sector, 0)


def dressed_first_order(params, time_grid, sign=-1, substeps=None, refinement=None):
    """Exact and first-order dressed observables under a constant coupling.

    The exact columns come from evolution on the (N, Delta) sector; the
    perturbative ones from `dynamics` with (omega_e, mu, eta) replaced by
    (omega_delta, mu_d, eta + eta0).
    """
    sector = params.sector()
    algebra = make_dressed(sector)
    grid = dynamics._check_grid(time_grid)
    trajectory = dynamics.propagate(
        dressed_vacuum(sector), _driven_dressed(params, sector), grid, substeps
    )
    exact = dynamics.observables_exact(trajectory, algebra, grid)

    substituted = dynamics.ModelParams(
        n_total=params.n_total,
        omega_e=params.omega_delta,
        pulse=dynamics.PulseProfile.constant(params.mu_d),
    )
    solution = dynamics.perturbative_solution(substituted, grid, sign=sign, refinement=refinement)
    eta = algebra.eta_effective
    table = dynamics.merge_observables(exact, dynamics.observables_perturbative(solution, eta))

    validity = dynamics.validity_indicator(solution, eta)
    if validity > dynamics.VALIDITY_THRESHOLD:
        logger.warning(
            "(eta+eta0)*max|beta_d|^2 = %.3f at (N=%d, Delta=%d); first-order columns are unreliable",
            validity,
            params.n_total,
            params.delta,
        )
    return dynamics.SimulationResult(table, solution, validity)
