"""
Gardiner phonon operators on the fixed-N sector and the q-deformed algebra
they realize.

The phonon b = b_g^dagger b_e / sqrt(N) moves one atom from the untrapped
excited mode back to the trapped ground mode, so the q-Fock state |n> is the
sector basis state with n excited atoms. With eta = 1/N and q = 1 - 2 eta the
following hold exactly on the (N + 1)-dimensional sector:

- [b, b^dagger] = I - 2 eta N_e
- b^dagger b = (N - N_e + 1) N_e / N, so its eigenvalues are the q-numbers
- [b, b^dagger]_q = I - 2 eta^2 N_e (N_e - 1)
- [h, b^dagger] = -2 eta b^dagger and [h, b] = 2 eta b for h = I - 2 eta N_e

`verify_algebra` measures all of these as max-entry residuals.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

import fock_core
from fock_core import FockSector, OperatorMatrix, StateVector

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-12
CONSTRUCTION_TOL = 1e-10
# |radicand| at or below this is roundoff around a double root
RADICAND_SNAP = 1e-13


class DomainError(ValueError):
    """Argument outside the real domain of a special function."""


class AlgebraIdentityError(RuntimeError):
    """An exact operator identity failed beyond its tolerance."""


@dataclass(frozen=True)
class Residual:
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def to_dict(self):
        return {"residual": self.residual, "tolerance": self.tolerance, "passed": self.passed}


########################################################################################
## Special functions
########################################################################################


def q_number(n, eta):
    """The deformed integer <n> = n - n(n - 1) eta.

    On the N-atom sector with eta = 1/N this equals n(N - n + 1)/N exactly.

    >>> q_number(3, 0.1)
    2.4
    >>> q_number(5, 0.0)
    5.0
    """
    if n < 0:
        raise ValueError(f"q_number needs n >= 0, got {n}")
    return float(n - n * (n - 1) * eta)


def q_factorial(n, eta):
    """<n>! = <n><n-1>...<1>, with <0>! = 1.

    >>> round(q_factorial(3, 0.1), 12)
    4.32
    """
    if n < 0:
        raise ValueError(f"q_factorial needs n >= 0, got {n}")
    return float(math.prod(q_number(k, eta) for k in range(1, n + 1)))


@dataclass(frozen=True)
class QNumber:
    n: int
    eta: float

    @property
    def value(self):
        return q_number(self.n, self.eta)

    def __float__(self):
        return self.value


def f_function(x, eta, branch=1):
    """f(x; eta) = sqrt(1 + 2(1 - 2x) eta + eta^2) - eta.

    `branch` = -1 selects the negative square root. On the N-atom sector the
    principal root reproduces the commutator eigenvalue 1 - 2n/N only on the
    lower half of the ladder, n <= (N + 1)/2; the upper half needs the other
    root because b^dagger b takes equal values at n and N + 1 - n.

    >>> round(f_function(0, 0.3), 12)
    1.0
    >>> round(f_function(1, 0.1), 12)
    0.8
    """
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    radicand = 1.0 + 2.0 * (1.0 - 2.0 * x) * eta + eta**2
    if abs(radicand) <= RADICAND_SNAP:
        radicand = 0.0
    if radicand < 0.0:
        raise DomainError(f"f({x}; {eta}) has negative radicand {radicand:.3e}")
    return float(branch * math.sqrt(radicand) - eta)


########################################################################################
## Algebra
########################################################################################


@dataclass(frozen=True, eq=False)
class GardinerAlgebra:
    sector: FockSector
    b_lower: OperatorMatrix
    b_raise: OperatorMatrix

    @property
    def eta(self):
        return 1.0 / self.sector.n_total

    @property
    def q(self):
        return 1.0 - 2.0 * self.eta

    @property
    def eta_effective(self):
        """Deformation strength seen by first-order perturbation theory."""
        return self.eta

    @cached_property
    def number(self):
        """N_e, the excited-mode occupation."""
        return fock_core.number_operator(self.sector, "excited")

    @cached_property
    def h(self):
        return fock_core.identity(self.sector) - (2.0 * self.eta) * self.number

    def commutator_identity(self):
        """Closed form of [b, b^dagger] on the sector."""
        return self.h


def make_algebra(sector, verify=True):
    """Build the phonon pair on a 2-mode sector and check it on the spot.

    Raises `AlgebraIdentityError` when any exact identity misses its
    tolerance.
    """
    if sector.is_dressed:
        raise ValueError("Gardiner phonons live on 2-mode sectors; use dressed.make_dressed")
    if sector.n_total < 1:
        raise ValueError("the phonon normalization 1/sqrt(N) needs N >= 1")

    root_n = math.sqrt(sector.n_total)
    algebra = GardinerAlgebra(
        sector=sector,
        b_lower=fock_core.transfer_operator(sector, "lower_excited") * (1.0 / root_n),
        b_raise=fock_core.transfer_operator(sector, "raise_excited") * (1.0 / root_n),
    )
    if not verify:
        return algebra
    failed = {k: r for k, r in verify_algebra(algebra).items() if not r.passed}
    if failed:
        raise AlgebraIdentityError(
            f"phonon algebra at N={sector.n_total} failed: "
            + ", ".join(f"{k}={r.residual:.3e} (tol {r.tolerance:.0e})" for k, r in failed.items())
        )
    return algebra


def q_fock_state(algebra, n):
    """|n> = (b^dagger)^n |0> / sqrt(<n>!), built one ladder step at a time."""
    n_total = algebra.sector.n_total
    if not 0 <= n <= n_total:
        raise ValueError(f"q-Fock index {n} outside 0..{n_total}")
    state = fock_core.basis_state(algebra.sector, 0)
    for k in range(1, n + 1):
        raised = fock_core.apply(algebra.b_raise, state)
        state = StateVector(algebra.sector, raised.amplitudes / math.sqrt(q_number(k, algebra.eta)))
    return state


def _max_abs(values):
    values = np.asarray(values)
    return float(np.max(np.abs(values))) if values.size else 0.0


def verify_algebra(algebra):
    """Residual of every identity of the phonon algebra.

    Returns
    -------
    dict
        key -> `Residual`. Failures are reported, never raised.
    """
    sector = algebra.sector
    n_total = sector.n_total
    eta = algebra.eta
    b, bd = algebra.b_lower, algebra.b_raise
    n_e = sector.occupations("excited")
    ladder = np.arange(sector.dimension)

    comm = fock_core.commutator(b, bd)
    bdb = fock_core.multiply(bd, b)
    comm_diag = comm.diagonal.real

    # f-form: [b, b^dagger] = f(b^dagger b), both diagonal in the number basis
    bdb_eigs = bdb.diagonal.real
    branches = np.where(n_total + 1 - 2 * ladder >= 0, 1, -1)
    f_values = np.array([f_function(x, eta, br) for x, br in zip(bdb_eigs, branches)])
    lower_half = ladder <= (n_total + 1) / 2
    f_principal = np.array([f_function(x, eta) for x in bdb_eigs[lower_half]])

    q_comm = fock_core.q_commutator(b, bd, algebra.q)
    deviation = q_comm - fock_core.identity(sector)
    deviation_norms = np.linalg.norm(deviation.entries, axis=0)
    low_span = deviation.entries[:, : min(2, sector.dimension)]

    vacuum = fock_core.basis_state(sector, 0)
    top = fock_core.basis_state(sector, n_total)
    ladder_elements = np.abs(np.diagonal(bd.entries, offset=-1)) ** 2
    ladder_q_numbers = np.array([q_number(k + 1, eta) for k in range(n_total)])

    return {
        "adjoint_pair": Residual(fock_core.max_entry_residual(bd, fock_core.adjoint(b)), EXACT_TOL),
        "exact_commutator": Residual(
            fock_core.max_entry_residual(comm, algebra.commutator_identity()), EXACT_TOL
        ),
        "number_relation": Residual(
            _max_abs(bdb.entries - np.diag((n_total - n_e + 1) * n_e / n_total)), EXACT_TOL
        ),
        "f_form": Residual(_max_abs(comm_diag - f_values), CONSTRUCTION_TOL),
        "f_form_principal_lower_half": Residual(
            _max_abs(comm_diag[lower_half] - f_principal), CONSTRUCTION_TOL
        ),
        "q_commutator_deviation": Residual(
            _max_abs(deviation_norms - 2.0 * eta**2 * ladder * (ladder - 1)), EXACT_TOL
        ),
        "q_commutator_low_span": Residual(_max_abs(low_span), EXACT_TOL),
        "su2_raise": Residual(
            _max_abs((fock_core.commutator(algebra.h, bd) + (2.0 * eta) * bd).entries), EXACT_TOL
        ),
        "su2_lower": Residual(
            _max_abs((fock_core.commutator(algebra.h, b) - (2.0 * eta) * b).entries), EXACT_TOL
        ),
        "vacuum_annihilation": Residual(fock_core.apply(b, vacuum).norm(), EXACT_TOL),
        "top_annihilation": Residual(fock_core.apply(bd, top).norm(), EXACT_TOL),
        "ladder_q_numbers": Residual(_max_abs(ladder_elements - ladder_q_numbers), EXACT_TOL),
        "h_vacuum": Residual(
            _max_abs(fock_core.apply(algebra.h, vacuum).amplitudes - vacuum.amplitudes), EXACT_TOL
        ),
    }


def report_to_dict(report):
    """Flat key -> {residual, tolerance, passed} mapping for JSON output."""
    return {key: residual.to_dict() for key, residual in report.items()}
