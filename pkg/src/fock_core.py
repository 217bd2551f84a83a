"""
Exact dense representation of few-mode bosonic operators on particle-number
conserving Fock sectors.

Two kinds of sector are supported:

- 2-mode sectors V^N, basis (n_e, n_g) with n_e + n_g = N (atoms in the
  untrapped excited mode and the trapped ground mode);
- 3-mode sectors, basis (n_0, n_e, n_g) with n_e + n_g = N and n_0 + n_e = Δ
  (n_0 counts photons of a quantized r.f. mode).

In both cases the basis is ordered by ascending n_e, so the basis index of a
state IS its excited-mode occupation. Every operator the simulator needs moves
n_e by at most one, which keeps all Hamiltonians tridiagonal in this basis.

Sectors, states and operators are immutable; all functions are pure.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10
VARIANCE_CLAMP_TOL = 1e-12


class SectorMismatchError(ValueError):
    """Operands live on different Fock sectors."""


class ModeAbsentError(ValueError):
    """The requested mode does not exist in the sector."""


class NonInvariantTransferError(ValueError):
    """The requested transfer would leave the sector."""


class NonHermitianError(ValueError):
    """An operation that needs a Hermitian operator received another one."""


class Mode(str, Enum):
    PHOTON = "photon"
    EXCITED = "excited"
    GROUND = "ground"


class TransferKind(str, Enum):
    RAISE_EXCITED = "raise_excited"
    LOWER_EXCITED = "lower_excited"
    DRESSED_RAISE = "dressed_raise"
    DRESSED_LOWER = "dressed_lower"


# Occupation change (d_n0, d_ne, d_ng) produced by each transfer.
_TRANSFER_SHIFTS = {
    TransferKind.RAISE_EXCITED: (0, +1, -1),  # b_g b_e^dagger
    TransferKind.LOWER_EXCITED: (0, -1, +1),  # b_g^dagger b_e
    TransferKind.DRESSED_RAISE: (-1, +1, -1),  # a b_g b_e^dagger
    TransferKind.DRESSED_LOWER: (+1, -1, +1),  # a^dagger b_g^dagger b_e
}


########################################################################################
## Sectors
########################################################################################


@dataclass(frozen=True)
class FockSector:
    """Basis of fixed total atom number N (and, for 3-mode sectors, fixed Δ).

    Labels are `(n_e, n_g)` for 2-mode sectors and `(n_0, n_e, n_g)` for
    3-mode sectors.

    >>> build_sector(2).basis_labels
    ((0, 2), (1, 1), (2, 0))
    >>> build_sector(3, 2).basis_labels
    ((2, 0, 3), (1, 1, 2), (0, 2, 1))
    """

    n_total: int
    delta: int | None = None

    def __post_init__(self):
        if isinstance(self.n_total, bool) or not isinstance(self.n_total, (int, np.integer)):
            raise TypeError(f"n_total must be an integer, got {self.n_total!r}")
        if self.n_total < 0:
            raise ValueError(f"n_total must be >= 0, got {self.n_total}")
        if self.delta is not None:
            if isinstance(self.delta, bool) or not isinstance(self.delta, (int, np.integer)):
                raise TypeError(f"delta must be an integer, got {self.delta!r}")
            if self.delta < 0:
                raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def is_dressed(self):
        return self.delta is not None

    @property
    def n_modes(self):
        return 3 if self.is_dressed else 2

    @property
    def max_excited(self):
        if self.is_dressed:
            return min(self.n_total, self.delta)
        return self.n_total

    @property
    def dimension(self):
        return self.max_excited + 1

    @cached_property
    def basis_labels(self):
        n_e = range(self.max_excited + 1)
        if self.is_dressed:
            return tuple((self.delta - k, k, self.n_total - k) for k in n_e)
        return tuple((k, self.n_total - k) for k in n_e)

    @cached_property
    def index(self):
        """Map from occupation label to basis position."""
        return {label: i for i, label in enumerate(self.basis_labels)}

    def occupations(self, mode):
        """Occupation of `mode` for every basis state, in basis order."""
        mode = Mode(mode)
        excited = np.arange(self.dimension, dtype=float)
        if mode is Mode.EXCITED:
            return excited
        if mode is Mode.GROUND:
            return self.n_total - excited
        if not self.is_dressed:
            raise ModeAbsentError("the photon mode exists only in 3-mode sectors")
        return self.delta - excited

    def to_dict(self):
        return {"n_total": int(self.n_total), "delta": None if self.delta is None else int(self.delta)}

    @classmethod
    def from_dict(cls, data):
        return build_sector(data["n_total"], data.get("delta"))


def build_sector(n_total, delta=None):
    """Build the conserved-quantity sector for N atoms (and Δ excitations)."""
    return FockSector(int(n_total) if isinstance(n_total, np.integer) else n_total, delta)


def _check_same_sector(*sectors):
    first = sectors[0]
    for other in sectors[1:]:
        if other != first:
            raise SectorMismatchError(f"sector mismatch: {first} vs {other}")


########################################################################################
## States
########################################################################################


@dataclass(frozen=True, eq=False)
class StateVector:
    sector: FockSector
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.sector.dimension,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, sector needs ({self.sector.dimension},)"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm() - 1.0) <= tol

    def normalized(self):
        norm = self.norm()
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.sector, self.amplitudes / norm)

    def overlap(self, other):
        """<self|other>"""
        _check_same_sector(self.sector, other.sector)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other):
        return abs(self.overlap(other)) ** 2


def basis_state(sector, n_excited):
    """The sector basis state with `n_excited` atoms in the excited mode."""
    if not 0 <= n_excited <= sector.max_excited:
        raise ValueError(f"n_excited={n_excited} outside 0..{sector.max_excited}")
    amps = np.zeros(sector.dimension, dtype=complex)
    amps[n_excited] = 1.0
    return StateVector(sector, amps)


def superposition(sector, weights):
    """Normalized state with the given (unnormalized) amplitudes per n_e."""
    return StateVector(sector, np.asarray(weights, dtype=complex)).normalized()


########################################################################################
## Operators
########################################################################################


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    sector: FockSector
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        dim = self.sector.dimension
        if entries.shape != (dim, dim):
            raise ValueError(f"operator has shape {entries.shape}, sector needs ({dim}, {dim})")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, scalar):
        return scale(self, scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return apply(self, other)
        return multiply(self, other)

    def adjoint(self):
        return adjoint(self)

    @property
    def diagonal(self):
        return np.diagonal(self.entries)

    def max_abs(self):
        return float(np.max(np.abs(self.entries))) if self.entries.size else 0.0

    def hermiticity_residual(self):
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def is_hermitian(self, tol=HERMITIAN_TOL):
        return self.hermiticity_residual() <= tol


def identity(sector):
    return OperatorMatrix(sector, np.eye(sector.dimension))


def diagonal_operator(sector, values):
    return OperatorMatrix(sector, np.diag(np.asarray(values, dtype=complex)))


def number_operator(sector, mode):
    """Diagonal occupation operator of `mode` ("photon", "excited" or "ground")."""
    return diagonal_operator(sector, sector.occupations(mode))


def transfer_operator(sector, kind):
    """Normal-ordered mode-transfer product with standard bosonic elements.

    raise_excited = b_g b_e^dagger, lower_excited = b_g^dagger b_e,
    dressed_raise = a b_g b_e^dagger, dressed_lower = a^dagger b_g^dagger b_e.
    No 1/sqrt(N) normalization is applied here.
    """
    kind = TransferKind(kind)
    dressed_kind = kind in (TransferKind.DRESSED_RAISE, TransferKind.DRESSED_LOWER)
    if dressed_kind and not sector.is_dressed:
        raise ModeAbsentError(f"{kind.value} needs the photon mode of a 3-mode sector")
    if sector.is_dressed and not dressed_kind:
        raise NonInvariantTransferError(
            f"{kind.value} changes n_0 + n_e and leaves the (N={sector.n_total}, "
            f"delta={sector.delta}) sector"
        )

    d_n0, d_ne, d_ng = _TRANSFER_SHIFTS[kind]
    entries = np.zeros((sector.dimension, sector.dimension))
    for col, label in enumerate(sector.basis_labels):
        if sector.is_dressed:
            n0, ne, ng = label
        else:
            n0, (ne, ng) = 0, label
        # sqrt(n) for each annihilated mode, sqrt(n + 1) for each created one
        amplitude = 1.0
        for n, d in ((n0, d_n0), (ne, d_ne), (ng, d_ng)):
            if d < 0:
                amplitude *= np.sqrt(n)
            elif d > 0:
                amplitude *= np.sqrt(n + 1)
        if amplitude == 0.0:
            continue
        target = (n0 + d_n0, ne + d_ne, ng + d_ng) if sector.is_dressed else (ne + d_ne, ng + d_ng)
        entries[sector.index[target], col] = amplitude
    return OperatorMatrix(sector, entries)


def adjoint(op):
    return OperatorMatrix(op.sector, op.entries.conj().T)


def add(a, b):
    _check_same_sector(a.sector, b.sector)
    return OperatorMatrix(a.sector, a.entries + b.entries)


def scale(op, scalar):
    return OperatorMatrix(op.sector, complex(scalar) * op.entries)


def multiply(a, b):
    _check_same_sector(a.sector, b.sector)
    return OperatorMatrix(a.sector, a.entries @ b.entries)


def commutator(a, b):
    """[a, b] = ab - ba"""
    return q_commutator(a, b, 1.0)


def q_commutator(a, b, q):
    """[a, b]_q = ab - q ba"""
    _check_same_sector(a.sector, b.sector)
    return OperatorMatrix(a.sector, a.entries @ b.entries - q * (b.entries @ a.entries))


def max_entry_residual(op, reference):
    """Largest entry of |op - reference|."""
    _check_same_sector(op.sector, reference.sector)
    return float(np.max(np.abs(op.entries - reference.entries)))


########################################################################################
## Expectations
########################################################################################


def apply(op, state):
    """Unnormalized M|psi>."""
    _check_same_sector(op.sector, state.sector)
    return StateVector(state.sector, op.entries @ state.amplitudes)


def expectation(state, op):
    """<psi|M|psi>"""
    _check_same_sector(op.sector, state.sector)
    return complex(np.vdot(state.amplitudes, op.entries @ state.amplitudes))


def variance(state, op):
    """<M^2> - <M>^2 for a Hermitian M, clamped at zero."""
    if not op.is_hermitian(HERMITIAN_TOL * max(1.0, op.max_abs())):
        raise NonHermitianError(
            f"variance needs a Hermitian operator (residual {op.hermiticity_residual():.3e})"
        )
    _check_same_sector(op.sector, state.sector)
    m_psi = op.entries @ state.amplitudes
    mean = np.vdot(state.amplitudes, m_psi).real
    value = float(np.vdot(m_psi, m_psi).real - mean**2)
    if value < 0.0:
        if value < -VARIANCE_CLAMP_TOL:
            logger.warning("variance %.3e below tolerance clamped to 0", value)
        else:
            logger.debug("roundoff variance %.3e clamped to 0", value)
        value = 0.0
    return value
