"""Dense statevector and density-matrix engine for registers of up to five qubits.

Amplitudes are indexed big-endian over the label list: the first label is
the most significant bit. Gates act on their targets in the order given,
the first target being the most significant bit of the gate's own index.
All values are immutable once built; every function here is pure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, overload

import numpy as np

from .constants import ALGEBRA_ATOL, GHOST_PROBABILITY, MAX_QUBITS, STATE_ATOL
from .qot_exceptions import InvalidStateError, LabelError, NonUnitaryError
from .rng import draw_index
from .settings import get_settings

logger = logging.getLogger(__name__)

SQRT1_2 = 1 / np.sqrt(2)


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def _check_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise LabelError("duplicate qubit labels", labels)
    if len(labels) > MAX_QUBITS:
        raise LabelError(f"register larger than {MAX_QUBITS} qubits", labels)
    return labels


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised amplitude vector over an ordered register of labelled qubits."""

    labels: tuple[str, ...]
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = _check_labels(self.labels)
        amps = _frozen(self.amps).reshape(-1)
        if amps.shape[0] != 2 ** len(labels):
            raise InvalidStateError(f"{amps.shape[0]} amplitudes for {len(labels)} qubits")
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("non-finite amplitude")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > STATE_ATOL:
            raise InvalidStateError(f"norm {norm!r} differs from 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalised(cls, labels: Sequence[str], amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise InvalidStateError("zero vector")
        return cls(tuple(labels), amps / norm)

    @classmethod
    def basis(cls, labels: Sequence[str], bits: str) -> "StateVector":
        """Computational basis state, e.g. basis(("B", "m"), "00")."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(tuple(labels), amps)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError("unknown qubit label", (label,)) from None

    def as_tensor(self) -> np.ndarray:
        return self.amps.reshape([2] * self.num_qubits)

    def reordered(self, labels: Sequence[str]) -> "StateVector":
        labels = tuple(labels)
        if sorted(labels) != sorted(self.labels):
            raise LabelError("reordering must be a permutation of the register", labels)
        axes = [self.axis(label) for label in labels]
        return StateVector(labels, np.transpose(self.as_tensor(), axes).reshape(-1))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.labels, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over labelled qubits."""

    labels: tuple[str, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = _check_labels(self.labels)
        entries = _frozen(self.entries)
        dim = 2 ** len(labels)
        if entries.shape != (dim, dim):
            raise InvalidStateError(f"density matrix of shape {entries.shape} for {len(labels)} qubits")
        if not np.allclose(entries, entries.conj().T, atol=STATE_ATOL, rtol=0):
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(entries) - 1.0) > STATE_ATOL:
            raise InvalidStateError(f"trace {np.trace(entries)!r} differs from 1")
        if np.linalg.eigvalsh(entries).min() < -STATE_ATOL:
            raise InvalidStateError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "entries", entries)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """Square 2x2 or 4x4 operator.

    Protocol gates are checked for unitarity on construction; attack inputs
    are built with check_unitary=False and validated explicitly.
    """

    entries: np.ndarray = field(repr=False)
    check_unitary: bool = True

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.shape not in {(2, 2), (4, 4)}:
            raise InvalidStateError(f"gate of shape {entries.shape}")
        object.__setattr__(self, "entries", entries)
        if self.check_unitary:
            self.validate_unitary(ALGEBRA_ATOL)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def num_qubits(self) -> int:
        return 1 if self.dim == 2 else 2

    def unitarity_deviation(self) -> float:
        return float(np.linalg.norm(self.entries @ self.entries.conj().T - np.eye(self.dim)))

    def validate_unitary(self, atol: float = STATE_ATOL) -> "GateMatrix":
        deviation = self.unitarity_deviation()
        if deviation > atol:
            raise NonUnitaryError(deviation)
        return self

    def dagger(self) -> "GateMatrix":
        return GateMatrix(self.entries.conj().T, check_unitary=False)

    def __matmul__(self, other: "GateMatrix") -> "GateMatrix":
        return GateMatrix(self.entries @ other.entries, check_unitary=False)

    def __neg__(self) -> "GateMatrix":
        return GateMatrix(-self.entries, check_unitary=False)

    def allclose(self, other: "GateMatrix", atol: float = ALGEBRA_ATOL) -> bool:
        return bool(np.allclose(self.entries, other.entries, atol=atol, rtol=0))


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal basis of a one- or two-qubit subsystem; rows are the basis vectors."""

    subsystem: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)
    names: tuple[str, ...] = ()

    def __post_init__(self):
        subsystem = _check_labels(self.subsystem)
        if len(subsystem) not in (1, 2):
            raise LabelError("measurement subsystem must hold one or two qubits", subsystem)
        vectors = _frozen(self.vectors)
        dim = 2 ** len(subsystem)
        if vectors.shape != (dim, dim):
            raise InvalidStateError(f"{vectors.shape[0]} basis vectors for a {dim}-dimensional space")
        gram = vectors.conj() @ vectors.T
        if not np.allclose(gram, np.eye(dim), atol=STATE_ATOL, rtol=0):
            raise InvalidStateError("measurement basis is not orthonormal")
        names = tuple(self.names) or tuple(str(k) for k in range(dim))
        object.__setattr__(self, "subsystem", subsystem)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "names", names)

    def projector(self, outcome: int) -> np.ndarray:
        v = self.vectors[outcome]
        return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class Branch:
    """One measurement outcome; state is over the unmeasured qubits, None when impossible."""

    outcome: int
    probability: float
    state: StateVector | None


# Gates named in the protocol and its attack analysis.
I2 = GateMatrix(np.eye(2))
X = GateMatrix([[0, 1], [1, 0]])
Z = GateMatrix([[1, 0], [0, -1]])
IY = GateMatrix([[0, 1], [-1, 0]])
H = GateMatrix(np.array([[1, 1], [1, -1]]) * SQRT1_2)
I4 = GateMatrix(np.eye(4))
CNOT = GateMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
PAULI_BASIS = (I2, X, Z, IY)
PAULI_NAMES = ("I", "X", "Z", "iY")

# Rows psi1..psi4 over (first, second): Phi+, Phi-, Psi+, Psi-.
BELL_VECTORS = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1, -1, 0],
    ],
    dtype=complex,
) * SQRT1_2


def bell_basis(first: str, second: str) -> MeasurementBasis:
    return MeasurementBasis((first, second), BELL_VECTORS, ("psi1", "psi2", "psi3", "psi4"))


def computational_basis(label: str) -> MeasurementBasis:
    return MeasurementBasis((label,), np.eye(2), ("0", "1"))


def qubit(label: str, alpha: complex, beta: complex) -> StateVector:
    return StateVector((label,), [alpha, beta])


def tensor(x: StateVector, y: StateVector) -> StateVector:
    overlap = set(x.labels) & set(y.labels)
    if overlap:
        raise LabelError("tensor factors share labels", sorted(overlap))
    return StateVector(x.labels + y.labels, np.kron(x.amps, y.amps))


def _move_to_front(s: StateVector, targets: Sequence[str]) -> tuple[np.ndarray, list[int]]:
    axes = [s.axis(label) for label in targets]
    if len(set(axes)) != len(axes):
        raise LabelError("repeated target label", targets)
    moved = np.moveaxis(s.as_tensor(), axes, list(range(len(axes))))
    return moved.reshape(2 ** len(axes), -1), axes


def apply_gate(
    s: StateVector, g: GateMatrix, targets: Sequence[str], strict: bool | None = None
) -> StateVector:
    targets = tuple(targets)
    if len(targets) != g.num_qubits:
        raise LabelError(f"{g.dim}x{g.dim} gate needs {g.num_qubits} targets", targets)
    if strict is None:
        strict = get_settings().strict_gates
    if strict:
        g.validate_unitary()
    psi, axes = _move_to_front(s, targets)
    out = (g.entries @ psi).reshape([2] * s.num_qubits)
    out = np.moveaxis(out, list(range(len(axes))), axes)
    return StateVector(s.labels, out.reshape(-1))


def _branch_amplitudes(s: StateVector, basis: MeasurementBasis) -> tuple[np.ndarray, tuple[str, ...]]:
    for label in basis.subsystem:
        if label not in s.labels:
            raise LabelError("measured qubit not in register", basis.subsystem)
    psi, _ = _move_to_front(s, basis.subsystem)
    rest = tuple(label for label in s.labels if label not in basis.subsystem)
    return basis.vectors.conj() @ psi, rest


def _branch(index: int, amps: np.ndarray, rest: tuple[str, ...]) -> Branch:
    probability = float(np.vdot(amps, amps).real)
    if probability < GHOST_PROBABILITY:
        return Branch(index, 0.0, None)
    return Branch(index, probability, StateVector(rest, amps / np.sqrt(probability)))


@overload
def measure_in_basis(s: StateVector, basis: MeasurementBasis, rng: None = None) -> list[Branch]: ...
@overload
def measure_in_basis(s: StateVector, basis: MeasurementBasis, rng: np.random.Generator) -> Branch: ...


def measure_in_basis(s, basis, rng=None):
    """Projective measurement of basis.subsystem.

    Without rng every branch is returned (analytic mode). With rng one branch
    is drawn from a single uniform variate by cumulative inversion in outcome
    order; impossible branches are never drawn.
    """
    coefficients, rest = _branch_amplitudes(s, basis)
    branches = [_branch(k, coefficients[k], rest) for k in range(coefficients.shape[0])]
    if rng is None:
        return branches
    chosen = draw_index([b.probability for b in branches], rng.random())
    logger.debug("measured %s -> %s", basis.subsystem, basis.names[chosen])
    return branches[chosen]


def outcome_probabilities(s: StateVector, basis: MeasurementBasis) -> np.ndarray:
    coefficients, _ = _branch_amplitudes(s, basis)
    return np.sum(np.abs(coefficients) ** 2, axis=1)


def partial_trace(s: StateVector | DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    keep = tuple(keep)
    if not keep:
        raise LabelError("keep list is empty", keep)
    for label in keep:
        if label not in s.labels:
            raise LabelError("kept qubit not in register", keep)
    traced = [label for label in s.labels if label not in keep]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    if isinstance(s, StateVector):
        psi = s.reordered(keep + tuple(traced)).amps.reshape(dk, dt)
        return DensityMatrix(keep, psi @ psi.conj().T)
    n = s.num_qubits
    order = [s.labels.index(label) for label in keep + tuple(traced)]
    rho = s.entries.reshape([2] * (2 * n)).transpose(order + [k + n for k in order])
    rho = rho.reshape(dk, dt, dk, dt)
    return DensityMatrix(keep, np.trace(rho, axis1=1, axis2=3))


def _as_vector(x) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.amps
    return np.asarray(x, dtype=complex).reshape(-1)


def fidelity(x, y) -> float:
    """|<x|y>|^2 for pure states; <x|rho|x> when one side is a DensityMatrix."""
    if isinstance(x, DensityMatrix) and isinstance(y, DensityMatrix):
        raise InvalidStateError("fidelity between two mixed states is not supported")
    if isinstance(x, DensityMatrix):
        x, y = y, x
    u = _as_vector(x)
    if isinstance(y, DensityMatrix):
        value = np.vdot(u, y.entries @ u).real
    else:
        v = _as_vector(y)
        if u.shape != v.shape:
            raise InvalidStateError(f"fidelity between shapes {u.shape} and {v.shape}")
        value = abs(np.vdot(u, v)) ** 2
    return float(min(max(value, 0.0), 1.0))


def pauli_decompose(g: GateMatrix | np.ndarray) -> tuple[complex, complex, complex, complex]:
    """Hilbert-Schmidt coefficients (k1, k2, k3, k4) with g = k1 I + k2 X + k3 Z + k4 iY."""
    entries = g.entries if isinstance(g, GateMatrix) else np.asarray(g, dtype=complex)
    if entries.shape != (2, 2):
        raise InvalidStateError(f"pauli decomposition needs a 2x2 matrix, got {entries.shape}")
    return tuple(complex(np.trace(p.entries.conj().T @ entries) / 2) for p in PAULI_BASIS)


def pauli_reconstruct(k: Sequence[complex]) -> np.ndarray:
    return sum(coefficient * p.entries for coefficient, p in zip(k, PAULI_BASIS))


def block(top_left, top_right, bottom_left, bottom_right) -> np.ndarray:
    return np.block([[top_left, top_right], [bottom_left, bottom_right]])
