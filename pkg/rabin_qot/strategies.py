"""Hypothesis strategies for the property tests: qubits, registers, channels, unitaries."""

import cmath
import math

import numpy as np
from hypothesis import strategies as st

from .schemas import ChannelParams, InputQubit
from .statevec import StateVector

REGISTER_LABELS = ("C", "A", "B", "E", "m")

unit_floats = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
phases = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False, allow_infinity=False)
b2_values = st.floats(min_value=0.01, max_value=0.49, allow_nan=False, allow_infinity=False)


def complex_arrays(size: int) -> st.SearchStrategy[np.ndarray]:
    return st.lists(unit_floats, min_size=2 * size, max_size=2 * size).map(
        lambda xs: np.array(xs[:size]) + 1j * np.array(xs[size:])
    )


def nonzero_vectors(size: int) -> st.SearchStrategy[np.ndarray]:
    return complex_arrays(size).filter(lambda v: np.linalg.norm(v) > 1e-3)


def qubits() -> st.SearchStrategy[InputQubit]:
    return nonzero_vectors(2).map(lambda v: InputQubit.from_vector(v / np.linalg.norm(v)))


def registers(labels: tuple[str, ...]) -> st.SearchStrategy[StateVector]:
    return nonzero_vectors(2 ** len(labels)).map(lambda v: StateVector.normalised(labels, v))


@st.composite
def register_states(draw, min_qubits: int = 2, max_qubits: int = 4) -> StateVector:
    n = draw(st.integers(min_value=min_qubits, max_value=max_qubits))
    return draw(registers(REGISTER_LABELS[:n]))


def real_channels() -> st.SearchStrategy[ChannelParams]:
    return b2_values.map(ChannelParams.from_b2)


@st.composite
def channels(draw) -> ChannelParams:
    """Channels with arbitrary phases on a and b."""
    b2, phase_a, phase_b = draw(b2_values), draw(phases), draw(phases)
    return ChannelParams(a=math.sqrt(1.0 - b2) * cmath.exp(1j * phase_a), b=math.sqrt(b2) * cmath.exp(1j * phase_b))


def _unitary_part(matrix: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(matrix)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def unitaries(dim: int) -> st.SearchStrategy[np.ndarray]:
    return (
        complex_arrays(dim * dim)
        .map(lambda v: v.reshape(dim, dim))
        .filter(lambda m: abs(np.linalg.det(m)) > 1e-3)
        .map(_unitary_part)
    )
