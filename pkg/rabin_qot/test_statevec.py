import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from .qot_exceptions import InvalidStateError, LabelError, NonUnitaryError
from .statevec import (
    BELL_VECTORS,
    CNOT,
    H,
    IY,
    X,
    Z,
    GateMatrix,
    MeasurementBasis,
    StateVector,
    apply_gate,
    bell_basis,
    computational_basis,
    fidelity,
    measure_in_basis,
    outcome_probabilities,
    partial_trace,
    pauli_decompose,
    pauli_reconstruct,
    qubit,
    tensor,
)
from .strategies import complex_arrays, qubits, register_states, unitaries
from .teleport import three_particle_state


def test_statevector_rejects_bad_norm():
    with pytest.raises(InvalidStateError):
        StateVector(("A",), [1.0, 1.0])


def test_statevector_rejects_wrong_length_and_duplicates():
    with pytest.raises(InvalidStateError):
        StateVector(("A", "B"), [1.0, 0.0])
    with pytest.raises(LabelError):
        StateVector(("A", "A"), [1.0, 0.0, 0.0, 0.0])


def test_register_capped_at_five_qubits():
    with pytest.raises(LabelError):
        StateVector.basis(tuple("CABEmx"), "000000")


def test_tensor_is_big_endian(channel, qubit_in):
    state = three_particle_state(channel, qubit_in)
    assert state.labels == ("C", "A", "B")
    expected = np.zeros(8)
    expected[[0b000, 0b011, 0b100, 0b111]] = [0.5367, 0.2683, 0.7155, 0.3578]
    np.testing.assert_allclose(state.amps.real, expected, atol=1e-4)
    assert np.all(state.amps.imag == 0)


def test_tensor_rejects_shared_labels():
    with pytest.raises(LabelError):
        tensor(qubit("A", 1, 0), qubit("A", 0, 1))


def test_cnot_target_order():
    state = StateVector.basis(("A", "E"), "10")
    flipped = apply_gate(state, CNOT, ("A", "E"))
    np.testing.assert_allclose(flipped.amps, [0, 0, 0, 1])
    # control on E leaves |10> alone
    unchanged = apply_gate(state, CNOT, ("E", "A"))
    np.testing.assert_allclose(unchanged.amps, state.amps)


def test_single_qubit_gate_on_inner_label():
    state = StateVector.basis(("C", "A", "B"), "000")
    out = apply_gate(state, X, ("A",))
    assert out.amps[0b010] == pytest.approx(1.0)


def test_apply_gate_rejects_non_unitary():
    state = StateVector.basis(("A",), "0")
    gate = GateMatrix([[1, 1], [0, 1]], check_unitary=False)
    with pytest.raises(NonUnitaryError):
        apply_gate(state, gate, ("A",))


def test_protocol_gate_must_be_unitary():
    with pytest.raises(NonUnitaryError):
        GateMatrix([[2, 0], [0, 1]])


def test_apply_gate_target_count():
    state = StateVector.basis(("A", "B"), "00")
    with pytest.raises(LabelError):
        apply_gate(state, CNOT, ("A",))
    with pytest.raises(LabelError):
        apply_gate(state, X, ("Q",))


def test_bell_basis_orthonormal():
    gram = BELL_VECTORS.conj() @ BELL_VECTORS.T
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)
    assert bell_basis("C", "A").names == ("psi1", "psi2", "psi3", "psi4")


def test_measurement_basis_must_be_orthonormal():
    with pytest.raises(InvalidStateError):
        MeasurementBasis(("A",), np.array([[1, 0], [1, 0]]))


def test_bell_measurement_probabilities(channel, qubit_in):
    branches = measure_in_basis(three_particle_state(channel, qubit_in), bell_basis("C", "A"))
    probabilities = [b.probability for b in branches]
    np.testing.assert_allclose(probabilities, [0.208, 0.208, 0.292, 0.292], atol=1e-12)
    assert all(b.state.labels == ("B",) for b in branches)


def test_ghost_branch_has_no_state():
    state = StateVector.basis(("A", "B"), "00")
    branches = measure_in_basis(state, computational_basis("A"))
    assert branches[1].probability == 0.0
    assert branches[1].state is None


def test_sampled_measurement_never_draws_ghost(rng):
    state = StateVector.basis(("A",), "1")
    for _ in range(50):
        assert measure_in_basis(state, computational_basis("A"), rng).outcome == 1


def test_outcome_probabilities_match_branches():
    state = apply_gate(StateVector.basis(("A",), "0"), H, ("A",))
    np.testing.assert_allclose(outcome_probabilities(state, computational_basis("A")), [0.5, 0.5])


def test_partial_trace_of_bell_pair_is_maximally_mixed():
    pair = StateVector(("A", "B"), BELL_VECTORS[0])
    rho = partial_trace(pair, ("B",))
    np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-12)
    assert rho.purity() == pytest.approx(0.5)


def test_partial_trace_of_density_matrix_matches_pure_path(channel, qubit_in):
    state = three_particle_state(channel, qubit_in)
    direct = partial_trace(state, ("A", "B"))
    via_density = partial_trace(state.density(), ("A", "B"))
    np.testing.assert_allclose(direct.entries, via_density.entries, atol=1e-12)


def test_fidelity_pure_and_mixed():
    zero = np.array([1, 0])
    plus = np.array([1, 1]) / math.sqrt(2)
    assert fidelity(zero, plus) == pytest.approx(0.5)
    rho = partial_trace(StateVector(("A", "B"), BELL_VECTORS[2]), ("A",))
    assert fidelity(zero, rho) == pytest.approx(0.5)
    with pytest.raises(InvalidStateError):
        fidelity(rho, rho)


def test_pauli_decompose_hadamard():
    k = pauli_decompose(H)
    np.testing.assert_allclose(k, [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0], atol=1e-12)


def test_pauli_basis_convention():
    np.testing.assert_allclose(IY.entries, [[0, 1], [-1, 0]])
    np.testing.assert_allclose(pauli_decompose(Z), [0, 0, 1, 0], atol=1e-12)


@given(complex_arrays(4))
def test_pauli_reconstruct_inverts_decompose(entries):
    matrix = entries.reshape(2, 2)
    np.testing.assert_allclose(pauli_reconstruct(pauli_decompose(matrix)), matrix, atol=1e-12)


@given(qubits(), qubits())
def test_measurement_branches_sum_to_one(first, second):
    state = apply_gate(tensor(first.state("A"), second.state("B")), CNOT, ("A", "B"))
    branches = measure_in_basis(state, bell_basis("A", "B"))
    assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-12)


@given(qubits())
def test_reordering_is_a_permutation(q):
    state = tensor(q.state("A"), StateVector.basis(("B",), "1"))
    swapped = state.reordered(("B", "A"))
    np.testing.assert_allclose(swapped.amps, np.kron([0, 1], q.vector), atol=1e-12)


@st.composite
def measured_registers(draw):
    state = draw(register_states())
    width = draw(st.integers(min_value=1, max_value=2))
    subsystem = tuple(draw(st.permutations(state.labels))[:width])
    if width == 2 and draw(st.booleans()):
        basis = bell_basis(*subsystem)
    else:
        basis = MeasurementBasis(subsystem, draw(unitaries(2**width)).T)
    return state, basis


@given(measured_registers())
def test_measurement_matches_projectors(case):
    state, basis = case
    rest = tuple(label for label in state.labels if label not in basis.subsystem)
    psi = state.reordered(basis.subsystem + rest).amps
    branches = measure_in_basis(state, basis)
    for i, branch in enumerate(branches):
        projected = np.kron(basis.projector(i), np.eye(2 ** len(rest))) @ psi
        expected = float(np.vdot(psi, projected).real)
        assert branch.probability == pytest.approx(expected, abs=1e-12)
        if branch.state is None:
            assert expected < 1e-12
            continue
        if expected < 1e-8:
            continue
        assert branch.state.labels == rest
        np.testing.assert_allclose(
            np.kron(basis.vectors[i], branch.state.amps), projected / np.sqrt(expected), atol=1e-10
        )
