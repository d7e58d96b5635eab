import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from .schemas import BellOutcome, ChannelParams, InputQubit
from .statevec import I4, GateMatrix, bell_basis, fidelity, measure_in_basis
from .strategies import b2_values, channels, qubits, unitaries
from .teleport import (
    a_block,
    bell_decompose,
    binomial_stderr,
    correction_unitary,
    run_analytic,
    run_batch,
    run_sampled,
    sample_outcome,
    sampling_table,
    success_probability_with,
    table1,
    three_particle_state,
    w_entry,
)


def test_bell_outcome_probabilities(channel, qubit_in):
    probabilities = [pr for pr, _ in bell_decompose(channel, qubit_in)]
    np.testing.assert_allclose(probabilities, [0.208, 0.208, 0.292, 0.292], atol=1e-12)


def test_collapsed_states(channel, qubit_in):
    states = [phi for _, phi in bell_decompose(channel, qubit_in)]
    a, b = channel.a.real, channel.b.real
    expected = [(0.6 * a, 0.8 * b), (0.6 * a, -0.8 * b), (0.8 * a, 0.6 * b), (-0.8 * a, 0.6 * b)]
    for phi, (x, y) in zip(states, expected):
        norm = np.hypot(x, y)
        np.testing.assert_allclose(phi.vector, [x / norm, y / norm], atol=1e-12)


def test_table1_rows(channel, qubit_in):
    row = table1(channel, qubit_in)
    np.testing.assert_allclose(row.bm_probabilities, [0.208, 0.208, 0.292, 0.292], atol=1e-12)
    np.testing.assert_allclose(row.success_probabilities, [0.1] * 4, atol=1e-12)
    np.testing.assert_allclose(row.failure_probabilities, [0.108, 0.108, 0.192, 0.192], atol=1e-12)
    total = sum(row.success_probabilities) + sum(row.failure_probabilities)
    assert total == pytest.approx(1.0)


def test_a_block_at_standard_channel(channel):
    np.testing.assert_allclose(a_block(channel), [[0.5, 0.8660254], [0.8660254, -0.5]], atol=1e-7)


@pytest.mark.parametrize("i", list(BellOutcome))
def test_corrections_are_unitary(channel, i):
    assert correction_unitary(i, channel).unitarity_deviation() < 1e-12


@pytest.mark.parametrize("j", list(BellOutcome))
@pytest.mark.parametrize("i", list(BellOutcome))
def test_corrections_related_by_w(channel, i, j):
    composed = w_entry(j, i) @ correction_unitary(i, channel)
    assert composed.allclose(correction_unitary(j, channel))


def test_w_does_not_depend_on_channel():
    weak, strong = ChannelParams.from_b2(0.05), ChannelParams.from_b2(0.45)
    for i in BellOutcome:
        for j in BellOutcome:
            assert (w_entry(j, i) @ correction_unitary(i, weak)).allclose(correction_unitary(j, weak))
            assert (w_entry(j, i) @ correction_unitary(i, strong)).allclose(correction_unitary(j, strong))


def test_analytic_tree(channel, qubit_in):
    tree = run_analytic(channel, qubit_in)
    assert len(tree.branches) == 8
    assert tree.success_probability == pytest.approx(0.4, abs=1e-12)
    for i in BellOutcome:
        success = tree.branch(i, 0)
        assert success.probability == pytest.approx(0.1, abs=1e-12)
        assert success.fidelity == pytest.approx(1.0, abs=1e-9)


def test_failure_branches_leave_basis_state(channel, qubit_in):
    tree = run_analytic(channel, qubit_in)
    for i in BellOutcome:
        failed = tree.branch(i, 1).bob_state
        assert max(abs(failed.alpha), abs(failed.beta)) == pytest.approx(1.0, abs=1e-9)


def test_computational_input_has_ghost_failures(channel):
    tree = run_analytic(channel, InputQubit(alpha=1.0, beta=0.0))
    assert tree.success_probability == pytest.approx(0.4, abs=1e-12)
    assert sum(b.probability for b in tree.branches) == pytest.approx(1.0)


def test_sampled_run_is_reproducible(channel, qubit_in):
    first = run_sampled(channel, qubit_in, 42)
    second = run_sampled(channel, qubit_in, 42)
    assert first == second
    assert first.success == (first.m_outcome == 0)
    assert first.correction_applied == int(first.bm_outcome)


def test_fast_sampler_matches_transcripts(channel, qubit_in):
    bm, conditional = sampling_table(run_analytic(channel, qubit_in))
    for seed in range(25):
        transcript = run_sampled(channel, qubit_in, seed)
        assert sample_outcome(bm, conditional, seed) == (int(transcript.bm_outcome), transcript.m_outcome)


def test_successful_transcript_recovers_input(channel, qubit_in):
    for seed in range(40):
        transcript = run_sampled(channel, qubit_in, seed)
        if transcript.success:
            assert transcript.recovered_fidelity == pytest.approx(1.0, abs=1e-9)


def test_batch_success_rate(channel, qubit_in):
    trials = 4000
    batch = run_batch(channel, qubit_in, trials, seed=7)
    assert sum(c.count for c in batch.counts) == trials
    assert abs(batch.success_rate - 0.4) < 4 * binomial_stderr(0.4, trials)


def test_batch_independent_of_workers(channel, qubit_in):
    serial = run_batch(channel, qubit_in, 600, seed=3, workers=1)
    threaded = run_batch(channel, qubit_in, 600, seed=3, workers=4)
    assert serial.counts == threaded.counts


def test_optimal_corrections_reach_bound(channel, qubit_in):
    corrections = [correction_unitary(i, channel) for i in BellOutcome]
    assert success_probability_with(channel, qubit_in, corrections) == pytest.approx(0.4, abs=1e-12)


def test_identity_correction_never_recovers(channel, qubit_in):
    assert success_probability_with(channel, qubit_in, [I4] * 4) == 0.0

@given(b2_values, st.lists(unitaries(4), min_size=4, max_size=4))
def test_random_corrections_stay_below_bound(b2, matrices):
    p = ChannelParams.from_b2(b2)
    corrections = [GateMatrix(m) for m in matrices]
    assert success_probability_with(p, InputQubit(alpha=0.6, beta=0.8), corrections) <= 2 * b2 + 1e-12


@given(channels(), qubits())
def test_success_probability_is_two_b2(p, q):
    tree = run_analytic(p, q)
    assert tree.success_probability == pytest.approx(2 * p.b2, abs=1e-10)
    assert sum(branch.probability for branch in tree.branches) == pytest.approx(1.0, abs=1e-10)
    for i in BellOutcome:
        assert tree.branch(i, 0).fidelity == pytest.approx(1.0, abs=1e-9)


@given(channels(), qubits())
def test_bell_decompose_matches_engine(p, q):
    branches = measure_in_basis(three_particle_state(p, q), bell_basis("C", "A"))
    for (probability, collapsed), branch in zip(bell_decompose(p, q), branches):
        assert probability == pytest.approx(branch.probability, abs=1e-12)
        if branch.state is not None and branch.probability > 1e-8:
            assert fidelity(collapsed.vector, branch.state.amps) == pytest.approx(1.0, abs=1e-10)


@given(channels())
def test_corrections_unitary_on_complex_channels(p):
    for i in BellOutcome:
        assert correction_unitary(i, p).unitarity_deviation() < 1e-12
        for j in BellOutcome:
            assert (w_entry(j, i) @ correction_unitary(i, p)).allclose(correction_unitary(j, p))
