"""Cheating-Alice strategies against the p-Rabin qubit-OT.

Three attacks are modelled: announcing a fake Bell outcome, rotating A with
a unitary U_A before the Bell measurement, and entangling A with an
ancilla E through a CNOT. Each closed-form path below has a brute-force
counterpart on the statevector engine in the tests.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from .schemas import (
    AliceInformation,
    AttackOutcome,
    BellOutcome,
    ChannelParams,
    EntangleAttackOutcome,
    FakeBmConfig,
    InputQubit,
    JointProbability,
    PauliAttackConfig,
    PauliBellEntry,
    complex_matrix,
)
from .statevec import (
    BELL_VECTORS,
    CNOT,
    I2,
    PAULI_BASIS,
    PAULI_NAMES,
    StateVector,
    apply_gate,
    computational_basis,
    fidelity,
    measure_in_basis,
    partial_trace,
    tensor,
)
from .teleport import BELL_OUTCOMES, bell_decompose, bob_register, correction_unitary, three_particle_state, w_entry

logger = logging.getLogger(__name__)

SQRT1_2 = 1 / math.sqrt(2)


def _clip01(value: float) -> float:
    return min(max(float(value), 0.0), 1.0)


def _split_m(state: StateVector) -> tuple[float, StateVector | None]:
    """P(m = 0) and the remaining register after m = 0."""
    success = measure_in_basis(state, computational_basis("m"))[0]
    return _clip01(success.probability), success.state


def _guess_probability(p0: float) -> float:
    return max(p0, 1.0 - p0)


def honest_success_probabilities(p: ChannelParams, q: InputQubit) -> list[float]:
    return [_clip01(0.5 * p.b2 / pr) for pr, _ in bell_decompose(p, q)]


# fake Bell-measurement announcement


def corrected_state(p: ChannelParams, q: InputQubit, i: int) -> StateVector:
    """U_i applied to the collapsed B of outcome i with m in |0>."""
    _, phi = bell_decompose(p, q)[i - 1]
    return apply_gate(bob_register(phi), correction_unitary(i, p), ("B", "m"))


def fake_bm_attack(p: ChannelParams, q: InputQubit, cfg: FakeBmConfig) -> AttackOutcome:
    """Bob corrects with U_j for the announced j while B holds the state of outcome i.

    U_j = W_ji U_i and W_ji is a signed Pauli on B alone, so P(m = 0) is the
    honest value and the lie never shows in Bob's success rate.
    """
    i, j = cfg.true_outcome, cfg.reported_outcome
    pr = bell_decompose(p, q)[i - 1][0]
    state = apply_gate(corrected_state(p, q, i), w_entry(j, i), ("B", "m"))
    p0, bob = _split_m(state)
    honest = honest_success_probabilities(p, q)[i - 1]
    bob_state = InputQubit.from_vector(bob.amps) if bob is not None else None
    logger.debug("fake announcement %d -> %d: P(m=0) %.6f, honest %.6f", i, j, p0, honest)
    return AttackOutcome(
        attack="fake-bm",
        bm_outcome=i,
        reported_outcome=j,
        branch_probability=_clip01(pr),
        success_probability=p0,
        bob_success_state=bob_state,
        fidelity_to_intended=fidelity(q.vector, bob_state.vector) if bob_state is not None else 0.0,
        bob_believes_success=p0 > 0.0,
        honest_success_probability=honest,
        alice_information=AliceInformation(
            description="Bob's m statistics equal the honest ones; the fake announcement only rotates B",
            distinguishing_probability=_guess_probability(honest),
            mutual_information=0.0,
        ),
    )


# unitary U_A on A before the Bell measurement


@lru_cache(maxsize=1)
def pauli_bell_table() -> tuple[PauliBellEntry, ...]:
    """Image of each Bell state of (C, A) under a Pauli on A, as sign and target."""
    entries = []
    for name, pauli in zip(PAULI_NAMES, PAULI_BASIS):
        on_a = np.kron(I2.entries, pauli.entries)
        for source in BELL_OUTCOMES:
            image = on_a @ BELL_VECTORS[source - 1]
            overlaps = BELL_VECTORS.conj() @ image
            target = int(np.argmax(np.abs(overlaps)))
            entries.append(
                PauliBellEntry(
                    pauli=name,
                    source=source,
                    target=target + 1,
                    sign=int(np.rint(overlaps[target].real)),
                )
            )
    return tuple(entries)


def delta_coefficients(q: InputQubit, cfg: PauliAttackConfig) -> tuple[complex, complex]:
    """(delta_1, delta_2) with the outcome-1 state of B equal to delta_1 a|0> + delta_2 b|1>."""
    k1, k2, k3, k4 = cfg.coefficients
    delta_1 = ((k1 + k3) * q.alpha + (k2 - k4) * q.beta) * SQRT1_2
    delta_2 = ((k1 - k3) * q.beta + (k2 + k4) * q.alpha) * SQRT1_2
    return delta_1, delta_2


def attacked_b_states(p: ChannelParams, q: InputQubit, cfg: PauliAttackConfig) -> np.ndarray:
    """Unnormalised B state per Bell outcome after U_A on A; row i - 1 is outcome i."""
    u = cfg.gate().entries
    channel = np.diag([p.a, p.b])
    register = np.einsum("c,ax,xb->cab", q.vector, u, channel)
    return np.einsum("kca,cab->kb", BELL_VECTORS.conj().reshape(4, 2, 2), register)


def unitary_attack(p: ChannelParams, q: InputQubit, cfg: PauliAttackConfig) -> list[AttackOutcome]:
    states = attacked_b_states(p, q, cfg)
    delta_1, delta_2 = delta_coefficients(q, cfg)
    if not np.allclose(states[0], [delta_1 * p.a, delta_2 * p.b], atol=1e-12, rtol=0):
        logger.warning("outcome-1 state departs from the delta form")
    honest = honest_success_probabilities(p, q)
    outcomes = []
    for i, amps in zip(BELL_OUTCOMES, states):
        pr = float(np.vdot(amps, amps).real)
        if pr < 1e-14:
            outcomes.append(
                AttackOutcome(
                    attack="pauli",
                    bm_outcome=i,
                    branch_probability=0.0,
                    success_probability=0.0,
                    fidelity_to_intended=0.0,
                    bob_believes_success=False,
                    honest_success_probability=honest[i - 1],
                    alice_information=AliceInformation(description="outcome never occurs under this U_A"),
                )
            )
            continue
        corrected = apply_gate(
            bob_register(StateVector(("B",), amps / math.sqrt(pr))), correction_unitary(i, p), ("B", "m")
        )
        p0, bob = _split_m(corrected)
        bob_state = InputQubit.from_vector(bob.amps) if bob is not None else None
        outcomes.append(
            AttackOutcome(
                attack="pauli",
                bm_outcome=i,
                branch_probability=_clip01(pr),
                success_probability=p0,
                bob_success_state=bob_state,
                fidelity_to_intended=fidelity(q.vector, bob_state.vector) if bob_state is not None else 0.0,
                bob_believes_success=p0 > 0.0,
                honest_success_probability=honest[i - 1],
                alice_information=AliceInformation(
                    description="U_A changes which state Bob accepts; Alice still cannot see his m outcome",
                    distinguishing_probability=_guess_probability(p0),
                ),
            )
        )
    return outcomes


# CNOT from A onto an ancilla E before the Bell measurement


def entangled_register(p: ChannelParams, q: InputQubit) -> StateVector:
    """CNOT_AE applied to the three-particle state with E in |0>; labels C, A, B, E."""
    register = tensor(three_particle_state(p, q), StateVector.basis(("E",), "0"))
    return apply_gate(register, CNOT, ("A", "E"))


def gamma_decomposition(p: ChannelParams, q: InputQubit) -> list[np.ndarray]:
    """Unnormalised BE amplitude per Bell outcome; the register is sum_i psi_i (x) these."""
    alpha, beta, a, b = q.alpha, q.beta, p.a, p.b
    return [
        SQRT1_2 * np.array([alpha * a, 0, 0, beta * b]),
        SQRT1_2 * np.array([alpha * a, 0, 0, -beta * b]),
        SQRT1_2 * np.array([beta * a, 0, 0, alpha * b]),
        SQRT1_2 * np.array([-beta * a, 0, 0, alpha * b]),
    ]


def bem_state(p: ChannelParams, q: InputQubit, i: int) -> StateVector:
    """Normalised (B, E, m) state after outcome i and Bob's U_i."""
    be = gamma_decomposition(p, q)[i - 1]
    be = StateVector(("B", "E"), be / np.linalg.norm(be))
    with_m = tensor(be, StateVector.basis(("m",), "0"))
    return apply_gate(with_m, correction_unitary(i, p), ("B", "m"))


def joint_em(state: StateVector) -> np.ndarray:
    """P(E = e, m = k) as a 2x2 array indexed [e, k]."""
    tensor_bem = state.reordered(("B", "E", "m")).as_tensor()
    return np.sum(np.abs(tensor_bem) ** 2, axis=0)


def mutual_information(joint: np.ndarray) -> float:
    """I(E; m) in bits for a 2x2 joint law."""
    joint = np.asarray(joint, dtype=float)
    joint = joint / joint.sum()
    outer = np.outer(joint.sum(axis=1), joint.sum(axis=0))
    mask = joint > 0
    return float(max(np.sum(joint[mask] * np.log2(joint[mask] / outer[mask])), 0.0))


def _joint_records(joint: np.ndarray) -> list[JointProbability]:
    return [
        JointProbability(e_outcome=e, m_outcome=m, probability=float(joint[e, m])) for e in (0, 1) for m in (0, 1)
    ]


def overall_joint(p: ChannelParams, q: InputQubit) -> np.ndarray:
    pr = [float(np.vdot(be, be).real) for be in gamma_decomposition(p, q)]
    return sum(weight * joint_em(bem_state(p, q, i)) for i, weight in zip(BELL_OUTCOMES, pr))


def entangle_measure_attack(p: ChannelParams, q: InputQubit, bm_outcome: int = 1) -> EntangleAttackOutcome:
    """Entangle-measure attack seen through one Bell outcome.

    Given m = 0, B and E share alpha|00> + beta|11> (for outcome 1), so
    Alice's later Z measurement of E collapses Bob to |0> or |1>. The joint
    (E, m) law over all outcomes puts E = 1 only alongside m = 0.
    """
    i = BellOutcome(bm_outcome)
    be_branch = gamma_decomposition(p, q)[i - 1]
    pr = float(np.vdot(be_branch, be_branch).real)
    state = bem_state(p, q, i)
    p0, be = _split_m(state)
    branch_joint = joint_em(state)
    joint = overall_joint(p, q)
    honest = honest_success_probabilities(p, q)[i - 1]

    e_probabilities = [0.0, 0.0]
    bob_after_e: list[InputQubit | None] = [None, None]
    rho_b = None
    fidelity_to_intended = 0.0
    if be is not None:
        for branch in measure_in_basis(be, computational_basis("E")):
            e_probabilities[branch.outcome] = _clip01(branch.probability)
            if branch.state is not None:
                bob_after_e[branch.outcome] = InputQubit.from_vector(branch.state.amps)
        reduced = partial_trace(be, ("B",))
        rho_b = complex_matrix(reduced.entries)
        fidelity_to_intended = fidelity(q.vector, reduced)

    p_e1 = float(joint[1].sum())
    info = mutual_information(joint)
    logger.debug("entangle attack outcome %d: I(E;m) = %.6f bits overall", i, info)
    return EntangleAttackOutcome(
        attack="entangle",
        bm_outcome=i,
        branch_probability=_clip01(pr),
        success_probability=p0,
        bob_reduced_state=rho_b,
        fidelity_to_intended=fidelity_to_intended,
        bob_believes_success=p0 > 0.0,
        honest_success_probability=honest,
        alice_information=AliceInformation(
            description="E = 1 occurs only when Bob's m = 0; E = 0 leaves his outcome undecided",
            distinguishing_probability=float(joint.max(axis=1).sum()),
            mutual_information=info,
        ),
        be_state=list(be.amps) if be is not None else [0j, 0j, 0j, 0j],
        e_probabilities=e_probabilities,
        bob_states_after_e=bob_after_e,
        branch_joint=_joint_records(branch_joint),
        joint=_joint_records(joint),
        branch_mutual_information=mutual_information(branch_joint),
        success_given_e1=float(joint[1, 0] / p_e1) if p_e1 > 0.0 else None,
    )
