"""Probabilistic teleportation over a partially entangled channel.

Registers are ordered C, A, B for the three-particle system and B, m for
Bob's correction. Alice Bell-measures C and A, announces i, Bob appends the
auxiliary qubit m in |0>, applies U_i to (B, m) and measures m: outcome 0
leaves the input qubit on B.
"""

import logging
import math
from collections import Counter
from functools import lru_cache
from typing import Sequence

import numpy as np

from .constants import ALGEBRA_ATOL
from .qot_exceptions import InvariantViolation
from .rng import derive_seed, draw_index, map_runs, stream
from .schemas import (
    BatchSummary,
    BellOutcome,
    BranchCount,
    ChannelParams,
    InputQubit,
    OutcomeBranch,
    OutcomeTree,
    Table1Row,
    Transcript,
)
from .statevec import (
    I2,
    I4,
    Z,
    GateMatrix,
    StateVector,
    apply_gate,
    bell_basis,
    block,
    computational_basis,
    fidelity,
    measure_in_basis,
    tensor,
)

logger = logging.getLogger(__name__)

BELL_OUTCOMES = tuple(BellOutcome)
SUCCESS_FIDELITY = 1.0 - 1e-9

_ZERO2 = np.zeros((2, 2))


def channel_state(p: ChannelParams) -> StateVector:
    """a|00> + b|11> over (A, B)."""
    return StateVector(("A", "B"), [p.a, 0.0, 0.0, p.b])


def three_particle_state(p: ChannelParams, q: InputQubit) -> StateVector:
    return tensor(q.state("C"), channel_state(p))


def bell_decompose(p: ChannelParams, q: InputQubit) -> list[tuple[float, InputQubit]]:
    """Probability of each Bell outcome and the collapsed state of B, outcomes 1..4."""
    alpha, beta, a, b = q.alpha, q.beta, p.a, p.b
    unnormalised = (
        (alpha * a, beta * b),
        (alpha * a, -beta * b),
        (beta * a, alpha * b),
        (-beta * a, alpha * b),
    )
    out = []
    for x, y in unnormalised:
        weight = abs(x) ** 2 + abs(y) ** 2
        out.append((weight / 2.0, InputQubit(alpha=x / math.sqrt(weight), beta=y / math.sqrt(weight))))
    return out


def table1(p: ChannelParams, q: InputQubit) -> Table1Row:
    """Closed-form outcome probabilities of the honest protocol."""
    a2, b2 = p.a2, p.b2
    alpha2, beta2 = abs(q.alpha) ** 2, abs(q.beta) ** 2
    pr_even = 0.5 * (alpha2 * a2 + beta2 * b2)
    pr_odd = 0.5 * (beta2 * a2 + alpha2 * b2)
    loss = 1.0 - 2.0 * b2
    return Table1Row(
        bm_probabilities=[pr_even, pr_even, pr_odd, pr_odd],
        success_probabilities=[0.5 * b2] * 4,
        failure_probabilities=[0.5 * alpha2 * loss] * 2 + [0.5 * beta2 * loss] * 2,
    )


def a_block(p: ChannelParams) -> np.ndarray:
    ratio = p.b / p.a
    s = math.sqrt(1.0 - p.b2 / p.a2)
    return np.array([[ratio, s], [s, -ratio.conjugate()]], dtype=complex)


def correction_unitary(i: int, p: ChannelParams) -> GateMatrix:
    """U_i over (B, m); block rows and columns are indexed by B."""
    a, z = a_block(p), Z.entries
    blocks = {
        1: block(a, _ZERO2, _ZERO2, z),
        2: block(a, _ZERO2, _ZERO2, -z),
        3: block(_ZERO2, z, a, _ZERO2),
        4: block(_ZERO2, -z, a, _ZERO2),
    }
    return GateMatrix(blocks[BellOutcome(i)])


@lru_cache(maxsize=1)
def v_matrices() -> tuple[GateMatrix, GateMatrix, GateMatrix]:
    i, o = I2.entries, _ZERO2
    v1 = GateMatrix(block(i, o, o, -i))
    v2 = GateMatrix(block(o, i, i, o))
    v3 = GateMatrix(block(o, i, -i, o))
    return v1, v2, v3


def _to_first(i: int) -> GateMatrix:
    """T_i with U_1 = T_i U_i."""
    if i == 1:
        return I4
    return v_matrices()[i - 2]


def _from_first(j: int) -> GateMatrix:
    """Inverse of T_j; V_1 and V_2 are involutions and V_3^2 = -I."""
    if j == 4:
        return -v_matrices()[2]
    return _to_first(j)


def w_entry(j: int, i: int) -> GateMatrix:
    """W_ji with U_j = W_ji U_i for every channel."""
    j, i = BellOutcome(j), BellOutcome(i)
    return (_from_first(j) @ _to_first(i)).validate_unitary(ALGEBRA_ATOL)


def bob_register(state: InputQubit | StateVector) -> StateVector:
    """Bob's B qubit with the auxiliary m appended in |0>."""
    b = state if isinstance(state, StateVector) else state.state("B")
    return tensor(b, StateVector.basis(("m",), "0"))


def _outcome_tree(p: ChannelParams, q: InputQubit) -> OutcomeTree:
    branches = []
    for bell in measure_in_basis(three_particle_state(p, q), bell_basis("C", "A")):
        outcome = BellOutcome(bell.outcome + 1)
        corrected = apply_gate(bob_register(bell.state), correction_unitary(outcome, p), ("B", "m"))
        for m in measure_in_basis(corrected, computational_basis("m")):
            bob = InputQubit.from_vector(m.state.amps) if m.state is not None else None
            branches.append(
                OutcomeBranch(
                    bm_outcome=outcome,
                    bm_probability=bell.probability,
                    m_outcome=m.outcome,
                    probability=bell.probability * m.probability,
                    bob_state=bob,
                    fidelity=fidelity(q.vector, bob.vector) if bob is not None else 0.0,
                )
            )
    return OutcomeTree(channel=p, input=q, branches=branches)


@lru_cache(maxsize=512)
def run_analytic(p: ChannelParams, q: InputQubit) -> OutcomeTree:
    """All eight (Bell outcome, m) branches, computed on the statevector engine."""
    tree = _outcome_tree(p, q)
    deviation = abs(tree.success_probability - p.success_probability)
    if deviation > 1e-10:
        raise InvariantViolation("total success probability 2|b|^2", deviation)
    return tree


def sampling_table(tree: OutcomeTree) -> tuple[list[float], list[list[float]]]:
    bm = [tree.branch(i, 0).bm_probability for i in BELL_OUTCOMES]
    conditional = []
    for i, pr in zip(BELL_OUTCOMES, bm):
        joint = [tree.branch(i, m).probability for m in (0, 1)]
        conditional.append([x / pr if pr > 0.0 else 0.0 for x in joint])
    return bm, conditional


def draw_branch(tree: OutcomeTree, rng: np.random.Generator) -> OutcomeBranch:
    """Bell outcome from the first variate, m from the second."""
    bm, conditional = sampling_table(tree)
    i = draw_index(bm, rng.random())
    m = draw_index(conditional[i], rng.random())
    return tree.branch(i + 1, m)


def sample_outcome(bm: Sequence[float], conditional: Sequence[Sequence[float]], seed: int) -> tuple[int, int]:
    """(Bell outcome, m) of the run seeded with seed, without building a transcript."""
    rng = stream(seed)
    i = draw_index(bm, rng.random())
    return i + 1, draw_index(conditional[i], rng.random())


def transcript_for(p: ChannelParams, q: InputQubit, seed: int, branch: OutcomeBranch) -> Transcript:
    return Transcript(
        seed=seed,
        channel=p,
        input=q,
        bm_outcome=branch.bm_outcome,
        bm_probability=branch.bm_probability,
        correction_applied=int(branch.bm_outcome),
        m_outcome=branch.m_outcome,
        success=branch.m_outcome == 0,
        bob_state=branch.bob_state,
        recovered_fidelity=branch.fidelity,
    )


def run_sampled(p: ChannelParams, q: InputQubit, seed: int) -> Transcript:
    branch = draw_branch(run_analytic(p, q), stream(seed))
    logger.debug("seed %d: bell %d, m %d", seed, branch.bm_outcome, branch.m_outcome)
    return transcript_for(p, q, seed, branch)


def binomial_stderr(rate: float, trials: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)


def run_batch(p: ChannelParams, q: InputQubit, trials: int, seed: int, workers: int = 1) -> BatchSummary:
    """Sampled runs with per-run seeds derived from (seed, run index)."""
    tree = run_analytic(p, q)
    bm, conditional = sampling_table(tree)

    def count(start: int, stop: int) -> Counter:
        counts: Counter = Counter()
        for index in range(start, stop):
            counts[sample_outcome(bm, conditional, derive_seed(seed, index))] += 1
        return counts

    counts = sum(map_runs(count, trials, workers), Counter())
    successes = sum(n for (_, m), n in counts.items() if m == 0)
    rate = successes / trials
    logger.info("batch of %d runs at b2=%.6g: success rate %.6f", trials, p.b2, rate)
    return BatchSummary(
        seed=seed,
        trials=trials,
        successes=successes,
        success_rate=rate,
        stderr=binomial_stderr(rate, trials),
        counts=[
            BranchCount(bm_outcome=i, m_outcome=m, count=counts.get((int(i), m), 0))
            for i in BELL_OUTCOMES
            for m in (0, 1)
        ],
    )


def success_probability_with(p: ChannelParams, q: InputQubit, unitaries: Sequence[GateMatrix]) -> float:
    """Success probability when Bob applies unitaries[i - 1] after outcome i.

    A branch counts only when m = 0 and B then holds the input qubit.
    """
    if len(unitaries) != 4:
        raise ValueError("one unitary per Bell outcome")
    total = 0.0
    for bell, u in zip(measure_in_basis(three_particle_state(p, q), bell_basis("C", "A")), unitaries):
        if bell.state is None:
            continue
        corrected = apply_gate(bob_register(bell.state), u, ("B", "m"))
        success = measure_in_basis(corrected, computational_basis("m"))[0]
        if success.state is not None and fidelity(q.vector, success.state) >= SUCCESS_FIDELITY:
            total += bell.probability * success.probability
    return total
