"""p-Rabin oblivious transfer of a qubit, and of a bit through an orthogonal encoding.

Bob learns the transferred state with probability p = 2|b|^2 and knows
whether he did; Alice only ever sees the channel, her input and her own
Bell outcome.
"""

import logging
import math

import numpy as np

from .constants import ALGEBRA_ATOL
from .qot_exceptions import ConfigError, InvariantViolation
from .rng import derive_seed, draw_index, map_runs, stream
from .schemas import (
    AliceView,
    BitEncoding,
    ChannelParams,
    CurvePoint,
    InputQubit,
    OtResult,
    RepeatedOtResult,
    Transcript,
)
from .statevec import I2, X, DensityMatrix, MeasurementBasis, apply_gate, fidelity, measure_in_basis
from .teleport import (
    bell_decompose,
    draw_branch,
    run_analytic,
    run_sampled,
    sample_outcome,
    sampling_table,
    transcript_for,
)

logger = logging.getLogger(__name__)

SQRT1_2 = 1 / math.sqrt(2)

NAMED_STATES: dict[str, InputQubit] = {
    "0": InputQubit(alpha=1.0, beta=0.0),
    "1": InputQubit(alpha=0.0, beta=1.0),
    "plus": InputQubit(alpha=SQRT1_2, beta=SQRT1_2),
    "minus": InputQubit(alpha=SQRT1_2, beta=-SQRT1_2),
}
NAMED_STATES["+"] = NAMED_STATES["plus"]
NAMED_STATES["-"] = NAMED_STATES["minus"]

ENCODINGS: dict[str, BitEncoding] = {
    "pm": BitEncoding(zero_state=NAMED_STATES["plus"], one_state=NAMED_STATES["minus"], name="pm"),
    "z": BitEncoding(zero_state=NAMED_STATES["0"], one_state=NAMED_STATES["1"], name="z"),
}
DEFAULT_ENCODING = ENCODINGS["pm"]


def ot_qubit(p: ChannelParams, q: InputQubit, seed: int) -> OtResult:
    transcript = run_sampled(p, q, seed)
    return OtResult(transcript=transcript, bob_learned=transcript.success)


def alice_view(result: OtResult) -> AliceView:
    transcript = result.transcript
    return AliceView(
        channel=transcript.channel,
        input=transcript.input,
        bm_outcome=transcript.bm_outcome,
        correction_applied=transcript.correction_applied,
    )


def decoding_basis(enc: BitEncoding) -> MeasurementBasis:
    return MeasurementBasis(("B",), np.array([enc.zero_state.vector, enc.one_state.vector]), ("0", "1"))


def _decode(state: InputQubit, enc: BitEncoding, rng: np.random.Generator) -> int:
    return measure_in_basis(state.state("B"), decoding_basis(enc), rng).outcome


def _computational_ot(p: ChannelParams, q: InputQubit, enc: BitEncoding, seed: int) -> OtResult:
    """Outcomes 1, 2 leave B in the input basis state, outcomes 3, 4 flip it; I or X undoes that."""
    rng = stream(seed)
    collapsed = bell_decompose(p, q)
    i = draw_index([pr for pr, _ in collapsed], rng.random()) + 1
    pr, phi = collapsed[i - 1]
    pauli, gate = ("I", I2) if i <= 2 else ("X", X)
    bob = InputQubit.from_vector(apply_gate(phi.state("B"), gate, ("B",)).amps)
    transcript = Transcript(
        seed=seed,
        channel=p,
        input=q,
        bm_outcome=i,
        bm_probability=pr,
        correction_applied=i,
        pauli_correction=pauli,
        m_outcome=0,
        success=True,
        bob_state=bob,
        recovered_fidelity=fidelity(q.vector, bob.vector),
    )
    return OtResult(
        transcript=transcript,
        bob_learned=True,
        decoded_bit=_decode(bob, enc, rng),
        encoding_oblivious=False,
    )


def ot_bit(p: ChannelParams, bit: int, enc: BitEncoding = DEFAULT_ENCODING, seed: int = 0) -> OtResult:
    """Transfer enc.state_for(bit); Bob decodes only when m = 0.

    The computational-basis encoding takes the deterministic I/X path and is
    flagged as not oblivious.
    """
    if bit not in (0, 1):
        raise ConfigError("bit", bit, "must be 0 or 1")
    q = enc.state_for(bit)
    if enc.is_computational:
        return _computational_ot(p, q, enc, seed)
    rng = stream(seed)
    branch = draw_branch(run_analytic(p, q), rng)
    transcript = transcript_for(p, q, seed, branch)
    decoded = _decode(branch.bob_state, enc, rng) if transcript.success else None
    return OtResult(transcript=transcript, bob_learned=transcript.success, decoded_bit=decoded)


def run_bit_batch(
    p: ChannelParams, bit: int, enc: BitEncoding, trials: int, seed: int, workers: int = 1
) -> tuple[int, int]:
    """(runs Bob learned, learned runs decoded correctly) over per-run derived seeds."""

    def count(start: int, stop: int) -> tuple[int, int]:
        learned = correct = 0
        for index in range(start, stop):
            result = ot_bit(p, bit, enc, derive_seed(seed, index))
            learned += result.bob_learned
            correct += result.decoded_bit == bit
        return learned, correct

    chunks = map_runs(count, trials, workers)
    return sum(c[0] for c in chunks), sum(c[1] for c in chunks)


def concealment_check(p: ChannelParams, q: InputQubit) -> DensityMatrix:
    """Bob's state before Alice announces: sum_i Pr_i |phi_i><phi_i| = diag(|a|^2, |b|^2)."""
    rho = sum(pr * np.outer(phi.vector, phi.vector.conj()) for pr, phi in bell_decompose(p, q))
    deviation = float(np.max(np.abs(rho - np.diag([p.a2, p.b2]))))
    if deviation > ALGEBRA_ATOL:
        raise InvariantViolation("pre-announcement state of B is diag(|a|^2, |b|^2)", deviation)
    return DensityMatrix(("B",), rho)


def conditional_success(p: ChannelParams, q: InputQubit) -> list[float]:
    """P(m = 0 | Bell outcome i) for i = 1..4."""
    return [0.5 * p.b2 / pr for pr, _ in bell_decompose(p, q)]


def repeated_ot_probability(p: ChannelParams, n: int) -> float:
    if n < 1:
        raise ConfigError("n", n, "must be at least 1")
    return 1.0 - (1.0 - p.success_probability) ** n


def repeated_ot_curve(p: ChannelParams, n_max: int) -> list[CurvePoint]:
    return [CurvePoint(n=n, closed_form=repeated_ot_probability(p, n)) for n in range(1, n_max + 1)]


def ot_repeated(p: ChannelParams, q: InputQubit, n: int, seed: int) -> RepeatedOtResult:
    """One episode of n transfers of the same qubit; run r is seeded with derive_seed(seed, r)."""
    if n < 1:
        raise ConfigError("n", n, "must be at least 1")
    runs = [ot_qubit(p, q, derive_seed(seed, r)) for r in range(n)]
    first = next((r + 1 for r, run in enumerate(runs) if run.bob_learned), None)
    return RepeatedOtResult(runs=runs, learned=first is not None, first_success=first)


def repeated_learn_count(
    p: ChannelParams, q: InputQubit, n: int, episodes: int, seed: int, workers: int = 1
) -> int:
    """Episodes (seeded derive_seed(seed, e)) in which Bob learned; agrees with ot_repeated run by run."""
    if n < 1:
        raise ConfigError("n", n, "must be at least 1")
    bm, conditional = sampling_table(run_analytic(p, q))

    def count(start: int, stop: int) -> int:
        learned = 0
        for episode in range(start, stop):
            episode_seed = derive_seed(seed, episode)
            learned += any(sample_outcome(bm, conditional, derive_seed(episode_seed, r))[1] == 0 for r in range(n))
        return learned

    total = sum(map_runs(count, episodes, workers))
    logger.info("%d of %d %d-run episodes learned at b2=%.6g", total, episodes, n, p.b2)
    return total
