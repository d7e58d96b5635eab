"""Sharing n + m copies of a|00> + b|11> with decoy and eta-basis checks.

Alice keeps the A particles, interleaves k decoys drawn from {|0>, |1>,
|+>, |->} into the B sequence and sends it to Bob. Bob measures each decoy
in the basis Alice announces, then picks m pairs, receives their A
particles and measures every sacrificed pair in the eta basis. The channel
is accepted when no decoy flips and every eta outcome is eta_1.

Random variates are consumed in a fixed order: decoy positions, decoy
bases, decoy values, the eavesdropper's decoy draws, her pair draws, Bob's
decoy draws, the sacrificed-pair sample, then one draw per eta measurement.
"""

import logging
import math

import numpy as np

from .qot_exceptions import ConfigError
from .rng import derive_seed, map_runs, stream
from .schemas import (
    ChannelParams,
    DecoyBasis,
    DecoyState,
    Eavesdropper,
    EstablishmentResult,
    SharingConfig,
    SharingReport,
)
from .statevec import MeasurementBasis, StateVector, computational_basis, fidelity, measure_in_basis, tensor
from .teleport import channel_state

logger = logging.getLogger(__name__)

SQRT1_2 = 1 / math.sqrt(2)

# Rows indexed [basis][value]: computational then diagonal.
DECOY_VECTORS = np.array(
    [
        [[1.0, 0.0], [0.0, 1.0]],
        [[SQRT1_2, SQRT1_2], [SQRT1_2, -SQRT1_2]],
    ]
)


def eta_basis(p: ChannelParams) -> MeasurementBasis:
    """eta_1 = a|00> + b|11>, eta_2 = b*|00> - a*|11>, eta_3 = a|01> + b|10>, eta_4 = b*|01> - a*|10>."""
    a, b = p.a, p.b
    vectors = np.array(
        [
            [a, 0, 0, b],
            [b.conjugate(), 0, 0, -a.conjugate()],
            [0, a, b, 0],
            [0, b.conjugate(), -a.conjugate(), 0],
        ],
        dtype=complex,
    )
    return MeasurementBasis(("A", "B"), vectors, ("eta1", "eta2", "eta3", "eta4"))


def decoy_detection_probability(k: int) -> float:
    """Chance that Z-basis intercept-resend flips at least one of k decoys."""
    if k < 0:
        raise ConfigError("k", k, "must be non-negative")
    return 1.0 - 0.75**k


def intercept_resend_detection_probability(p: ChannelParams, k: int, m: int) -> float:
    """Rejection probability under intercept-resend: decoy flips or a non-eta_1 outcome."""
    return 1.0 - 0.75**k * (1.0 - 2.0 * p.a2 * p.b2) ** m


def _intercept(pair: StateVector, rng: np.random.Generator) -> StateVector:
    """Eve measures B in the computational basis and resends the result."""
    branch = measure_in_basis(pair, computational_basis("B"), rng)
    return tensor(branch.state, StateVector.basis(("B",), str(branch.outcome)))


def _decoy_errors(
    bases: np.ndarray, values: np.ndarray, eve: np.ndarray | None, bob: np.ndarray
) -> np.ndarray:
    if eve is None:
        return np.zeros(bob.shape, dtype=bool)
    sent = DECOY_VECTORS[bases, values]
    eve_outcome = (eve >= np.abs(sent[:, 0]) ** 2).astype(int)
    received = DECOY_VECTORS[0, eve_outcome]
    p_correct = np.abs(np.sum(sent.conj() * received, axis=1)) ** 2
    return bob >= p_correct


def share_channel(p: ChannelParams, cfg: SharingConfig) -> SharingReport:
    rng = stream(cfg.seed)
    pairs_total = cfg.n + cfg.m
    length = pairs_total + cfg.k
    eavesdropping = cfg.eavesdropper is Eavesdropper.INTERCEPT_RESEND

    positions = np.sort(rng.choice(length, size=cfg.k, replace=False))
    bases = rng.integers(0, 2, size=cfg.k)
    values = rng.integers(0, 2, size=cfg.k)
    eve_decoys = rng.random(cfg.k) if eavesdropping else None

    pairs = [channel_state(p)] * pairs_total
    if eavesdropping:
        pairs = [_intercept(pair, rng) for pair in pairs]

    errors = _decoy_errors(bases, values, eve_decoys, rng.random(cfg.k))
    sacrificed = np.sort(rng.choice(pairs_total, size=cfg.m, replace=False))
    basis = eta_basis(p)
    eta_outcomes = [measure_in_basis(pairs[index], basis, rng).outcome + 1 for index in sacrificed]

    tested = set(sacrificed.tolist())
    kept = [pair for index, pair in enumerate(pairs) if index not in tested]
    reference = channel_state(p)
    decoy_error_count = int(errors.sum())
    eta_deviation_count = sum(outcome != 1 for outcome in eta_outcomes)
    report = SharingReport(
        seed=cfg.seed,
        decoys=[
            DecoyState(position=int(pos), basis=list(DecoyBasis)[int(base)], value=int(value))
            for pos, base, value in zip(positions, bases, values)
        ],
        decoy_error_count=decoy_error_count,
        decoy_tests=cfg.k,
        eta_outcomes=eta_outcomes,
        eta_deviation_count=eta_deviation_count,
        kept_pairs=len(kept),
        kept_fidelity_min=min(fidelity(reference, pair) for pair in kept),
        accepted=decoy_error_count == 0 and eta_deviation_count == 0,
    )
    logger.debug(
        "sharing seed %d: %d decoy errors, %d eta deviations", cfg.seed, decoy_error_count, eta_deviation_count
    )
    return report


def establish_channel(p: ChannelParams, cfg: SharingConfig, max_attempts: int = 10) -> EstablishmentResult:
    """Repeat the sharing procedure until one run is accepted; attempt r uses derive_seed(cfg.seed, r)."""
    if max_attempts < 1:
        raise ConfigError("max_attempts", max_attempts, "must be at least 1")
    reports = []
    for attempt in range(max_attempts):
        report = share_channel(p, cfg.model_copy(update={"seed": derive_seed(cfg.seed, attempt)}))
        reports.append(report)
        if report.accepted:
            break
        logger.info("sharing attempt %d rejected, repeating", attempt + 1)
    return EstablishmentResult(accepted=reports[-1].accepted, attempts=len(reports), reports=reports)


def sharing_statistics(p: ChannelParams, cfg: SharingConfig, runs: int, workers: int = 1) -> tuple[int, int]:
    """(accepted runs, runs with a decoy error) over runs seeded derive_seed(cfg.seed, r)."""

    def count(start: int, stop: int) -> tuple[int, int]:
        accepted = flagged = 0
        for run in range(start, stop):
            report = share_channel(p, cfg.model_copy(update={"seed": derive_seed(cfg.seed, run)}))
            accepted += report.accepted
            flagged += report.decoy_error_count > 0
        return accepted, flagged

    chunks = map_runs(count, runs, workers)
    return sum(c[0] for c in chunks), sum(c[1] for c in chunks)
