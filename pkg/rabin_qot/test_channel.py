import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from .channel import (
    decoy_detection_probability,
    establish_channel,
    eta_basis,
    intercept_resend_detection_probability,
    share_channel,
    sharing_statistics,
)
from .qot_exceptions import ConfigError
from .schemas import ChannelParams, Eavesdropper, SharingConfig, SharingReport
from .teleport import binomial_stderr, channel_state


def test_eta_basis_contains_channel_state(channel):
    basis = eta_basis(channel)
    np.testing.assert_allclose(basis.vectors[0], channel_state(channel).amps)
    assert basis.names == ("eta1", "eta2", "eta3", "eta4")


def test_closed_form_detection(channel):
    assert decoy_detection_probability(20) == pytest.approx(0.99683, abs=1e-5)
    assert decoy_detection_probability(0) == 0.0
    assert intercept_resend_detection_probability(channel, 0, 1) == pytest.approx(0.32)
    with pytest.raises(ConfigError):
        decoy_detection_probability(-1)


def test_honest_sharing_is_accepted(channel):
    cfg = SharingConfig(n=6, m=4, k=8, seed=99)
    report = share_channel(channel, cfg)
    assert report.accepted
    assert report.decoy_error_count == 0
    assert report.eta_outcomes == [1, 1, 1, 1]
    assert report.kept_pairs == 6
    assert report.kept_fidelity_min == pytest.approx(1.0)


def test_decoy_positions(channel):
    report = share_channel(channel, SharingConfig(n=5, m=3, k=6, seed=4))
    positions = [d.position for d in report.decoys]
    assert len(positions) == 6
    assert positions == sorted(set(positions))
    assert all(0 <= pos < 5 + 3 + 6 for pos in positions)


def test_sharing_is_reproducible(channel):
    cfg = SharingConfig(n=4, m=2, k=5, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=12)
    assert share_channel(channel, cfg) == share_channel(channel, cfg)


def test_intercept_resend_damages_kept_pairs(channel):
    cfg = SharingConfig(n=4, m=2, k=5, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=12)
    report = share_channel(channel, cfg)
    # each kept pair collapsed to |00> or |11>
    assert min(abs(report.kept_fidelity_min - 0.8), abs(report.kept_fidelity_min - 0.2)) < 1e-12


def test_intercept_resend_rates(channel):
    runs = 400
    cfg = SharingConfig(n=2, m=1, k=2, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=2024)
    accepted, flagged = sharing_statistics(channel, cfg, runs, workers=2)
    rejection = 1 - accepted / runs
    expected_rejection = intercept_resend_detection_probability(channel, 2, 1)
    assert expected_rejection == pytest.approx(1 - 0.5625 * 0.68)
    assert abs(rejection - expected_rejection) < 4 * binomial_stderr(expected_rejection, runs)
    expected_flagged = decoy_detection_probability(2)
    assert abs(flagged / runs - expected_flagged) < 4 * binomial_stderr(expected_flagged, runs)


def test_establish_channel_without_eavesdropper(channel):
    result = establish_channel(channel, SharingConfig(n=3, m=2, k=4, seed=1))
    assert result.accepted
    assert result.attempts == 1


def test_establish_channel_gives_up(channel):
    cfg = SharingConfig(n=3, m=3, k=20, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=1)
    result = establish_channel(channel, cfg, max_attempts=3)
    assert result.accepted == result.reports[-1].accepted
    assert result.attempts == len(result.reports) <= 3
    if not result.accepted:
        assert result.attempts == 3
    with pytest.raises(ConfigError):
        establish_channel(channel, cfg, max_attempts=0)


def test_sharing_config_bounds():
    with pytest.raises(ValidationError):
        SharingConfig(n=1, m=1, k=0)


def test_report_acceptance_must_be_consistent():
    with pytest.raises(ValidationError):
        SharingReport(
            seed=0,
            decoys=[],
            decoy_error_count=1,
            decoy_tests=1,
            eta_outcomes=[1],
            eta_deviation_count=0,
            kept_pairs=1,
            kept_fidelity_min=1.0,
            accepted=True,
        )


def test_intercept_resend_decoy_error_count(channel):
    cfg = SharingConfig(n=2, m=1, k=100, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=77)
    report = share_channel(channel, cfg)
    assert abs(report.decoy_error_count - 25) <= 13
    assert not report.accepted


@given(st.integers(min_value=1, max_value=50), st.integers(min_value=0, max_value=2**32 - 1))
def test_honest_sharing_accepted_for_any_decoy_count(k, seed):
    report = share_channel(ChannelParams.from_b2(0.2), SharingConfig(n=2, m=2, k=k, seed=seed))
    assert report.accepted


def test_rejection_grows_with_decoy_count(channel):
    closed = [intercept_resend_detection_probability(channel, k, 1) for k in range(1, 51)]
    assert all(later > earlier for earlier, later in zip(closed, closed[1:]))
    runs = 400
    for k in (1, 3, 8, 50):
        cfg = SharingConfig(n=1, m=1, k=k, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=100 + k)
        accepted, _ = sharing_statistics(channel, cfg, runs)
        expected = 1.0 - intercept_resend_detection_probability(channel, k, 1)
        assert abs(accepted / runs - expected) < 4 * binomial_stderr(expected, runs) + 1.0 / runs


def test_twenty_decoys_catch_intercept_resend(channel):
    runs = 1000
    cfg = SharingConfig(n=10, m=5, k=20, eavesdropper=Eavesdropper.INTERCEPT_RESEND, seed=2020)
    accepted, flagged = sharing_statistics(channel, cfg, runs, workers=2)
    decoy = decoy_detection_probability(20)
    assert abs(flagged / runs - decoy) < 4 * binomial_stderr(decoy, runs)
    assert 1.0 - accepted / runs >= flagged / runs
    rejection = intercept_resend_detection_probability(channel, 20, 5)
    assert abs(1.0 - accepted / runs - rejection) < 4 * binomial_stderr(rejection, runs) + 1.0 / runs
