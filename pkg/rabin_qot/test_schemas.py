import io
import json

import pytest
from pydantic import ValidationError

from .exception_handlers import handle, resolve
from .ot import ENCODINGS, NAMED_STATES
from .qot_exceptions import (
    ConfigError,
    EncodingError,
    InvalidChannelError,
    InvalidStateError,
    StatisticalDisagreement,
)
from .schemas import BitEncoding, ChannelParams, InputQubit, SharingConfig, Transcript


def _cause(info) -> Exception:
    return info.value.errors()[0]["ctx"]["error"]


@pytest.mark.parametrize(
    "a, b, constraint",
    [
        (0.6, 0.8, "|a| > |b|"),
        (1.0, 0.0, "|b| > 0"),
        (0.9, 0.1, "|a|^2 + |b|^2 = 1"),
    ],
)
def test_channel_constraints(a, b, constraint):
    with pytest.raises(ValidationError) as info:
        ChannelParams(a=a, b=b)
    assert isinstance(_cause(info), InvalidChannelError)
    assert _cause(info).constraint == constraint


def test_from_b2_bounds():
    assert ChannelParams.from_b2(0.2).a2 == pytest.approx(0.8)
    with pytest.raises(InvalidChannelError):
        ChannelParams.from_b2(0.5)
    with pytest.raises(InvalidChannelError):
        ChannelParams.from_b2(0.0)


def test_amplitude_formats():
    q = InputQubit(alpha=[0.6, 0.0], beta={"re": 0.0, "im": 0.8})
    assert q.alpha == 0.6
    assert q.beta == 0.8j
    assert json.loads(q.model_dump_json()) == {"alpha": [0.6, 0.0], "beta": [0.0, 0.8]}
    assert InputQubit.model_validate_json(q.model_dump_json()) == q


def test_amplitude_must_be_finite():
    with pytest.raises(ValidationError):
        InputQubit(alpha=float("nan"), beta=0.0)


def test_input_norm_checked_and_normalise():
    with pytest.raises(ValidationError) as info:
        InputQubit(alpha=3.0, beta=4.0)
    assert isinstance(_cause(info), InvalidStateError)
    q, deviation = InputQubit.normalise(3.0, 4.0)
    assert (q.alpha, q.beta) == (pytest.approx(0.6), pytest.approx(0.8))
    assert deviation == pytest.approx(4.0)


def test_encoding_must_be_orthogonal():
    with pytest.raises(ValidationError) as info:
        BitEncoding(zero_state=NAMED_STATES["0"], one_state=NAMED_STATES["plus"])
    assert isinstance(_cause(info), EncodingError)
    assert ENCODINGS["z"].is_computational
    assert not ENCODINGS["pm"].is_computational


def test_transcript_success_mirrors_m(channel, qubit_in):
    with pytest.raises(ValidationError):
        Transcript(
            seed=0,
            channel=channel,
            input=qubit_in,
            bm_outcome=1,
            bm_probability=0.208,
            correction_applied=1,
            m_outcome=1,
            success=True,
            bob_state=None,
            recovered_fidelity=0.0,
        )


def test_handle_config_error():
    stream = io.StringIO()
    assert handle(ConfigError("trials", 0, "must be positive"), stream) == 2
    body = json.loads(stream.getvalue())
    assert body["field"] == "trials"
    assert "trials" in body["detail"]


def test_handle_disagreement():
    stream = io.StringIO()
    assert handle(StatisticalDisagreement("learn_rate", 0.4, 0.5, 6.0), stream) == 1
    assert json.loads(stream.getvalue())["sigma"] == 6.0


def test_validation_error_uses_wrapped_handler():
    with pytest.raises(ValidationError) as info:
        ChannelParams(a=0.6, b=0.8)
    code, body = resolve(info.value)
    assert code == 2
    assert body["constraint"] == "|a| > |b|"


def test_plain_validation_error():
    with pytest.raises(ValidationError) as info:
        SharingConfig(n=1, m=1, k=0)
    code, body = resolve(info.value)
    assert code == 2
    assert body["detail"] == "Invalid request"
    assert body["errors"][0]["loc"] == ["k"]


def test_unknown_exceptions_propagate():
    with pytest.raises(RuntimeError):
        resolve(RuntimeError("boom"))
