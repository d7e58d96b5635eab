"""Map exceptions to an exit code and a JSON error body on stderr."""

import json
import logging
import sys
from typing import Callable

from pydantic import ValidationError

from .constants import EXIT_DISAGREEMENT, EXIT_USAGE
from .qot_exceptions import (
    ChannelRejected,
    ConfigError,
    EncodingError,
    InvalidChannelError,
    NonUnitaryError,
    QotError,
    StatisticalDisagreement,
)

logger = logging.getLogger(__name__)

ErrorResponse = tuple[int, dict]


def invalid_channel_handler(exc: InvalidChannelError) -> ErrorResponse:
    return EXIT_USAGE, {"detail": exc.message, "constraint": exc.constraint}


def non_unitary_handler(exc: NonUnitaryError) -> ErrorResponse:
    return EXIT_USAGE, {"detail": exc.message, "deviation": exc.deviation}


def encoding_handler(exc: EncodingError) -> ErrorResponse:
    return EXIT_USAGE, {"detail": exc.message, "overlap": exc.overlap}


def config_handler(exc: ConfigError) -> ErrorResponse:
    return EXIT_USAGE, {"detail": exc.message, "field": exc.field}


def disagreement_handler(exc: StatisticalDisagreement) -> ErrorResponse:
    return EXIT_DISAGREEMENT, {
        "detail": exc.message,
        "field": exc.field,
        "expected": exc.expected,
        "observed": exc.observed,
        "sigma": exc.sigma,
    }


def channel_rejected_handler(exc: ChannelRejected) -> ErrorResponse:
    return EXIT_DISAGREEMENT, {
        "detail": exc.message,
        "decoy_errors": exc.decoy_errors,
        "eta_deviations": exc.eta_deviations,
    }


def validation_handler(exc: ValidationError) -> ErrorResponse:
    # A QotError raised inside a validator keeps its own handler.
    for error in exc.errors():
        cause = (error.get("ctx") or {}).get("error")
        if isinstance(cause, QotError):
            return resolve(cause)
    errors = [{"loc": list(error["loc"]), "msg": error["msg"]} for error in exc.errors()]
    return EXIT_USAGE, {"detail": "Invalid request", "errors": errors}


def qot_error_handler(exc: QotError) -> ErrorResponse:
    return EXIT_USAGE, {"detail": exc.message}


EXCEPTION_HANDLERS: dict[type[Exception], Callable[..., ErrorResponse]] = {
    InvalidChannelError: invalid_channel_handler,
    NonUnitaryError: non_unitary_handler,
    EncodingError: encoding_handler,
    ConfigError: config_handler,
    StatisticalDisagreement: disagreement_handler,
    ChannelRejected: channel_rejected_handler,
    ValidationError: validation_handler,
    QotError: qot_error_handler,
}


def resolve(exc: Exception) -> ErrorResponse:
    for cls in type(exc).__mro__:
        handler = EXCEPTION_HANDLERS.get(cls)
        if handler is not None:
            return handler(exc)
    raise exc


def handle(exc: Exception, stream=None) -> int:
    """Write the JSON body for exc to stderr and return the exit code."""
    code, body = resolve(exc)
    if code == EXIT_USAGE:
        logger.error(body["detail"])
    else:
        logger.warning(body["detail"])
    print(json.dumps(body, default=str), file=stream or sys.stderr)
    return code
