"""Custom exception classes raised by the simulator.

Each exception keeps the offending values as attributes so that
exception_handlers can report them without parsing messages.
"""


class QotError(Exception):
    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class InvalidChannelError(QotError, ValueError):
    """Channel parameters violate |a|^2 + |b|^2 = 1 or |a| > |b| > 0."""

    def __init__(self, constraint: str, a: complex | float, b: complex | float):
        self.constraint = constraint
        self.a = a
        self.b = b
        super().__init__(f"channel parameters violate {constraint} (a={a}, b={b})")


class InvalidStateError(QotError, ValueError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"invalid state: {reason}")


class LabelError(QotError, ValueError):
    def __init__(self, reason: str, labels: tuple[str, ...] | list[str]):
        self.reason = reason
        self.labels = tuple(labels)
        super().__init__(f"{reason}: {list(self.labels)}")


class NonUnitaryError(QotError, ValueError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"operator is not unitary: ||U U^dagger - I|| = {deviation:.3e}")


class EncodingError(QotError, ValueError):
    def __init__(self, overlap: float):
        self.overlap = overlap
        super().__init__(f"bit encoding states are not orthogonal: |<zero|one>| = {overlap:.3e}")


class ConfigError(QotError, ValueError):
    def __init__(self, field: str, value: object, reason: str):
        self.field = field
        self.value = value
        super().__init__(f"invalid {field}={value!r}: {reason}")


class InvariantViolation(QotError):
    """A closed-form identity that must hold did not."""

    def __init__(self, name: str, deviation: float):
        self.name = name
        self.deviation = deviation
        super().__init__(f"{name} violated by {deviation:.3e}")


class StatisticalDisagreement(QotError):
    def __init__(self, field: str, expected: float, observed: float, sigma: float):
        self.field = field
        self.expected = expected
        self.observed = observed
        self.sigma = sigma
        super().__init__(
            f"{field}: observed {observed:.6f} vs expected {expected:.6f} ({sigma:.2f} sigma)"
        )


class ChannelRejected(QotError):
    def __init__(self, decoy_errors: int, eta_deviations: int):
        self.decoy_errors = decoy_errors
        self.eta_deviations = eta_deviations
        super().__init__(
            f"channel rejected: {decoy_errors} decoy errors, {eta_deviations} eta deviations"
        )
