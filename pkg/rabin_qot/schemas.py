import math
from enum import Enum, IntEnum
from typing import Annotated, Literal, Optional

import numpy as np
from pydantic import (
    AfterValidator,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from .constants import ALGEBRA_ATOL, STATE_ATOL
from .qot_exceptions import EncodingError, InvalidChannelError, InvalidStateError, NonUnitaryError
from .statevec import GateMatrix, StateVector, pauli_reconstruct


def _to_complex(value):
    """Accept [re, im] pairs, {"re", "im"} objects, numpy scalars and plain numbers."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("amplitude pairs are [re, im]")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        return complex(float(value["re"]), float(value["im"]))
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, (int, float, complex)):
        return complex(value)
    return value


def _finite(value: complex) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError("amplitude must be finite")
    return value


Amplitude = Annotated[
    complex,
    BeforeValidator(_to_complex),
    AfterValidator(_finite),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list[float]),
    WithJsonSchema(
        {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
            "description": "complex amplitude as [re, im]",
        }
    ),
]

ComplexMatrix = list[list[Amplitude]]


def complex_matrix(entries: np.ndarray) -> ComplexMatrix:
    return [[complex(z) for z in row] for row in np.asarray(entries)]


class BellOutcome(IntEnum):
    PSI1 = 1
    PSI2 = 2
    PSI3 = 3
    PSI4 = 4


class ChannelParams(BaseModel):
    """Partially entangled channel a|00> + b|11> shared by Alice (A) and Bob (B)."""

    a: Amplitude = Field(..., description="coefficient of |00>")
    b: Amplitude = Field(..., description="coefficient of |11>")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"a": [0.894427190999916, 0.0], "b": [0.447213595499958, 0.0]}},
    )

    @model_validator(mode="after")
    def check_channel(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > ALGEBRA_ATOL:
            raise InvalidChannelError("|a|^2 + |b|^2 = 1", self.a, self.b)
        if not abs(self.b) > 0.0:
            raise InvalidChannelError("|b| > 0", self.a, self.b)
        if not abs(self.a) > abs(self.b):
            raise InvalidChannelError("|a| > |b|", self.a, self.b)
        return self

    @classmethod
    def from_b2(cls, b2: float) -> "ChannelParams":
        """Real channel with |b|^2 = b2; 0 < b2 < 0.5 is the same as |a| > |b| > 0."""
        if not b2 > 0.0:
            raise InvalidChannelError("|b| > 0", math.sqrt(max(1.0 - b2, 0.0)), b2)
        if not b2 < 0.5:
            raise InvalidChannelError("|a| > |b|", math.sqrt(max(1.0 - b2, 0.0)), b2)
        return cls(a=math.sqrt(1.0 - b2), b=math.sqrt(b2))

    @property
    def a2(self) -> float:
        return abs(self.a) ** 2

    @property
    def b2(self) -> float:
        return abs(self.b) ** 2

    @property
    def success_probability(self) -> float:
        return 2.0 * self.b2


class InputQubit(BaseModel):
    """Pure single-qubit state alpha|0> + beta|1>."""

    alpha: Amplitude
    beta: Amplitude

    model_config = ConfigDict(frozen=True, json_schema_extra={"example": {"alpha": [0.6, 0.0], "beta": [0.8, 0.0]}})

    @model_validator(mode="after")
    def check_norm(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > ALGEBRA_ATOL:
            raise InvalidStateError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
        return self

    @classmethod
    def from_vector(cls, vector) -> "InputQubit":
        alpha, beta = np.asarray(vector, dtype=complex).reshape(2)
        return cls(alpha=alpha, beta=beta)

    @classmethod
    def normalise(cls, alpha: complex, beta: complex) -> tuple["InputQubit", float]:
        """Normalised qubit plus how far the raw pair was from unit norm."""
        norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm == 0.0:
            raise InvalidStateError("zero vector")
        return cls(alpha=alpha / norm, beta=beta / norm), abs(norm - 1.0)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def state(self, label: str) -> StateVector:
        return StateVector((label,), self.vector)


class Transcript(BaseModel):
    """Full record of one sampled protocol run."""

    seed: int = Field(..., ge=0, lt=2**64)
    channel: ChannelParams
    input: InputQubit
    bm_outcome: BellOutcome
    bm_probability: float = Field(..., ge=0.0, le=1.0)
    correction_applied: int = Field(..., ge=1, le=4, description="index i of the correction U_i")
    pauli_correction: Optional[Literal["I", "X"]] = Field(
        None, description="set only when the computational-basis decode rule replaced U_i"
    )
    m_outcome: int = Field(..., ge=0, le=1)
    success: bool
    bob_state: Optional[InputQubit]
    recovered_fidelity: float = Field(..., ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_success(self):
        if self.success != (self.m_outcome == 0):
            raise ValueError("success must mirror m_outcome == 0")
        return self


class OutcomeBranch(BaseModel):
    bm_outcome: BellOutcome
    bm_probability: float
    m_outcome: int = Field(..., ge=0, le=1)
    probability: float = Field(..., ge=0.0, le=1.0)
    bob_state: Optional[InputQubit]
    fidelity: float = Field(..., ge=0.0, le=1.0, description="fidelity of Bob's state to the input")

    model_config = ConfigDict(frozen=True)


class OutcomeTree(BaseModel):
    """All eight (Bell outcome, m outcome) branches of one protocol instance."""

    channel: ChannelParams
    input: InputQubit
    branches: list[OutcomeBranch]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_total(self):
        total = sum(branch.probability for branch in self.branches)
        if abs(total - 1.0) > STATE_ATOL:
            raise ValueError(f"branch probabilities sum to {total!r}")
        return self

    @property
    def success_probability(self) -> float:
        return sum(branch.probability for branch in self.branches if branch.m_outcome == 0)

    def branch(self, bm_outcome: int, m_outcome: int) -> OutcomeBranch:
        for branch in self.branches:
            if branch.bm_outcome == bm_outcome and branch.m_outcome == m_outcome:
                return branch
        raise KeyError((bm_outcome, m_outcome))


class Table1Row(BaseModel):
    """Closed-form outcome probabilities of the honest protocol, indexed by Bell outcome."""

    bm_probabilities: list[float] = Field(..., min_length=4, max_length=4)
    success_probabilities: list[float] = Field(..., min_length=4, max_length=4)
    failure_probabilities: list[float] = Field(..., min_length=4, max_length=4)


class BranchCount(BaseModel):
    bm_outcome: BellOutcome
    m_outcome: int
    count: int = Field(..., ge=0)


class BatchSummary(BaseModel):
    seed: int
    trials: int = Field(..., ge=1)
    successes: int = Field(..., ge=0)
    success_rate: float
    stderr: float
    counts: list[BranchCount]


class BitEncoding(BaseModel):
    """Two orthogonal qubits standing for the classical bits 0 and 1."""

    zero_state: InputQubit
    one_state: InputQubit
    name: str = "custom"

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_orthogonal(self):
        overlap = abs(np.vdot(self.zero_state.vector, self.one_state.vector))
        if overlap > ALGEBRA_ATOL:
            raise EncodingError(overlap)
        return self

    def state_for(self, bit: int) -> InputQubit:
        return self.one_state if bit else self.zero_state

    @property
    def is_computational(self) -> bool:
        """True for {|0>, |1>} in either order, up to phases."""
        return all(abs(abs(state.alpha) - 1.0) < ALGEBRA_ATOL or abs(abs(state.beta) - 1.0) < ALGEBRA_ATOL
                   for state in (self.zero_state, self.one_state))


class OtResult(BaseModel):
    transcript: Transcript
    bob_learned: bool
    decoded_bit: Optional[int] = Field(None, ge=0, le=1, description="bit-OT only")
    encoding_oblivious: bool = True

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_learned(self):
        if self.bob_learned != self.transcript.success:
            raise ValueError("bob_learned must mirror transcript.success")
        return self


class AliceView(BaseModel):
    """Everything Alice sees of one run; nothing here depends on Bob's m outcome."""

    channel: ChannelParams
    input: InputQubit
    bm_outcome: BellOutcome
    correction_applied: int

    model_config = ConfigDict(frozen=True)


class RepeatedOtResult(BaseModel):
    runs: list[OtResult]
    learned: bool
    first_success: Optional[int] = Field(None, description="1-based index of the first successful run")


class FakeBmConfig(BaseModel):
    true_outcome: BellOutcome
    reported_outcome: BellOutcome

    model_config = ConfigDict(frozen=True)


class PauliAttackConfig(BaseModel):
    """Coefficients of U_A = k1 I + k2 X + k3 Z + k4 iY applied to particle A."""

    k1: Amplitude
    k2: Amplitude
    k3: Amplitude
    k4: Amplitude

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_unitary(self):
        deviation = self.gate().unitarity_deviation()
        if deviation > STATE_ATOL:
            raise NonUnitaryError(deviation)
        return self

    @property
    def coefficients(self) -> tuple[complex, complex, complex, complex]:
        return (self.k1, self.k2, self.k3, self.k4)

    def gate(self) -> GateMatrix:
        return GateMatrix(pauli_reconstruct(self.coefficients), check_unitary=False)


class AliceInformation(BaseModel):
    description: str
    distinguishing_probability: Optional[float] = Field(
        None, description="probability that Alice guesses Bob's m outcome from her own data"
    )
    mutual_information: Optional[float] = Field(None, description="bits shared by Alice's data and Bob's m")


class AttackOutcome(BaseModel):
    attack: Literal["fake-bm", "pauli", "entangle"]
    bm_outcome: BellOutcome
    reported_outcome: Optional[BellOutcome] = None
    branch_probability: float = Field(..., ge=0.0, le=1.0)
    success_probability: float = Field(..., ge=0.0, le=1.0, description="P(m = 0) within this branch")
    bob_success_state: Optional[InputQubit] = None
    bob_reduced_state: Optional[ComplexMatrix] = None
    fidelity_to_intended: float = Field(..., ge=0.0, le=1.0)
    bob_believes_success: bool
    honest_success_probability: Optional[float] = Field(
        None, description="P(m = 0) in the same branch of the honest protocol"
    )
    alice_information: AliceInformation


class PauliBellEntry(BaseModel):
    """P acting on A maps |psi_source> to sign * |psi_target>."""

    pauli: Literal["I", "X", "Z", "iY"]
    source: BellOutcome
    target: BellOutcome
    sign: int = Field(..., description="+1 or -1")


class JointProbability(BaseModel):
    e_outcome: int
    m_outcome: int
    probability: float


class EntangleAttackOutcome(AttackOutcome):
    be_state: list[Amplitude] = Field(..., description="BE state after m = 0, over |00>,|01>,|10>,|11>")
    e_probabilities: list[float] = Field(..., description="Alice's E outcome law given m = 0")
    bob_states_after_e: list[Optional[InputQubit]]
    branch_joint: list[JointProbability]
    joint: list[JointProbability] = Field(..., description="E/m law summed over Bell outcomes")
    branch_mutual_information: float
    success_given_e1: Optional[float]


class Eavesdropper(str, Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept-resend"


class DecoyBasis(str, Enum):
    COMPUTATIONAL = "computational"
    DIAGONAL = "diagonal"


class DecoyState(BaseModel):
    position: int = Field(..., ge=0)
    basis: DecoyBasis
    value: int = Field(..., ge=0, le=1)


class SharingConfig(BaseModel):
    n: int = Field(..., ge=1, description="pairs to keep")
    m: int = Field(..., ge=1, description="pairs sacrificed for eta verification")
    k: int = Field(..., ge=1, description="decoy count")
    eavesdropper: Eavesdropper = Eavesdropper.NONE
    seed: int = Field(0, ge=0, lt=2**64)

    model_config = ConfigDict(frozen=True)


class SharingReport(BaseModel):
    seed: int
    decoys: list[DecoyState]
    decoy_error_count: int
    decoy_tests: int
    eta_outcomes: list[int]
    eta_deviation_count: int
    kept_pairs: int
    kept_fidelity_min: float
    accepted: bool

    @model_validator(mode="after")
    def check_accepted(self):
        expected = self.decoy_error_count == 0 and all(outcome == 1 for outcome in self.eta_outcomes)
        if self.accepted != expected:
            raise ValueError("accepted must hold exactly when no decoy error and every eta outcome is 1")
        return self


class EstablishmentResult(BaseModel):
    accepted: bool
    attempts: int
    reports: list[SharingReport]


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunSpec(BaseModel):
    """Validated command-line request shared by every subcommand."""

    subcommand: str
    b2: float = Field(..., gt=0.0, lt=0.5, description="|b|^2 of the channel")
    state: InputQubit
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    output_format: OutputFormat = OutputFormat.JSON
    out: Optional[str] = None
    workers: int = Field(1, ge=1)

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams.from_b2(self.b2)


class TranscriptOut(BaseModel):
    seed: int
    b2: float
    input: InputQubit
    bm_outcome: int
    m_outcome: int
    success: bool
    bob_state: Optional[InputQubit]
    fidelity: float

    @classmethod
    def from_transcript(cls, transcript: Transcript) -> "TranscriptOut":
        return cls(
            seed=transcript.seed,
            b2=transcript.channel.b2,
            input=transcript.input,
            bm_outcome=int(transcript.bm_outcome),
            m_outcome=transcript.m_outcome,
            success=transcript.success,
            bob_state=transcript.bob_state,
            fidelity=transcript.recovered_fidelity,
        )


class BranchFrequency(BaseModel):
    bm_outcome: int
    m_outcome: int
    analytic: float
    empirical: float
    stderr: float
    sigma: float


class TeleportReport(BaseModel):
    b2: float
    input: InputQubit
    seed: int
    trials: int
    analytic_success: float
    branches: list[OutcomeBranch]
    empirical: Optional[list[BranchFrequency]] = None
    empirical_success: Optional[float] = None
    stderr: Optional[float] = None
    agreement: bool = True


class CurvePoint(BaseModel):
    n: int
    closed_form: float
    empirical: Optional[float] = None


class OtReport(BaseModel):
    mode: Literal["qubit", "bit"]
    b2: float
    seed: int
    trials: int
    encoding: Optional[str] = None
    bit: Optional[int] = None
    learn_rate: float
    learn_rate_stderr: float
    analytic_learn_rate: float
    decode_accuracy: Optional[float] = None
    flags: list[str] = []
    curve: list[CurvePoint] = []


class AttackReport(BaseModel):
    attack: str
    b2: float
    input: InputQubit
    outcomes: list[EntangleAttackOutcome | AttackOutcome]
    notes: list[str] = []


class ChannelSummary(BaseModel):
    runs: int
    accepted_runs: int
    rejection_rate: float
    decoy_detection_rate: float
    closed_form_rejection: float
    closed_form_decoy_detection: float
    first_report: SharingReport


class SweepRow(BaseModel):
    b2: float
    analytic_p: float
    empirical_p: float
    stderr: float
    trials: int

    @field_validator("b2")
    def check_b2(cls, value):
        if not 0.0 < value < 0.5:
            raise ValueError("b2 must lie in (0, 0.5)")
        return value


SWEEP_COLUMNS = tuple(SweepRow.model_fields)
