"""p-Rabin qubit oblivious transfer through probabilistic teleportation."""

from .attacks import entangle_measure_attack, fake_bm_attack, unitary_attack
from .channel import establish_channel, share_channel
from .ot import concealment_check, ot_bit, ot_qubit, ot_repeated, repeated_ot_probability
from .qot_exceptions import QotError
from .schemas import ChannelParams, InputQubit, SharingConfig
from .teleport import run_analytic, run_batch, run_sampled, table1

__all__ = [
    "ChannelParams",
    "InputQubit",
    "QotError",
    "SharingConfig",
    "concealment_check",
    "entangle_measure_attack",
    "establish_channel",
    "fake_bm_attack",
    "ot_bit",
    "ot_qubit",
    "ot_repeated",
    "repeated_ot_probability",
    "run_analytic",
    "run_batch",
    "run_sampled",
    "share_channel",
    "table1",
    "unitary_attack",
]
