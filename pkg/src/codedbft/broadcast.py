"""Consistent sender-attributable broadcast, modeled as an oracle.

Both protocols assume a black-box broadcast with two guarantees: every
processor observes the identical payload, and the sender identity
cannot be forged. The simulator gets both for free because a single
record object is what everyone observes; the adversary may pick a
faulty sender's payload or withhold it, but never split it. What is
left to model is cost: each payload bit is charged a configurable
multiple of n^2 transport bits, the scale at which bit-by-bit
error-free broadcast constructions operate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .diagnosis import ConfigurationError


@dataclass(frozen=True)
class BroadcastRecord:
    """One broadcast as observed identically by all n processors.

    payload is None when the sender stayed silent; payload_bits is the
    size of the honest encoding of this tag and is 0 for silence.
    """

    sender: int
    generation: int
    tag: str
    payload: Any
    payload_bits: int

    def is_nil(self) -> bool:
        return self.payload is None

    def to_jsonable(self) -> dict:
        return {
            "sender": self.sender,
            "generation": self.generation,
            "tag": self.tag,
            "payload": self.payload,
            "payload_bits": self.payload_bits,
        }


@dataclass(frozen=True)
class BroadcastCostModel:
    """Charged transport bits per payload bit, as a multiple of n^2."""

    coefficient: int = 1

    def __post_init__(self) -> None:
        if self.coefficient < 1:
            raise ConfigurationError(
                f"broadcast coefficient must be >= 1, got {self.coefficient}"
            )

    def per_payload_bit(self, n: int) -> int:
        return self.coefficient * n * n

    def charged_bits(self, n: int, payload_bits: int) -> int:
        return payload_bits * self.per_payload_bit(n)
