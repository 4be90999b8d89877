"""Concatenate the emulator and the lexical attack string; evaluate evasion."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .trigger_search import EmulatorString

SEPARATOR = " "
# Below this prefix length a subword encoder may not truncate the suffix away,
# so the similarity score of the combination is no longer the emulator's own.
MIN_EMULATOR_LENGTH = 512


@dataclass(frozen=True)
class CombinedOutput:
    """The universal attack string: non-alphanumeric prefix + broken-sentence tail."""

    emulator_part: str
    rouge_part: str

    @property
    def full(self) -> str:
        return self.emulator_part + SEPARATOR + self.rouge_part


def combine(emulator: EmulatorString | str, rouge_text: str) -> CombinedOutput:
    """Join the emulator prefix and the lexical attack text with a single space.

    The prefix must be purely non-alphanumeric (so rouge-mode tokenization of
    the combination equals that of ``rouge_text`` alone); a prefix shorter
    than ``MIN_EMULATOR_LENGTH`` raises a warning but still combines.
    """
    genome = emulator.genome if isinstance(emulator, EmulatorString) else emulator
    for ch in genome:
        if ch.isalnum():
            raise ValueError(f"emulator contains alphanumeric character {ch!r}")
    if not genome:
        raise ValueError("emulator must be non-empty")
    if len(genome) < MIN_EMULATOR_LENGTH:
        warnings.warn(
            f"emulator length {len(genome)} is below {MIN_EMULATOR_LENGTH}; the tail may leak "
            "into truncation-limited similarity scoring",
            stacklevel=2,
        )
    return CombinedOutput(genome, rouge_text)


def evasion_success(attack_score: float, baseline_score: float) -> bool:
    """True iff the attack strictly outscores the baseline (ties are not evasion)."""
    for value in (attack_score, baseline_score):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"scores must lie in [0, 1], got {value}")
    return attack_score > baseline_score
