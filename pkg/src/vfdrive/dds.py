"""Fixed-point phase accumulator for variable-frequency synthesis.

A W-bit accumulator advances by a tuning word each clock; its scaled top
portion indexes the sine table. This subsumes the integer "one index per
N clocks" counter style: the accumulator hits any frequency on a
clock_hz/2^W grid instead of only integer clock divisions.
"""

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_WIDTH = 32
DEFAULT_CLOCK_HZ = 100_000_000


@dataclass
class DdsState:
    """Single-owner accumulator state; step sequentially."""

    tuning_word: int
    accumulator: int = 0
    clock_hz: float = DEFAULT_CLOCK_HZ
    lut_size: int = 3600
    width: int = DEFAULT_WIDTH

    def __post_init__(self):
        if self.tuning_word < 1:
            raise ValueError("tuning_word must be >= 1")
        if self.tuning_word >= 2 ** self.width:
            raise ValueError("tuning_word must fit in the accumulator width")
        if not 0 <= self.accumulator < 2 ** self.width:
            raise ValueError("accumulator out of range")


def tuning_word(f_ref: float, clock_hz: float = DEFAULT_CLOCK_HZ,
                width: int = DEFAULT_WIDTH) -> int:
    """Phase increment for a target frequency: round(f_ref * 2^width / clock_hz).

    Rounding is to nearest (ties away from zero), done in exact rational
    arithmetic, so |synthesized - target| <= clock_hz / 2^(width+1).
    """
    if f_ref <= 0:
        raise ValueError(f"f_ref must be positive, got {f_ref}")
    if f_ref > clock_hz / 2:
        raise ValueError(f"f_ref {f_ref} Hz aliases above clock_hz/2")
    exact = Fraction(f_ref) * 2 ** width / Fraction(clock_hz)
    word = int(exact)
    if exact - word >= Fraction(1, 2):
        word += 1
    if word == 0:
        raise ValueError(
            f"f_ref {f_ref} Hz is below half a frequency quantum at width {width}")
    return word


def dds_step(state: DdsState) -> tuple:
    """Advance one clock. Returns (state, lut_index).

    accumulator' = (accumulator + tuning_word) mod 2^W
    lut_index    = floor(accumulator' * lut_size / 2^W), in [0, lut_size)

    The index mapping truncates (standard phase truncation).
    """
    modulus = 1 << state.width
    state.accumulator = (state.accumulator + state.tuning_word) % modulus
    lut_index = (state.accumulator * state.lut_size) >> state.width
    return state, lut_index


def actual_frequency(state: DdsState) -> Fraction:
    """Exact synthesized frequency: tuning_word * clock_hz / 2^W.

    Returned as a Fraction so DDS quantization can be reported without
    floating-point noise.
    """
    return Fraction(state.tuning_word) * Fraction(state.clock_hz) / 2 ** state.width
