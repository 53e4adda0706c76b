"""Quantized offset-binary sine lookup table.

The table is the phase-to-amplitude store of the drive's waveform
synthesizer: unsigned entries around a midpoint, with the amplitude in
carrier-counter units so table values can be compared directly against
the sawtooth counter. Defaults give a 3600-entry table (0.1 deg per
index) spanning 125000..150000 around 137500.
"""

import math
from dataclasses import dataclass

DEFAULT_SIZE = 3600
DEFAULT_MIDPOINT = 137500
DEFAULT_AMPLITUDE = 12500


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero.

    Symmetric in sign, so quantizing sin keeps +/- pairs exact; banker's
    rounding would break the half-wave identity at half-LSB points.
    """
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


@dataclass(frozen=True)
class LutTable:
    """Immutable sine table; safe to share across concurrent readers."""

    entries: tuple
    size: int
    midpoint: int
    amplitude: int


def build_sine_lut(size: int = DEFAULT_SIZE,
                   midpoint: int = DEFAULT_MIDPOINT,
                   amplitude: int = DEFAULT_AMPLITUDE) -> LutTable:
    """Build the quantized sine table.

    entries[i] = midpoint + round(amplitude * sin(2*pi*i/size)), rounded
    half away from zero. The first quadrant is computed and the rest
    mirrored, so the half-wave and quarter-wave symmetries hold exactly
    regardless of floating-point sin behaviour.
    """
    if size < 4 or size % 4 != 0:
        raise ValueError(f"size must be >= 4 and divisible by 4, got {size}")
    if amplitude > midpoint:
        raise ValueError(
            f"amplitude {amplitude} exceeds midpoint {midpoint} (unsigned underflow)")

    quarter = size // 4
    half = size // 2
    entries = [0] * size
    for i in range(quarter + 1):
        q = round_half_away(amplitude * math.sin(2.0 * math.pi * i / size))
        entries[i] = midpoint + q
        entries[half - i] = midpoint + q
        entries[half + i] = midpoint - q
        if i > 0:
            entries[size - i] = midpoint - q
    return LutTable(entries=tuple(entries), size=size,
                    midpoint=midpoint, amplitude=amplitude)


def lut_sample(table: LutTable, index: int) -> int:
    """Read one entry; the index wraps modulo the table size."""
    return table.entries[index % table.size]


def lut_signed(table: LutTable, index: int) -> int:
    """Entry minus midpoint: the signed value downstream consumers use."""
    return table.entries[index % table.size] - table.midpoint


def export_mem_init(table: LutTable, radix: str = "decimal") -> str:
    """Render the table as a memory-init text block.

    One entry per line in index order, newline-terminated, LF endings.
    Hex is lowercase without prefix. The output doubles as a golden
    vector file for HDL testbenches ($readmemh-compatible for hex).
    """
    if radix == "decimal":
        lines = [str(e) for e in table.entries]
    elif radix == "hex":
        lines = [format(e, "x") for e in table.entries]
    else:
        raise ValueError(f"radix must be 'decimal' or 'hex', got {radix!r}")
    return "\n".join(lines) + "\n"


def parse_mem_init(text: str, radix: str = "decimal") -> tuple:
    """Inverse of export_mem_init: entry values in index order."""
    base = {"decimal": 10, "hex": 16}[radix]
    return tuple(int(line, base) for line in text.splitlines() if line)
