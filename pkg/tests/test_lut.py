import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfdrive.lut import (build_sine_lut, export_mem_init, lut_sample,
                         parse_mem_init, round_half_away)


@pytest.fixture(scope="module")
def default_lut():
    return build_sine_lut()


def test_default_table_anchor_values(default_lut):
    assert default_lut.entries[0] == 137500      # zero crossing
    assert default_lut.entries[900] == 150000    # positive peak
    assert default_lut.entries[2700] == 125000   # negative peak


def test_45_degree_entry(default_lut):
    # 12500*sin(pi/4) = 8838.8347..., rounded half away -> 8839
    assert default_lut.entries[450] == 146339


def test_tiny_table_cardinal_angles():
    table = build_sine_lut(4, 100, 50)
    assert list(table.entries) == [100, 150, 100, 50]


def test_rejects_bad_sizes():
    for size in (0, 3, 6, 9, 4242):
        if size % 4 != 0 or size < 4:
            with pytest.raises(ValueError):
                build_sine_lut(size, 100, 50)


def test_rejects_amplitude_above_midpoint():
    with pytest.raises(ValueError):
        build_sine_lut(3600, 100, 101)


def test_round_half_away_ties():
    assert round_half_away(0.5) == 1
    assert round_half_away(-0.5) == -1
    assert round_half_away(2.5) == 3
    assert round_half_away(-2.5) == -3
    assert round_half_away(0.49999) == 0


def _check_invariants(table):
    n = table.size
    assert len(table.entries) == n
    assert min(table.entries) == table.midpoint - table.amplitude
    assert max(table.entries) == table.midpoint + table.amplitude
    assert table.entries[0] == table.midpoint
    for i in range(n):
        assert table.entries[i] + table.entries[(i + n // 2) % n] == 2 * table.midpoint
    for i in range(n // 4 + 1):
        assert table.entries[i] == table.entries[n // 2 - i]


def test_default_invariants(default_lut):
    _check_invariants(default_lut)


@settings(max_examples=40, deadline=None)
@given(quarters=st.integers(min_value=1, max_value=64),
       midpoint=st.integers(min_value=1, max_value=10 ** 7),
       amp_frac=st.floats(min_value=0.01, max_value=1.0))
def test_invariants_property(quarters, midpoint, amp_frac):
    size = 4 * quarters
    amplitude = max(1, int(midpoint * amp_frac))
    table = build_sine_lut(size, midpoint, amplitude)
    _check_invariants(table)


def test_quantization_error_bound(default_lut):
    t = default_lut
    for i in range(t.size):
        ideal = t.midpoint + t.amplitude * math.sin(2 * math.pi * i / t.size)
        # half-LSB bound; the epsilon absorbs float noise in this oracle
        assert abs(t.entries[i] - ideal) <= 0.5 + 1e-6


def test_lut_sample_wraps(default_lut):
    assert lut_sample(default_lut, 3600) == 137500
    assert lut_sample(default_lut, 900) == 150000
    assert lut_sample(default_lut, 4500) == 150000
    assert lut_sample(default_lut, -900) == 125000


def test_export_decimal_first_line(default_lut):
    text = export_mem_init(default_lut, "decimal")
    lines = text.split("\n")
    assert lines[0] == "137500"
    assert text.endswith("\n")
    assert len([ln for ln in lines if ln]) == 3600


def test_export_hex_peak_line(default_lut):
    text = export_mem_init(default_lut, "hex")
    lines = text.splitlines()
    assert lines[900] == "249f0"   # 150000 in lowercase hex, no prefix


def test_export_tiny_table():
    table = build_sine_lut(4, 100, 50)
    assert export_mem_init(table, "decimal") == "100\n150\n100\n50\n"


def test_export_rejects_bad_radix(default_lut):
    with pytest.raises(ValueError):
        export_mem_init(default_lut, "octal")


@pytest.mark.parametrize("radix", ["decimal", "hex"])
def test_export_round_trip(default_lut, radix):
    text = export_mem_init(default_lut, radix)
    assert parse_mem_init(text, radix) == default_lut.entries
