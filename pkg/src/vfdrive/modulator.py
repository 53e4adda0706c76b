"""Carrier-based PWM gate generation for a three-phase inverter.

Three modulating-waveform schemes share one pipeline: signed sine-table
reads 120 degrees apart, optional zero-sequence injection (third
harmonic or min/max common-mode), modulation-index scaling with a linear
soft-start ramp, and strict comparison against a sawtooth carrier built
from an up-counter. All three schemes are normalized so the fundamental
of the scaled reference equals m; the injected zero-sequence cancels in
line quantities, which is what makes the schemes comparable at equal m
and extends the usable range to m = 2/sqrt(3).
"""

import enum
import math
from dataclasses import dataclass, field, replace

from .dds import tuning_word as dds_tuning_word
from .lut import LutTable, build_sine_lut, round_half_away

ACC_WIDTH = 32          # drive-core accumulator width (bits)
SQRT3 = math.sqrt(3.0)
M_LIMIT_ZS = 2.0 / SQRT3    # linear limit with zero-sequence injection
M_LIMIT_SINE = 1.0          # linear limit of the plain sine reference


class PwmScheme(enum.Enum):
    SPWM = "spwm"
    THI_SPWM = "thi"
    SVPWM = "svpwm"


@dataclass(frozen=True)
class PhaseTriple:
    """Normalized modulating values for the three phases."""

    va: float
    vb: float
    vc: float

    def __iter__(self):
        return iter((self.va, self.vb, self.vc))


@dataclass(frozen=True)
class GateState:
    """Switch commands for the three inverter legs.

    upper/lower hold (U, V, W) booleans. Outside dead time the lower
    switch is the complement of the upper; during dead time both are
    False. Both True never occurs.
    """

    upper: tuple
    lower: tuple


@dataclass(frozen=True)
class DriveConfig:
    """All drive parameters. Defaults are the 120 V / 4 kHz / 60 Hz preset.

    The carrier counter runs from carrier_lo to carrier_hi - 1 at
    clock_hz, so carrier_hi - carrier_lo counts make one carrier period
    (25000 counts = 250 us = 4 kHz at defaults). References are mapped
    into the same counter units around the carrier midpoint. decimation
    trades edge resolution for speed: the simulation ticks every
    `decimation` clock cycles (10 -> 10 MHz effective tick).
    """

    vdc: float = 120.0
    f_carrier: float = 4000.0
    f_ref: float = 60.0
    scheme: PwmScheme = PwmScheme.SPWM
    m_target: float = 0.6
    soft_start_duration: float = 0.5
    soft_start_profile: str = "linear"
    clock_hz: float = 100_000_000.0
    decimation: int = 10
    dead_time: float = 0.0
    carrier_lo: int = 125_000
    carrier_hi: int = 150_000
    lut_size: int = 3600
    lut_midpoint: int = 137_500
    lut_amplitude: int = 12_500

    def __post_init__(self):
        period = self.carrier_hi - self.carrier_lo
        if period <= 0:
            raise ValueError("carrier_hi must exceed carrier_lo")
        if abs(period * self.f_carrier - self.clock_hz) > 1e-6 * self.clock_hz:
            raise ValueError(
                f"carrier range {period} counts at {self.clock_hz:g} Hz clock gives "
                f"{self.clock_hz / period:g} Hz, not the configured f_carrier "
                f"{self.f_carrier:g} Hz")
        if self.decimation < 1 or period % self.decimation != 0:
            raise ValueError(
                f"decimation {self.decimation} must divide the carrier period {period}")
        if not 5.0 <= self.f_ref <= 100.0:
            raise ValueError(f"f_ref must be in [5, 100] Hz, got {self.f_ref}")
        if not 0.0 < self.m_target <= M_LIMIT_ZS + 1e-12:
            raise ValueError(
                f"m_target must be in (0, 2/sqrt(3)], got {self.m_target}")
        if self.soft_start_duration < 0:
            raise ValueError("soft_start_duration must be >= 0")
        if self.soft_start_profile != "linear":
            raise ValueError(
                f"unknown soft-start profile {self.soft_start_profile!r}")
        if self.dead_time < 0:
            raise ValueError("dead_time must be >= 0")
        if self.lut_size % 3 != 0:
            raise ValueError("lut_size must be divisible by 3 for a three-phase drive")

    @property
    def carrier_period_counts(self) -> int:
        return self.carrier_hi - self.carrier_lo

    @property
    def tick_dt(self) -> float:
        return self.decimation / self.clock_hz

    @property
    def dead_ticks(self) -> int:
        return round_half_away(self.dead_time * self.clock_hz / self.decimation)

    def build_lut(self) -> LutTable:
        return build_sine_lut(self.lut_size, self.lut_midpoint, self.lut_amplitude)


def reference_triple(theta_index: int, lut: LutTable,
                     scheme: PwmScheme) -> PhaseTriple:
    """Modulating triple at one table angle, before m scaling.

    Base phases are signed table reads at indices {i, i - size/3,
    i - 2*size/3} (mod size), normalized by the table amplitude. THI adds
    one sixth of the table read at the tripled index (the same value for
    all three phases, so it is a pure zero-sequence); SVPWM adds the
    min/max common-mode voltage. Every scheme keeps a unit-amplitude
    fundamental, so scaling by m puts the fundamental at exactly m.
    """
    size = lut.size
    if size % 3 != 0:
        raise ValueError("three-phase references need a table size divisible by 3")
    third = size // 3
    i = theta_index % size
    amp = float(lut.amplitude)
    mid = lut.midpoint
    va = (lut.entries[i] - mid) / amp
    vb = (lut.entries[(i - third) % size] - mid) / amp
    vc = (lut.entries[(i - 2 * third) % size] - mid) / amp
    if scheme is PwmScheme.SPWM:
        return PhaseTriple(va, vb, vc)
    if scheme is PwmScheme.THI_SPWM:
        v3 = (lut.entries[(3 * i) % size] - mid) / amp / 6.0
        return PhaseTriple(va + v3, vb + v3, vc + v3)
    if scheme is PwmScheme.SVPWM:
        cmv = common_mode_voltage(PhaseTriple(va, vb, vc))
        return PhaseTriple(va + cmv, vb + cmv, vc + cmv)
    raise ValueError(f"unknown scheme {scheme!r}")


def common_mode_voltage(t: PhaseTriple) -> float:
    """-(max + min)/2 of the three phases: the space-vector-equivalent
    zero-sequence injection."""
    return -0.5 * (max(t.va, t.vb, t.vc) + min(t.va, t.vb, t.vc))


def carrier_value(clock_count: int, cfg: DriveConfig) -> int:
    """Sawtooth sample from the free-running up-counter at a clock count."""
    return cfg.carrier_lo + clock_count % cfg.carrier_period_counts


def soft_start_m(t: float, cfg: DriveConfig) -> float:
    """Modulation index at time t: linear ramp to m_target, then flat."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if cfg.soft_start_duration == 0.0:
        return cfg.m_target
    return cfg.m_target * min(1.0, t / cfg.soft_start_duration)


def gate_compare(ref_scaled: int, carrier: int) -> bool:
    """Upper switch on iff reference strictly exceeds the carrier.

    Strict comparison makes a midpoint reference give exactly 50% duty.
    """
    return ref_scaled > carrier


def scale_reference(v: float, m: float, cfg: DriveConfig) -> int:
    """Map a normalized modulating value into carrier-counter units.

    midpoint + round(m * half_range * v), clamped to [carrier_lo,
    carrier_hi]. Clamping is what overmodulation saturation looks like.
    """
    mid = 0.5 * (cfg.carrier_lo + cfg.carrier_hi)
    half = 0.5 * (cfg.carrier_hi - cfg.carrier_lo)
    ref = round_half_away(mid + m * half * v)
    if ref < cfg.carrier_lo:
        return cfg.carrier_lo
    if ref > cfg.carrier_hi:
        return cfg.carrier_hi
    return ref


def fundamental_amplitude(scheme: PwmScheme, m: float, vdc: float) -> float:
    """Predicted peak of the fundamental pole (line-to-neutral) voltage.

    m * vdc / 2 for every scheme in its linear region: the injected
    zero-sequence never shows up in line quantities. The zero-sequence
    schemes stay linear up to m = 2/sqrt(3), plain sine up to 1.
    """
    limit = M_LIMIT_SINE if scheme is PwmScheme.SPWM else M_LIMIT_ZS
    if not 0.0 < m <= limit + 1e-12:
        raise ValueError(
            f"m={m} outside the linear range (0, {limit:.6f}] of {scheme.name}")
    return m * vdc / 2.0


def linear_range_limit(scheme: PwmScheme, lut: LutTable) -> float:
    """Largest m for which the scaled reference never leaves the carrier
    range, from a scan of every table angle (quantization included)."""
    peak = 0.0
    for i in range(lut.size):
        t = reference_triple(i, lut, scheme)
        peak = max(peak, abs(t.va), abs(t.vb), abs(t.vc))
    return 1.0 / peak


@dataclass
class LegState:
    """Dead-time bookkeeping for one inverter leg.

    active: which switch conducts once dead time has elapsed (True =
    upper). After every commanded transition the leg outputs both-off
    for exactly dead_ticks ticks, then the new command takes over.
    """

    active: bool
    pending: bool
    dead_remaining: int = 0

    def step(self, cmd: bool, dead_ticks: int) -> tuple:
        """Advance one tick; returns (upper_on, lower_on)."""
        if self.dead_remaining == 0:
            if cmd != self.active:
                if dead_ticks == 0:
                    self.active = cmd
                else:
                    self.pending = cmd
                    self.dead_remaining = dead_ticks
        else:
            if cmd != self.pending:
                # command flipped back mid dead time: restart the interval
                self.pending = cmd
                self.dead_remaining = dead_ticks
            else:
                self.dead_remaining -= 1
                if self.dead_remaining == 0:
                    self.active = self.pending
        if self.dead_remaining > 0:
            return False, False
        return self.active, not self.active


@dataclass
class DriveState:
    """Per-tick state of the drive core. Single-owner, strictly sequential."""

    accumulator: int
    clock_count: int
    legs: list
    lut: LutTable = field(repr=False)
    tuning_word: int
    lut_index: int = 0
    m: float = 0.0
    gates: GateState = None


def drive_init(cfg: DriveConfig, tuning_word_value: int = None,
               lut: LutTable = None) -> DriveState:
    """Fresh drive state at t=0 with the initial comparison applied.

    A prebuilt table may be passed to skip reconstruction; it must match
    the config's table geometry (the accumulator-to-index scaling uses
    cfg.lut_size).
    """
    word = tuning_word_value if tuning_word_value is not None else dds_tuning_word(
        cfg.f_ref, cfg.clock_hz, ACC_WIDTH)
    table = lut if lut is not None else cfg.build_lut()
    if (table.size, table.midpoint, table.amplitude) != (
            cfg.lut_size, cfg.lut_midpoint, cfg.lut_amplitude):
        raise ValueError("provided table does not match the config's LUT geometry")
    m0 = soft_start_m(0.0, cfg)
    triple = reference_triple(0, table, cfg.scheme)
    carrier = carrier_value(0, cfg)
    cmds = [gate_compare(scale_reference(v, m0, cfg), carrier) for v in triple]
    legs = [LegState(active=c, pending=c) for c in cmds]
    gates = GateState(upper=tuple(cmds), lower=tuple(not c for c in cmds))
    return DriveState(accumulator=0, clock_count=0, legs=legs, lut=table,
                      tuning_word=word, lut_index=0, m=m0, gates=gates)


def drive_tick(state: DriveState, cfg: DriveConfig) -> tuple:
    """Advance the drive by one tick (= decimation clock cycles).

    Accumulator and carrier counter advance, m is recomputed from the
    ramp, the three references are scaled and compared, and dead time is
    inserted. Pure function of (state, cfg) up to in-place state reuse:
    identical inputs always produce identical gate streams.
    """
    modulus = 1 << ACC_WIDTH
    state.accumulator = (state.accumulator + cfg.decimation * state.tuning_word) % modulus
    state.lut_index = (state.accumulator * cfg.lut_size) >> ACC_WIDTH
    state.clock_count += cfg.decimation
    carrier = carrier_value(state.clock_count, cfg)
    state.m = soft_start_m(state.clock_count / cfg.clock_hz, cfg)
    triple = reference_triple(state.lut_index, state.lut, cfg.scheme)
    dead_ticks = cfg.dead_ticks
    upper = []
    lower = []
    for leg, v in zip(state.legs, triple):
        cmd = gate_compare(scale_reference(v, state.m, cfg), carrier)
        up, low = leg.step(cmd, dead_ticks)
        upper.append(up)
        lower.append(low)
    state.gates = GateState(upper=tuple(upper), lower=tuple(lower))
    return state, state.gates


def with_scheme(cfg: DriveConfig, scheme: PwmScheme, m_target: float = None) -> DriveConfig:
    """Config variant helper used by scheme sweeps."""
    kwargs = {"scheme": scheme}
    if m_target is not None:
        kwargs["m_target"] = m_target
    return replace(cfg, **kwargs)
