"""Ideal two-level inverter feeding a delta RL load or an induction machine.

The machine is the textbook stationary-frame squirrel-cage model with
flux states and linear magnetics: four electrical states (stator/rotor
flux, two axes), speed and angle. Delta connection is modeled
explicitly: winding voltage equals line-line voltage and line current is
the difference of two winding currents, which is why the traces carry
both current sets.
"""

import math
from dataclasses import dataclass

import numpy as np

from .modulator import DriveConfig, GateState, drive_init, drive_tick

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class RlLoad:
    """Series RL per delta winding."""

    r: float
    l: float
    connection: str = "delta"

    def __post_init__(self):
        if self.r <= 0 or self.l <= 0:
            raise ValueError("r and l must be positive")
        if self.connection != "delta":
            raise ValueError("only delta connection is modeled")


@dataclass(frozen=True)
class MotorModel:
    """Squirrel-cage induction machine parameters.

    Defaults are a plausible small (about 200 W) four-pole machine; they
    are artifact choices, not nameplate data, so tests built on them
    check monotone and qualitative behaviour only.
    """

    rs: float = 11.0
    rr: float = 8.0
    lls: float = 0.035
    llr: float = 0.035
    lm: float = 0.55
    j: float = 0.001
    b: float = 5e-5
    pole_pairs: int = 2
    connection: str = "delta"

    def __post_init__(self):
        if min(self.rs, self.rr, self.lls, self.llr, self.lm, self.j) <= 0:
            raise ValueError("electrical parameters and inertia must be positive")
        if self.b < 0:
            raise ValueError("friction must be >= 0")
        if self.pole_pairs < 1:
            raise ValueError("pole_pairs must be >= 1")
        if self.connection != "delta":
            raise ValueError("only delta connection is modeled")


@dataclass(frozen=True)
class PlantState:
    """Machine state in the stationary two-axis frame.

    Fluxes in V*s, speed is the rotor electrical speed in rad/s, theta
    the mechanical angle. iw_* are the delta winding currents implied by
    the stator fluxes (cached for observers).
    """

    lam_as: float = 0.0
    lam_bs: float = 0.0
    lam_ar: float = 0.0
    lam_br: float = 0.0
    speed: float = 0.0
    theta: float = 0.0
    iw_uv: float = 0.0
    iw_vw: float = 0.0
    iw_wu: float = 0.0


def pole_voltages(g: GateState, vdc: float, prev: tuple = None) -> tuple:
    """Leg outputs referenced to the DC-bus midpoint: +vdc/2 with the
    upper switch on, -vdc/2 with the lower on. A leg in dead time holds
    its previous value (ideal-switch freewheeling approximation), so
    `prev` is required whenever any leg has both switches off.
    """
    out = []
    for k in range(3):
        if g.upper[k]:
            out.append(0.5 * vdc)
        elif g.lower[k]:
            out.append(-0.5 * vdc)
        else:
            if prev is None:
                raise ValueError("dead-time state needs previous pole voltages")
            out.append(prev[k])
    return tuple(out)


def line_voltages(poles: tuple) -> tuple:
    """(vUV, vVW, vWU) from pole voltages; the three sum to zero exactly."""
    vu, vv, vw = poles
    return (vu - vv, vv - vw, vw - vu)


def clarke(a: float, b: float, c: float) -> tuple:
    """Amplitude-invariant two-axis projection of a three-phase set."""
    return ((2.0 * a - b - c) / 3.0, (b - c) / SQRT3)


def inverse_clarke(alpha: float, beta: float) -> tuple:
    """Balanced (zero-sequence-free) three-phase set from two axes."""
    return (alpha,
            -0.5 * alpha + 0.5 * SQRT3 * beta,
            -0.5 * alpha - 0.5 * SQRT3 * beta)


def rl_step(currents: tuple, v: tuple, load: RlLoad, dt: float) -> tuple:
    """One trapezoidal step of L di/dt = v - R i per delta winding.

    v holds the line-line (= winding) voltages, constant over the step.
    dt must satisfy dt <= l / (10 r); coarser steps are rejected rather
    than silently integrated inaccurately.
    """
    if dt <= 0 or dt > load.l / (10.0 * load.r):
        raise ValueError(
            f"dt={dt:g} outside (0, l/(10r)]={load.l / (10.0 * load.r):g}")
    a = load.r * dt / (2.0 * load.l)
    decay = (1.0 - a) / (1.0 + a)
    gain = dt / (load.l * (1.0 + a))
    return tuple(decay * i + gain * u for i, u in zip(currents, v))


def rl_line_currents(currents: tuple) -> tuple:
    """Line currents of a delta load: differences of winding currents."""
    i_uv, i_vw, i_wu = currents
    return (i_uv - i_wu, i_vw - i_uv, i_wu - i_vw)


def _machine_derivs(motor: MotorModel, st: tuple, va: float, vb: float,
                    t_load: float) -> tuple:
    """Flux/speed derivatives in the stationary frame.

    Stator: dlam_s = v - rs*i_s. Rotor (shorted): dlam_r = -rr*i_r with
    speed cross-coupling. Torque (3/2)*P*(lam_as*ibs - lam_bs*ias).
    """
    lam_as, lam_bs, lam_ar, lam_br, we = st
    ls = motor.lls + motor.lm
    lr = motor.llr + motor.lm
    inv_det = 1.0 / (ls * lr - motor.lm * motor.lm)
    ias = (lr * lam_as - motor.lm * lam_ar) * inv_det
    ibs = (lr * lam_bs - motor.lm * lam_br) * inv_det
    iar = (ls * lam_ar - motor.lm * lam_as) * inv_det
    ibr = (ls * lam_br - motor.lm * lam_bs) * inv_det
    te = 1.5 * motor.pole_pairs * (lam_as * ibs - lam_bs * ias)
    p = float(motor.pole_pairs)
    return (va - motor.rs * ias,
            vb - motor.rs * ibs,
            -motor.rr * iar - we * lam_br,
            -motor.rr * ibr + we * lam_ar,
            p * (te - t_load - motor.b * we / p) / motor.j)


def im_step(state: PlantState, v_lines: tuple, motor: MotorModel,
            t_load: float, dt: float) -> PlantState:
    """One fixed-step RK4 advance of the machine with held voltages."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not all(math.isfinite(v) for v in v_lines):
        raise ValueError("non-finite line voltages")
    va, vb = clarke(*v_lines)
    s0 = (state.lam_as, state.lam_bs, state.lam_ar, state.lam_br, state.speed)
    k1 = _machine_derivs(motor, s0, va, vb, t_load)
    s1 = tuple(x + 0.5 * dt * k for x, k in zip(s0, k1))
    k2 = _machine_derivs(motor, s1, va, vb, t_load)
    s2 = tuple(x + 0.5 * dt * k for x, k in zip(s0, k2))
    k3 = _machine_derivs(motor, s2, va, vb, t_load)
    s3 = tuple(x + dt * k for x, k in zip(s0, k3))
    k4 = _machine_derivs(motor, s3, va, vb, t_load)
    nxt = tuple(x + dt / 6.0 * (a + 2 * b + 2 * c + d)
                for x, a, b, c, d in zip(s0, k1, k2, k3, k4))
    if not all(math.isfinite(x) for x in nxt):
        raise ValueError("machine state diverged (non-finite)")
    lam_as, lam_bs, lam_ar, lam_br, we = nxt
    ls = motor.lls + motor.lm
    lr = motor.llr + motor.lm
    inv_det = 1.0 / (ls * lr - motor.lm * motor.lm)
    ias = (lr * lam_as - motor.lm * lam_ar) * inv_det
    ibs = (lr * lam_bs - motor.lm * lam_br) * inv_det
    iw = inverse_clarke(ias, ibs)
    theta = state.theta + dt * we / motor.pole_pairs
    return PlantState(lam_as=lam_as, lam_bs=lam_bs, lam_ar=lam_ar,
                      lam_br=lam_br, speed=we, theta=theta,
                      iw_uv=iw[0], iw_vw=iw[1], iw_wu=iw[2])


@dataclass
class Trace:
    """Uniformly sampled waveform record with config echo in metadata."""

    sample_period: float
    channels: dict
    metadata: dict

    def __post_init__(self):
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise ValueError("all channels must have equal length")
        if self.sample_period <= 0:
            raise ValueError("sample period must be positive")

    @property
    def n_samples(self) -> int:
        return len(next(iter(self.channels.values())))

    def time(self):
        return np.arange(self.n_samples) * self.sample_period

    def channel(self, name: str):
        return self.channels[name]


def _config_echo(cfg: DriveConfig, load, duration: float, sample_hz: float) -> dict:
    md = {
        "vdc": cfg.vdc, "f_carrier": cfg.f_carrier, "f_ref": cfg.f_ref,
        "scheme": cfg.scheme.value, "m_target": cfg.m_target,
        "soft_start_duration": cfg.soft_start_duration,
        "soft_start_profile": cfg.soft_start_profile,
        "clock_hz": cfg.clock_hz, "decimation": cfg.decimation,
        "dead_time": cfg.dead_time,
        "carrier_lo": cfg.carrier_lo, "carrier_hi": cfg.carrier_hi,
        "lut_size": cfg.lut_size, "lut_midpoint": cfg.lut_midpoint,
        "lut_amplitude": cfg.lut_amplitude,
        "carrier_kind": "sawtooth",
        "duration": duration, "sample_hz": sample_hz,
    }
    if isinstance(load, RlLoad):
        md["load"] = {"kind": "rl", "r": load.r, "l": load.l,
                      "connection": load.connection}
    else:
        md["load"] = {"kind": "motor", "rs": load.rs, "rr": load.rr,
                      "lls": load.lls, "llr": load.llr, "lm": load.lm,
                      "j": load.j, "b": load.b,
                      "pole_pairs": load.pole_pairs,
                      "connection": load.connection}
    return md


def simulate(cfg: DriveConfig, load, duration: float, sample_hz: float,
             t_load: float = 0.0) -> Trace:
    """Run drive and plant on a common tick; decimate samples to sample_hz.

    Channels: pole voltages v_u/v_v/v_w, line-line voltages v_uv/v_vw/
    v_wu, line currents i_a/i_b/i_c, winding currents i_uv/i_vw/i_wu,
    modulation index m, and speed_mech (motor only). Deterministic:
    identical inputs give bit-identical traces.
    """
    from . import _kernels

    if duration <= 0:
        raise ValueError("duration must be positive")
    if sample_hz < 10.0 * cfg.f_carrier:
        raise ValueError(
            f"sample_hz {sample_hz:g} < 10*f_carrier {10 * cfg.f_carrier:g}; "
            "switching detail would be lost")
    tick_hz = cfg.clock_hz / cfg.decimation
    stride_f = tick_hz / sample_hz
    stride = round(stride_f)
    if stride < 1 or abs(stride_f - stride) > 1e-9 * stride_f:
        raise ValueError(
            f"sample_hz {sample_hz:g} must divide the tick rate {tick_hz:g}")
    dt = cfg.tick_dt
    if isinstance(load, RlLoad):
        # same guard as rl_step; the kernel uses the identical update
        if dt > load.l / (10.0 * load.r):
            raise ValueError(
                f"tick dt={dt:g} violates the RL guard l/(10r)="
                f"{load.l / (10.0 * load.r):g}; lower decimation or raise l/r")
    n_ticks = round(duration * tick_hz)

    state = drive_init(cfg)
    lut_entries = np.asarray(state.lut.entries, dtype=np.int64)
    scheme_code = {"spwm": 0, "thi": 1, "svpwm": 2}[cfg.scheme.value]
    args = (lut_entries, cfg.lut_size, cfg.lut_midpoint, float(cfg.lut_amplitude),
            state.tuning_word, cfg.decimation, cfg.carrier_lo, cfg.carrier_hi,
            cfg.carrier_period_counts, cfg.clock_hz, cfg.m_target,
            cfg.soft_start_duration, cfg.dead_ticks, scheme_code, cfg.vdc,
            n_ticks, stride)
    if isinstance(load, RlLoad):
        vu, vv, vw, iw1, iw2, iw3, m_arr = _kernels.run_rl(
            *args, load.r, load.l)
        speed = None
    else:
        vu, vv, vw, iw1, iw2, iw3, m_arr, speed = _kernels.run_motor(
            *args, load.rs, load.rr, load.lls, load.llr, load.lm,
            load.j, load.b, float(load.pole_pairs), t_load)

    channels = {
        "v_u_V": vu, "v_v_V": vv, "v_w_V": vw,
        "v_uv_V": vu - vv, "v_vw_V": vv - vw, "v_wu_V": vw - vu,
        "i_a_A": iw1 - iw3, "i_b_A": iw2 - iw1, "i_c_A": iw3 - iw2,
        "i_uv_A": iw1, "i_vw_A": iw2, "i_wu_A": iw3,
        "m": m_arr,
    }
    if speed is not None:
        channels["speed_mech_rad_s"] = speed
    return Trace(sample_period=1.0 / sample_hz, channels=channels,
                 metadata=_config_echo(cfg, load, duration, sample_hz))


def simulate_python(cfg: DriveConfig, load, duration: float, sample_hz: float,
                    t_load: float = 0.0) -> Trace:
    """Pure-Python reference of simulate(); slow, used for cross-checks."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    tick_hz = cfg.clock_hz / cfg.decimation
    stride = round(tick_hz / sample_hz)
    dt = cfg.tick_dt
    n_ticks = round(duration * tick_hz)
    state = drive_init(cfg)
    is_rl = isinstance(load, RlLoad)
    iw = (0.0, 0.0, 0.0)
    pstate = PlantState()
    poles = pole_voltages(state.gates, cfg.vdc)
    rows = []

    def snapshot():
        if is_rl:
            cur = iw
            speed = None
        else:
            cur = (pstate.iw_uv, pstate.iw_vw, pstate.iw_wu)
            speed = pstate.speed / load.pole_pairs
        rows.append((poles, cur, state.m, speed))

    snapshot()
    for n in range(n_ticks):
        vl = line_voltages(poles)
        if is_rl:
            iw = rl_step(iw, vl, load, dt)
        else:
            pstate = im_step(pstate, vl, load, t_load, dt)
        state, gates = drive_tick(state, cfg)
        poles = pole_voltages(gates, cfg.vdc, prev=poles)
        if (n + 1) % stride == 0:
            snapshot()

    vu = np.array([r[0][0] for r in rows])
    vv = np.array([r[0][1] for r in rows])
    vw = np.array([r[0][2] for r in rows])
    iw1 = np.array([r[1][0] for r in rows])
    iw2 = np.array([r[1][1] for r in rows])
    iw3 = np.array([r[1][2] for r in rows])
    m_arr = np.array([r[2] for r in rows])
    channels = {
        "v_u_V": vu, "v_v_V": vv, "v_w_V": vw,
        "v_uv_V": vu - vv, "v_vw_V": vv - vw, "v_wu_V": vw - vu,
        "i_a_A": iw1 - iw3, "i_b_A": iw2 - iw1, "i_c_A": iw3 - iw2,
        "i_uv_A": iw1, "i_vw_A": iw2, "i_wu_A": iw3,
        "m": m_arr,
    }
    if not is_rl:
        channels["speed_mech_rad_s"] = np.array([r[3] for r in rows])
    return Trace(sample_period=1.0 / sample_hz, channels=channels,
                 metadata=_config_echo(cfg, load, duration, sample_hz))
