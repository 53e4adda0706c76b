"""Compiled tick loops behind plant.simulate.

Each kernel replicates, operation for operation, the pure-Python path
drive_tick -> pole_voltages -> rl_step/im_step so the two stay
bit-compatible; tests assert the equivalence. Keep any arithmetic
change here in sync with modulator.py / plant.py.
"""

import math

import numpy as np
from numba import njit

ACC_WIDTH = 32


@njit(cache=True)
def _round_half_away(x):
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


@njit(cache=True)
def _ref_triple(entries, size, mid, amp, idx, scheme):
    third = size // 3
    ia = idx % size
    ib = (ia - third) % size
    ic = (ia - 2 * third) % size
    va = (entries[ia] - mid) / amp
    vb = (entries[ib] - mid) / amp
    vc = (entries[ic] - mid) / amp
    if scheme == 1:  # third-harmonic injection
        v3 = (entries[(3 * ia) % size] - mid) / amp / 6.0
        va = va + v3
        vb = vb + v3
        vc = vc + v3
    elif scheme == 2:  # min/max common-mode injection
        cmv = -0.5 * (max(va, max(vb, vc)) + min(va, min(vb, vc)))
        va = va + cmv
        vb = vb + cmv
        vc = vc + cmv
    return va, vb, vc


@njit(cache=True)
def _scale_ref(v, m, mid_c, half_c, lo, hi):
    ref = _round_half_away(mid_c + m * half_c * v)
    if ref < lo:
        return lo
    if ref > hi:
        return hi
    return ref


@njit(cache=True)
def _leg_step(active, pending, dead_remaining, cmd, dead_ticks):
    """Mirrors modulator.LegState.step. Returns (active, pending,
    dead_remaining, upper_on, lower_on)."""
    if dead_remaining == 0:
        if cmd != active:
            if dead_ticks == 0:
                active = cmd
            else:
                pending = cmd
                dead_remaining = dead_ticks
    else:
        if cmd != pending:
            pending = cmd
            dead_remaining = dead_ticks
        else:
            dead_remaining -= 1
            if dead_remaining == 0:
                active = pending
    if dead_remaining > 0:
        return active, pending, dead_remaining, False, False
    return active, pending, dead_remaining, active, not active


@njit(cache=True)
def _machine_derivs(rs, rr, lls, llr, lm, jin, bfric, p,
                    lam_as, lam_bs, lam_ar, lam_br, we, va, vb, t_load):
    ls = lls + lm
    lr = llr + lm
    inv_det = 1.0 / (ls * lr - lm * lm)
    ias = (lr * lam_as - lm * lam_ar) * inv_det
    ibs = (lr * lam_bs - lm * lam_br) * inv_det
    iar = (ls * lam_ar - lm * lam_as) * inv_det
    ibr = (ls * lam_br - lm * lam_bs) * inv_det
    te = 1.5 * p * (lam_as * ibs - lam_bs * ias)
    return (va - rs * ias,
            vb - rs * ibs,
            -rr * iar - we * lam_br,
            -rr * ibr + we * lam_ar,
            p * (te - t_load - bfric * we / p) / jin)


@njit(cache=True)
def run_rl(entries, size, lut_mid, lut_amp, word, decimation, lo, hi,
           period, clock_hz, m_target, soft_dur, dead_ticks, scheme, vdc,
           n_ticks, stride, r, l):
    modulus = 1 << ACC_WIDTH
    mid_c = 0.5 * (lo + hi)
    half_c = 0.5 * (hi - lo)
    dt = decimation / clock_hz
    a = r * dt / (2.0 * l)
    decay = (1.0 - a) / (1.0 + a)
    gain = dt / (l * (1.0 + a))

    n_samples = n_ticks // stride + 1
    out_vu = np.empty(n_samples)
    out_vv = np.empty(n_samples)
    out_vw = np.empty(n_samples)
    out_i1 = np.empty(n_samples)
    out_i2 = np.empty(n_samples)
    out_i3 = np.empty(n_samples)
    out_m = np.empty(n_samples)

    acc = 0
    count = 0
    m = m_target if soft_dur == 0.0 else 0.0
    va0, vb0, vc0 = _ref_triple(entries, size, lut_mid, lut_amp, 0, scheme)
    carrier = lo
    au = _scale_ref(va0, m, mid_c, half_c, lo, hi) > carrier
    av = _scale_ref(vb0, m, mid_c, half_c, lo, hi) > carrier
    aw = _scale_ref(vc0, m, mid_c, half_c, lo, hi) > carrier
    pu, pv, pw = au, av, aw
    du = dv = dw = 0
    vu = 0.5 * vdc if au else -0.5 * vdc
    vv = 0.5 * vdc if av else -0.5 * vdc
    vw = 0.5 * vdc if aw else -0.5 * vdc
    i1 = i2 = i3 = 0.0

    s = 0
    out_vu[s] = vu; out_vv[s] = vv; out_vw[s] = vw
    out_i1[s] = i1; out_i2[s] = i2; out_i3[s] = i3
    out_m[s] = m
    s += 1

    for n in range(n_ticks):
        # plant over this tick with held voltages
        i1 = decay * i1 + gain * (vu - vv)
        i2 = decay * i2 + gain * (vv - vw)
        i3 = decay * i3 + gain * (vw - vu)
        # drive advance
        acc = (acc + decimation * word) % modulus
        idx = (acc * size) >> ACC_WIDTH
        count += decimation
        carrier = lo + count % period
        t = count / clock_hz
        m = m_target if soft_dur == 0.0 else m_target * min(1.0, t / soft_dur)
        va, vb, vc = _ref_triple(entries, size, lut_mid, lut_amp, idx, scheme)
        cu = _scale_ref(va, m, mid_c, half_c, lo, hi) > carrier
        cv = _scale_ref(vb, m, mid_c, half_c, lo, hi) > carrier
        cw = _scale_ref(vc, m, mid_c, half_c, lo, hi) > carrier
        au, pu, du, upu, lou = _leg_step(au, pu, du, cu, dead_ticks)
        av, pv, dv, upv, lov = _leg_step(av, pv, dv, cv, dead_ticks)
        aw, pw, dw, upw, low_ = _leg_step(aw, pw, dw, cw, dead_ticks)
        if upu:
            vu = 0.5 * vdc
        elif lou:
            vu = -0.5 * vdc
        if upv:
            vv = 0.5 * vdc
        elif lov:
            vv = -0.5 * vdc
        if upw:
            vw = 0.5 * vdc
        elif low_:
            vw = -0.5 * vdc
        if (n + 1) % stride == 0:
            out_vu[s] = vu; out_vv[s] = vv; out_vw[s] = vw
            out_i1[s] = i1; out_i2[s] = i2; out_i3[s] = i3
            out_m[s] = m
            s += 1
    return out_vu, out_vv, out_vw, out_i1, out_i2, out_i3, out_m


@njit(cache=True)
def run_motor(entries, size, lut_mid, lut_amp, word, decimation, lo, hi,
              period, clock_hz, m_target, soft_dur, dead_ticks, scheme, vdc,
              n_ticks, stride, rs, rr, lls, llr, lm, jin, bfric, p, t_load):
    modulus = 1 << ACC_WIDTH
    mid_c = 0.5 * (lo + hi)
    half_c = 0.5 * (hi - lo)
    dt = decimation / clock_hz
    sqrt3 = math.sqrt(3.0)
    ls = lls + lm
    lr = llr + lm
    inv_det = 1.0 / (ls * lr - lm * lm)

    n_samples = n_ticks // stride + 1
    out_vu = np.empty(n_samples)
    out_vv = np.empty(n_samples)
    out_vw = np.empty(n_samples)
    out_i1 = np.empty(n_samples)
    out_i2 = np.empty(n_samples)
    out_i3 = np.empty(n_samples)
    out_m = np.empty(n_samples)
    out_w = np.empty(n_samples)

    acc = 0
    count = 0
    m = m_target if soft_dur == 0.0 else 0.0
    va0, vb0, vc0 = _ref_triple(entries, size, lut_mid, lut_amp, 0, scheme)
    carrier = lo
    au = _scale_ref(va0, m, mid_c, half_c, lo, hi) > carrier
    av = _scale_ref(vb0, m, mid_c, half_c, lo, hi) > carrier
    aw = _scale_ref(vc0, m, mid_c, half_c, lo, hi) > carrier
    pu, pv, pw = au, av, aw
    du = dv = dw = 0
    vu = 0.5 * vdc if au else -0.5 * vdc
    vv = 0.5 * vdc if av else -0.5 * vdc
    vw = 0.5 * vdc if aw else -0.5 * vdc
    x0 = 0.0; x1 = 0.0; x2 = 0.0; x3 = 0.0; x4 = 0.0  # fluxes + speed

    s = 0
    out_vu[s] = vu; out_vv[s] = vv; out_vw[s] = vw
    out_i1[s] = 0.0; out_i2[s] = 0.0; out_i3[s] = 0.0
    out_m[s] = m
    out_w[s] = 0.0
    s += 1

    for n in range(n_ticks):
        vuv = vu - vv
        vvw = vv - vw
        vwu = vw - vu
        vas = (2.0 * vuv - vvw - vwu) / 3.0
        vbs = (vvw - vwu) / sqrt3
        k1 = _machine_derivs(rs, rr, lls, llr, lm, jin, bfric, p,
                             x0, x1, x2, x3, x4, vas, vbs, t_load)
        k2 = _machine_derivs(rs, rr, lls, llr, lm, jin, bfric, p,
                             x0 + 0.5 * dt * k1[0], x1 + 0.5 * dt * k1[1],
                             x2 + 0.5 * dt * k1[2], x3 + 0.5 * dt * k1[3],
                             x4 + 0.5 * dt * k1[4], vas, vbs, t_load)
        k3 = _machine_derivs(rs, rr, lls, llr, lm, jin, bfric, p,
                             x0 + 0.5 * dt * k2[0], x1 + 0.5 * dt * k2[1],
                             x2 + 0.5 * dt * k2[2], x3 + 0.5 * dt * k2[3],
                             x4 + 0.5 * dt * k2[4], vas, vbs, t_load)
        k4 = _machine_derivs(rs, rr, lls, llr, lm, jin, bfric, p,
                             x0 + dt * k3[0], x1 + dt * k3[1],
                             x2 + dt * k3[2], x3 + dt * k3[3],
                             x4 + dt * k3[4], vas, vbs, t_load)
        x0 = x0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        x1 = x1 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        x2 = x2 + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        x3 = x3 + dt / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        x4 = x4 + dt / 6.0 * (k1[4] + 2 * k2[4] + 2 * k3[4] + k4[4])
        # drive advance
        acc = (acc + decimation * word) % modulus
        idx = (acc * size) >> ACC_WIDTH
        count += decimation
        carrier = lo + count % period
        t = count / clock_hz
        m = m_target if soft_dur == 0.0 else m_target * min(1.0, t / soft_dur)
        va, vb, vc = _ref_triple(entries, size, lut_mid, lut_amp, idx, scheme)
        cu = _scale_ref(va, m, mid_c, half_c, lo, hi) > carrier
        cv = _scale_ref(vb, m, mid_c, half_c, lo, hi) > carrier
        cw = _scale_ref(vc, m, mid_c, half_c, lo, hi) > carrier
        au, pu, du, upu, lou = _leg_step(au, pu, du, cu, dead_ticks)
        av, pv, dv, upv, lov = _leg_step(av, pv, dv, cv, dead_ticks)
        aw, pw, dw, upw, low_ = _leg_step(aw, pw, dw, cw, dead_ticks)
        if upu:
            vu = 0.5 * vdc
        elif lou:
            vu = -0.5 * vdc
        if upv:
            vv = 0.5 * vdc
        elif lov:
            vv = -0.5 * vdc
        if upw:
            vw = 0.5 * vdc
        elif low_:
            vw = -0.5 * vdc
        if (n + 1) % stride == 0:
            ias = (lr * x0 - lm * x2) * inv_det
            ibs = (lr * x1 - lm * x3) * inv_det
            out_vu[s] = vu; out_vv[s] = vv; out_vw[s] = vw
            out_i1[s] = ias
            out_i2[s] = -0.5 * ias + 0.5 * sqrt3 * ibs
            out_i3[s] = -0.5 * ias - 0.5 * sqrt3 * ibs
            out_m[s] = m
            out_w[s] = x4 / p
            s += 1
    return out_vu, out_vv, out_vw, out_i1, out_i2, out_i3, out_m, out_w
