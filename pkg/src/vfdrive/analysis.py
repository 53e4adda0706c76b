"""Harmonic decomposition, THD, and scheme-comparison tables.

Harmonic magnitudes are DFT bins over an exact integer number of
fundamental cycles (rectangular window). With integer cycles the bins
are orthogonal, so no taper is needed. The analysis keeps both the
integer-order magnitudes and the off-order in-band residual: an
asynchronous PWM carrier (4 kHz against 60 Hz, say) puts all of its
sideband energy between harmonic orders, and a THD that dropped it
would report the quantization noise floor instead of the distortion.
"""

import math
from dataclasses import dataclass

import numpy as np

from .modulator import (M_LIMIT_SINE, M_LIMIT_ZS, DriveConfig, PwmScheme,
                        with_scheme)
from .plant import Trace, simulate

DEFAULT_MAX_HARMONIC = 100


@dataclass(frozen=True)
class Spectrum:
    """Peak magnitudes of harmonics 1..H over an integer-cycle window.

    residual is the RMS-equivalent peak magnitude of in-band energy that
    falls between harmonic orders (PWM carrier sidebands rarely sit on
    multiples of the drive fundamental). It is zero for any signal
    composed purely of fundamental harmonics.
    """

    f_fund: float
    fundamental: float
    harmonics: np.ndarray    # orders 2..H
    residual: float
    h_max: int
    window_start: float
    cycles: int

    def magnitude(self, order: int) -> float:
        if order == 1:
            return self.fundamental
        if not 2 <= order <= self.h_max:
            raise ValueError(f"order {order} outside 2..{self.h_max}")
        return float(self.harmonics[order - 2])


def spectrum(trace: Trace, channel: str, f_fund: float, start: float,
             cycles: int, h_max: int = None) -> Spectrum:
    """DFT of one channel over `cycles` fundamental periods.

    Magnitude of harmonic h is (2/N)*|sum_n x[n] e^{-j 2 pi h c n / N}|,
    i.e. window bin h*cycles; the full in-band grid (bins 1..H*cycles)
    is evaluated in one FFT so the off-order residual comes for free.
    The window must be a whole number of samples within half a sample;
    anything else would leak across bins and is rejected. The DC bin is
    excluded by construction (orders start at 1).
    """
    fs = 1.0 / trace.sample_period
    if h_max is None:
        h_max = min(DEFAULT_MAX_HARMONIC, int(fs / 2.0 / f_fund))
    if h_max < 2:
        raise ValueError("h_max must be >= 2")
    if h_max * f_fund > fs / 2.0 + 1e-9:
        raise ValueError(
            f"h_max={h_max} at f_fund={f_fund:g} Hz exceeds Nyquist {fs / 2:g} Hz")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    n_exact = cycles * fs / f_fund
    n = round(n_exact)
    # absolute half-sample cap plus a relative cap: a half-sample error
    # over a short window is a real frequency offset and would leak
    if abs(n_exact - n) > 0.5 or abs(n_exact - n) > 1e-5 * n:
        raise ValueError(
            f"window of {cycles} cycles at {f_fund:g} Hz is {n_exact:.6g} "
            f"samples; analysis needs a whole number of samples")
    i0 = round(start * fs)
    x = np.asarray(trace.channels[channel], dtype=float)
    if i0 < 0 or i0 + n > len(x):
        raise ValueError("window exceeds the trace")
    seg = x[i0:i0 + n]
    bins = np.abs(np.fft.rfft(seg)) * (2.0 / n)
    mags = bins[np.arange(1, h_max + 1) * cycles]
    band_hi = min(h_max * cycles, len(bins) - 1)
    band_power = float(np.sum(bins[1:band_hi + 1] ** 2))
    order_power = float(np.sum(mags ** 2))
    residual = math.sqrt(max(0.0, band_power - order_power))
    return Spectrum(f_fund=f_fund, fundamental=float(mags[0]),
                    harmonics=mags[1:], residual=residual, h_max=h_max,
                    window_start=i0 / fs, cycles=cycles)


def thd(s: Spectrum) -> float:
    """Distortion ratio over the analyzed band.

    sqrt(sum of squared harmonic magnitudes 2..H, plus the off-order
    residual) over the fundamental. For harmonic-only signals this is
    exactly the textbook sqrt(sum mag_h^2)/mag_1; the residual term is
    what keeps asynchronous PWM carrier sidebands (which fall between
    harmonic orders) from being silently ignored, matching what an
    FFT-everything THD measurement reports.
    """
    distortion = math.sqrt(float(np.sum(s.harmonics ** 2)) + s.residual ** 2)
    total = math.hypot(s.fundamental, distortion)
    if s.fundamental <= 0.0 or s.fundamental < 1e-9 * total:
        raise ValueError("THD undefined: no fundamental component present")
    return distortion / s.fundamental


def peak_to_peak(trace: Trace, channel: str, start: float, end: float) -> float:
    """max - min of a channel over [start, end]."""
    fs = 1.0 / trace.sample_period
    i0 = round(start * fs)
    i1 = round(end * fs) + 1
    x = trace.channels[channel]
    if i0 < 0 or i0 >= i1 or i1 > len(x):
        raise ValueError(f"window [{start:g}, {end:g}] s exceeds the trace")
    seg = np.asarray(x[i0:i1], dtype=float)
    return float(seg.max() - seg.min())


def steady_state_window(trace: Trace, channel: str, f_fund: float,
                        cycles: int = 6, drift_limit: float = 0.01) -> float:
    """Start time of the last `cycles` fundamental periods, after checking
    that cycle-to-cycle RMS drift through the window is below drift_limit.

    Cycle boundaries come from cumulative rounding so the window length
    matches what spectrum() will use, even when samples-per-cycle is not
    an integer.
    """
    fs = 1.0 / trace.sample_period
    x = np.asarray(trace.channels[channel], dtype=float)
    n_win = round(cycles * fs / f_fund)
    n_chk = round((cycles + 1) * fs / f_fund)
    if len(x) < n_chk:
        raise ValueError(
            f"trace too short for {cycles} steady cycles at {f_fund:g} Hz")
    tail = x[len(x) - n_chk:]
    bounds = [round(k * fs / f_fund) for k in range(cycles + 2)]
    rms = [float(np.sqrt(np.mean(tail[bounds[k]:bounds[k + 1]] ** 2)))
           for k in range(cycles + 1)]
    for a, b in zip(rms, rms[1:]):
        ref = max(abs(a), abs(b), 1e-30)
        if abs(a - b) / ref > drift_limit:
            raise ValueError(
                f"channel {channel} not steady: cycle RMS drift "
                f"{abs(a - b) / ref:.3%} exceeds {drift_limit:.1%}")
    return (len(x) - n_win) / fs


@dataclass(frozen=True)
class SchemeRow:
    scheme: PwmScheme
    m: float            # commanded comparison index (SPWM-referred)
    m_drive: float      # modulation index actually run on the drive
    thd_current: float
    thd_voltage: float


class CellError(RuntimeError):
    """Tags a simulation/analysis failure with the (scheme, m) cell."""

    def __init__(self, scheme, m, cause):
        super().__init__(f"cell ({scheme.name}, m={m:g}): {cause}")
        self.scheme = scheme
        self.m = m
        self.cause = cause


def compare_schemes(cfg: DriveConfig, load, duration: float, sample_hz: float,
                    m_list, schemes, cycles: int = 6,
                    h_max: int = None, t_load: float = 0.0) -> list:
    """THD table over schemes x modulation indices.

    The comparison uses each scheme the way drives actually deploy it:
    at commanded index m, the plain sine reference runs at m while the
    injection schemes run at (2/sqrt(3))*m, delivering their extra bus
    utilization. That is the like-for-like comparison of the schemes as
    products; at literally equal fundamental a sawtooth-carrier inverter
    gives all three identical line-line distortion. Commanded m is
    limited to (0, 1] so every scheme stays linear.

    Rows are ordered scheme-major (schemes as given, then ascending m),
    never by completion order, so repeated runs produce identical
    tables. Current THD uses a winding-current channel, voltage THD the
    corresponding line-line channel, both over the steady tail window.
    When h_max is not given, the band is widened to cover the first few
    carrier groups (3.5 * f_carrier) if the plain spectrum default would
    truncate them; a drive THD that cannot see the carrier band is
    meaningless.
    """
    if h_max is None:
        h_max = max(DEFAULT_MAX_HARMONIC,
                    math.ceil(3.5 * cfg.f_carrier / cfg.f_ref))
        h_max = min(h_max, int(sample_hz / 2.0 / cfg.f_ref))
    rows = []
    for scheme in schemes:
        for m in sorted(m_list):
            if not 0.0 < m <= M_LIMIT_SINE + 1e-12:
                raise CellError(scheme, m, "commanded m outside (0, 1]")
            m_drive = m if scheme is PwmScheme.SPWM else m * M_LIMIT_ZS
            try:
                run_cfg = with_scheme(cfg, scheme, m_target=m_drive)
                trace = simulate(run_cfg, load, duration, sample_hz, t_load=t_load)
                start = steady_state_window(trace, "i_uv_A", cfg.f_ref, cycles)
                s_i = spectrum(trace, "i_uv_A", cfg.f_ref, start, cycles, h_max)
                s_v = spectrum(trace, "v_uv_V", cfg.f_ref, start, cycles, h_max)
                rows.append(SchemeRow(scheme=scheme, m=m, m_drive=m_drive,
                                      thd_current=thd(s_i), thd_voltage=thd(s_v)))
            except (ValueError, RuntimeError) as exc:
                raise CellError(scheme, m, exc) from exc
    return rows
