"""vfdrive: cycle-accurate model of an FPGA-style variable-frequency,
soft-starting three-phase PWM motor drive, with harmonic analysis."""

from .analysis import (CellError, SchemeRow, Spectrum, compare_schemes,
                       peak_to_peak, spectrum, steady_state_window, thd)
from .dds import DdsState, actual_frequency, dds_step, tuning_word
from .lut import LutTable, build_sine_lut, export_mem_init, lut_sample
from .modulator import (DriveConfig, GateState, PhaseTriple, PwmScheme,
                        carrier_value, common_mode_voltage, drive_init,
                        drive_tick, fundamental_amplitude, gate_compare,
                        linear_range_limit, reference_triple, soft_start_m)
from .plant import (MotorModel, PlantState, RlLoad, Trace, im_step,
                    line_voltages, pole_voltages, rl_step, simulate)

__version__ = "0.1.0"

__all__ = [
    "LutTable", "build_sine_lut", "lut_sample", "export_mem_init",
    "DdsState", "tuning_word", "dds_step", "actual_frequency",
    "PwmScheme", "PhaseTriple", "DriveConfig", "GateState",
    "reference_triple", "common_mode_voltage", "carrier_value",
    "soft_start_m", "gate_compare", "drive_init", "drive_tick",
    "fundamental_amplitude", "linear_range_limit",
    "RlLoad", "MotorModel", "PlantState", "Trace",
    "pole_voltages", "line_voltages", "rl_step", "im_step", "simulate",
    "Spectrum", "spectrum", "thd", "peak_to_peak", "steady_state_window",
    "compare_schemes", "SchemeRow", "CellError",
    "__version__",
]
