"""Command-line surface: LUT export, simulation runs, THD comparison
tables, and soft-start sweeps.

Configs are flat-section INI files; every key can be overridden on the
command line with --set section.key=value (command line wins). All
outputs are byte-deterministic for identical inputs: CSV numbers are
written with 9 significant digits, LF line endings, and the metadata
sidecar carries a sha256 of the CSV it describes.

Exit codes: 0 ok, 2 config/validation error, 3 runtime guard violation,
4 I/O error.
"""

import argparse
import configparser
import hashlib
import json
import sys
from dataclasses import replace

import numpy as np

from .analysis import compare_schemes, peak_to_peak
from .lut import build_sine_lut, export_mem_init
from .modulator import DriveConfig, PwmScheme
from .plant import MotorModel, RlLoad, Trace, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

CSV_FMT = "%.9g"

_SCHEMES = {"spwm": PwmScheme.SPWM, "thi": PwmScheme.THI_SPWM,
            "svpwm": PwmScheme.SVPWM}


class ConfigError(ValueError):
    pass


# section -> key -> value parser; anything absent falls back to defaults
_SCHEMA = {
    "drive": {
        "vdc": float, "f_carrier": float, "f_ref": float, "scheme": str,
        "m_target": float, "soft_start_duration": float,
        "soft_start_profile": str, "clock_hz": float, "decimation": int,
        "dead_time": float, "carrier_lo": int, "carrier_hi": int,
        "lut_size": int, "lut_midpoint": int, "lut_amplitude": int,
    },
    "load": {
        "kind": str, "r": float, "l": float,
        "rs": float, "rr": float, "lls": float, "llr": float, "lm": float,
        "j": float, "b": float, "pole_pairs": int,
    },
    "run": {"duration": float, "sample_hz": float, "t_load": float},
    "analysis": {"cycles": int, "max_harmonic": int},
    "compare": {"schemes": str, "m_list": str},
    "sweep": {"durations": str, "settle": float},
    "output": {"trace": str, "metadata": str, "table": str, "table_txt": str},
}

_RL_KEYS = {"r", "l"}
_MOTOR_KEYS = {"rs", "rr", "lls", "llr", "lm", "j", "b", "pole_pairs"}


def load_config(path: str, overrides=()) -> dict:
    """Parse an INI run config into a {section: {key: value}} dict.

    Unknown sections or keys are rejected, as are malformed values.
    `overrides` holds "section.key=value" strings applied on top.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from exc
    if not read:
        raise OSError(f"cannot read config file {path!r}")
    raw = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        raw[section] = dict(parser.items(section))
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not section.key=value")
        dotted, value = item.split("=", 1)
        section, key = dotted.split(".", 1)
        raw.setdefault(section, {})[key] = value
    cfg = {}
    for section, items in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        cfg[section] = {}
        for key, text in items.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                cfg[section][key] = _SCHEMA[section][key](text)
            except ValueError as exc:
                raise ConfigError(
                    f"bad value for {section}.{key}: {text!r} ({exc})") from exc
    return cfg


def drive_config_from(cfg: dict) -> DriveConfig:
    items = dict(cfg.get("drive", {}))
    if "scheme" in items:
        name = items["scheme"].lower()
        if name not in _SCHEMES:
            raise ConfigError(
                f"unknown scheme {items['scheme']!r}; pick one of {sorted(_SCHEMES)}")
        items["scheme"] = _SCHEMES[name]
    try:
        return DriveConfig(**items)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_from(cfg: dict):
    items = dict(cfg.get("load", {}))
    kind = items.pop("kind", "rl")
    try:
        if kind == "rl":
            unknown = set(items) - _RL_KEYS
            if unknown:
                raise ConfigError(f"keys {sorted(unknown)} invalid for an RL load")
            if "r" not in items or "l" not in items:
                raise ConfigError("an RL load needs both load.r and load.l")
            return RlLoad(r=items["r"], l=items["l"])
        if kind == "motor":
            unknown = set(items) - _MOTOR_KEYS
            if unknown:
                raise ConfigError(f"keys {sorted(unknown)} invalid for a motor load")
            return MotorModel(**items)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"load.kind must be 'rl' or 'motor', got {kind!r}")


def write_trace_csv(trace: Trace, path: str) -> str:
    """Write the trace as CSV (time first); returns the sha256 hex digest."""
    names = ["time_s"] + list(trace.channels)
    cols = [trace.time()] + [np.asarray(trace.channels[k]) for k in trace.channels]
    data = np.column_stack(cols)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, data, fmt=CSV_FMT, delimiter=",", newline="\n")
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_trace_csv(path: str) -> Trace:
    """Re-ingest a trace CSV written by write_trace_csv (or any CSV with a
    time_s first column and one channel per remaining column)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if not header or header[0] != "time_s":
        raise ValueError(f"{path!r} is not a trace CSV (no time_s column)")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError("CSV column count does not match its header")
    t = data[:, 0]
    if len(t) < 2:
        raise ValueError("trace CSV needs at least two samples")
    period = float(np.median(np.diff(t)))
    channels = {name: data[:, k] for k, name in enumerate(header[1:], start=1)}
    return Trace(sample_period=period, channels=channels,
                 metadata={"source": path})


def write_metadata(trace: Trace, csv_sha256: str, path: str):
    doc = dict(trace.metadata)
    doc["csv_sha256"] = csv_sha256
    doc["format"] = {"csv_digits": 9, "delimiter": ",", "line_ending": "LF"}
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt_table(header, rows) -> str:
    """Aligned-text rendering with a separator rule."""
    cells = [header] + [[c for c in row] for row in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    out = []
    for r, row in enumerate(cells):
        out.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        if r == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def cmd_lut(args) -> int:
    table = build_sine_lut(args.size, args.midpoint, args.amplitude)
    text = export_mem_init(table, args.radix)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set or ())
    drive = drive_config_from(cfg)
    load = load_from(cfg)
    run = cfg.get("run", {})
    if "duration" not in run or "sample_hz" not in run:
        raise ConfigError("config needs run.duration and run.sample_hz")
    out = cfg.get("output", {})
    trace_path = out.get("trace", "trace.csv")
    meta_path = out.get("metadata", trace_path + ".meta.json")
    trace = simulate(drive, load, run["duration"], run["sample_hz"],
                     t_load=run.get("t_load", 0.0))
    sha = write_trace_csv(trace, trace_path)
    write_metadata(trace, sha, meta_path)
    print(f"wrote {trace_path} ({trace.n_samples} samples, sha256 {sha[:16]}...) "
          f"and {meta_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config, args.set or ())
    drive = drive_config_from(cfg)
    load = load_from(cfg)
    run = cfg.get("run", {})
    if "duration" not in run or "sample_hz" not in run:
        raise ConfigError("config needs run.duration and run.sample_hz")
    comp = cfg.get("compare", {})
    scheme_names = [s.strip().lower()
                    for s in comp.get("schemes", "spwm,thi,svpwm").split(",")]
    bad = [s for s in scheme_names if s not in _SCHEMES]
    if bad:
        raise ConfigError(f"unknown scheme(s) {bad} in compare.schemes")
    schemes = [_SCHEMES[s] for s in scheme_names]
    try:
        m_list = [float(s) for s in comp.get("m_list", "0.4").split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad compare.m_list: {exc}") from exc
    ana = cfg.get("analysis", {})
    rows = compare_schemes(drive, load, run["duration"], run["sample_hz"],
                           m_list, schemes,
                           cycles=ana.get("cycles", 6),
                           h_max=ana.get("max_harmonic"),
                           t_load=run.get("t_load", 0.0))
    out = cfg.get("output", {})
    table_path = out.get("table", "compare.csv")
    txt_path = out.get("table_txt", "compare.txt")
    with open(table_path, "w", newline="\n") as fh:
        fh.write("scheme,m,thd_current,thd_voltage\n")
        for r in rows:
            fh.write(f"{r.scheme.value},{r.m:.9g},"
                     f"{r.thd_current:.9g},{r.thd_voltage:.9g}\n")
    text = _fmt_table(
        ["scheme", "m", "THD(i_w)", "THD(v_ll)"],
        [[r.scheme.value, f"{r.m:.4g}", f"{r.thd_current:.4%}",
          f"{r.thd_voltage:.4%}"] for r in rows])
    with open(txt_path, "w", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_softstart_sweep(args) -> int:
    cfg = load_config(args.config, args.set or ())
    drive = drive_config_from(cfg)
    load = load_from(cfg)
    if not isinstance(load, MotorModel):
        raise ConfigError("softstart-sweep needs load.kind = motor")
    run = cfg.get("run", {})
    if "sample_hz" not in run:
        raise ConfigError("config needs run.sample_hz")
    sweep = cfg.get("sweep", {})
    try:
        durations = sorted(float(s) for s in
                           sweep.get("durations", "0,0.25,0.5,1,2").split(","))
    except ValueError as exc:
        raise ConfigError(f"bad sweep.durations: {exc}") from exc
    if any(d < 0 for d in durations):
        raise ConfigError("sweep durations must be >= 0")
    settle = sweep.get("settle", 1.5)
    tail_cycles = 3
    tail = tail_cycles / drive.f_ref
    if settle < 0.5 + 2 * tail:
        raise ConfigError(f"sweep.settle must be >= {0.5 + 2 * tail:g} s")
    rows = []
    for d in durations:
        run_cfg = replace(drive, soft_start_duration=d)
        total = d + settle
        trace = simulate(run_cfg, load, total, run["sample_hz"],
                         t_load=run.get("t_load", 0.0))
        startup = peak_to_peak(trace, "i_uv_A", 0.0, d + 0.5)
        nominal = peak_to_peak(trace, "i_uv_A", total - tail, total)
        rows.append((d, startup, nominal))
    out = cfg.get("output", {})
    table_path = out.get("table", "softstart.csv")
    txt_path = out.get("table_txt", "softstart.txt")
    with open(table_path, "w", newline="\n") as fh:
        fh.write("soft_start_duration_s,startup_pkpk_A,nominal_pkpk_A\n")
        for d, startup, nominal in rows:
            fh.write(f"{d:.9g},{startup:.9g},{nominal:.9g}\n")
    text = _fmt_table(
        ["duration [s]", "startup pk-pk [A]", "nominal pk-pk [A]"],
        [[f"{d:.4g}", f"{s_:.4f}", f"{n_:.4f}"] for d, s_, n_ in rows])
    with open(txt_path, "w", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vfdrive",
        description="Variable-frequency soft-starting PWM drive simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lut", help="write the sine table as a mem-init file")
    p.add_argument("--size", type=int, default=3600)
    p.add_argument("--midpoint", type=int, default=137500)
    p.add_argument("--amplitude", type=int, default=12500)
    p.add_argument("--radix", choices=["decimal", "hex"], default="decimal")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.set_defaults(func=cmd_lut)

    for name, func, help_ in [
            ("simulate", cmd_simulate, "run one simulation, write trace CSV + metadata"),
            ("compare", cmd_compare, "THD table across schemes and m values"),
            ("softstart-sweep", cmd_softstart_sweep,
             "startup vs nominal pk-pk current over soft-start durations")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="INI run config")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        if args.command == "lut":
            # lut has no runtime phase: bad parameters are config errors
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
