import hashlib
import json

import numpy as np
import pytest

from vfdrive import cli
from vfdrive.analysis import spectrum, thd
from vfdrive.modulator import DriveConfig
from vfdrive.plant import RlLoad, simulate

BASE_CFG = """\
[drive]
scheme = spwm
m_target = 0.6
soft_start_duration = 0.02

[load]
kind = rl
r = 10.0
l = 0.025

[run]
duration = 0.05
sample_hz = 1000000
"""


def _write_cfg(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# --- config parsing --------------------------------------------------------

def test_load_config_round_trip(tmp_path):
    cfg = cli.load_config(_write_cfg(tmp_path, BASE_CFG))
    assert cfg["drive"]["m_target"] == 0.6
    assert cfg["load"]["kind"] == "rl"
    drive = cli.drive_config_from(cfg)
    assert isinstance(drive, DriveConfig)
    assert drive.vdc == 120.0  # hardware preset default


def test_load_config_rejects_unknown_key(tmp_path):
    path = _write_cfg(tmp_path, BASE_CFG.replace(
        "[drive]", "[drive]\nbogus = 1"))
    with pytest.raises(cli.ConfigError, match="bogus"):
        cli.load_config(path)


def test_load_config_rejects_unknown_section(tmp_path):
    path = _write_cfg(tmp_path, BASE_CFG + "\n[nonsense]\nx = 1\n")
    with pytest.raises(cli.ConfigError, match="nonsense"):
        cli.load_config(path)


def test_load_config_rejects_bad_value(tmp_path):
    path = _write_cfg(tmp_path, BASE_CFG.replace("r = 10.0", "r = ten"))
    with pytest.raises(cli.ConfigError, match="load.r"):
        cli.load_config(path)


def test_overrides_win(tmp_path):
    path = _write_cfg(tmp_path, BASE_CFG)
    cfg = cli.load_config(path, ["drive.m_target=0.3", "run.duration=0.01"])
    assert cfg["drive"]["m_target"] == 0.3
    assert cfg["run"]["duration"] == 0.01


def test_motor_load_parsing(tmp_path):
    text = BASE_CFG.replace("kind = rl\nr = 10.0\nl = 0.025", "kind = motor\nj = 0.002")
    cfg = cli.load_config(_write_cfg(tmp_path, text))
    load = cli.load_from(cfg)
    assert load.j == 0.002
    assert load.rs == 11.0  # default fills the rest


def test_rl_load_rejects_motor_keys(tmp_path):
    text = BASE_CFG + "\n[load]\nrs = 1.0\n"
    with pytest.raises(cli.ConfigError):
        cli.load_from(cli.load_config(_write_cfg(tmp_path, text)))


# --- lut command -----------------------------------------------------------

def test_cmd_lut_default(tmp_path, capsys):
    out = tmp_path / "lut.mem"
    assert cli.main(["lut", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3600
    assert lines[0] == "137500"
    assert lines[900] == "150000"


def test_cmd_lut_hex_index_900(tmp_path):
    out = tmp_path / "lut.hex"
    assert cli.main(["lut", "--radix", "hex", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[900] == "249f0"


def test_cmd_lut_tiny_to_stdout(capsys):
    assert cli.main(["lut", "--size", "4", "--midpoint", "100",
                     "--amplitude", "50"]) == 0
    assert capsys.readouterr().out == "100\n150\n100\n50\n"


def test_cmd_lut_invalid_params_exit_2(capsys):
    assert cli.main(["lut", "--size", "10"]) == 2
    assert cli.main(["lut", "--size", "3600", "--midpoint", "10",
                     "--amplitude", "20"]) == 2


# --- simulate command ------------------------------------------------------

def test_cmd_simulate_writes_two_level_csv(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    cfgp = _write_cfg(tmp_path, BASE_CFG + f"\n[output]\ntrace = {trace}\n")
    assert cli.main(["simulate", cfgp]) == 0
    header = trace.read_text().splitlines()[0].split(",")
    assert header[0] == "time_s"
    col = header.index("v_uv_V")
    data = np.loadtxt(trace, delimiter=",", skiprows=1, usecols=col)
    assert set(np.unique(data)) <= {-120.0, 0.0, 120.0}
    meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
    assert meta["scheme"] == "spwm"
    assert meta["csv_sha256"] == hashlib.sha256(trace.read_bytes()).hexdigest()


def test_cmd_simulate_deterministic_hash(tmp_path, capsys):
    hashes = []
    for name in ("a.csv", "b.csv"):
        trace = tmp_path / name
        cfgp = _write_cfg(tmp_path, BASE_CFG + f"\n[output]\ntrace = {trace}\n",
                          name + ".ini")
        assert cli.main(["simulate", cfgp]) == 0
        hashes.append(hashlib.sha256(trace.read_bytes()).hexdigest())
    assert hashes[0] == hashes[1]


def test_cmd_simulate_exit_codes(tmp_path, capsys):
    # missing config file -> I/O error
    assert cli.main(["simulate", str(tmp_path / "nope.ini")]) == 4
    # unknown key -> config error
    bad = _write_cfg(tmp_path, BASE_CFG + "\n[run]\nwarp = 9\n", "bad.ini")
    assert cli.main(["simulate", bad]) == 2
    # integrator guard violation -> runtime error
    guard = _write_cfg(tmp_path, BASE_CFG.replace("l = 0.025", "l = 0.0000001"),
                       "guard.ini")
    assert cli.main(["simulate", guard]) == 3
    # unwritable output -> I/O error
    nodir = _write_cfg(
        tmp_path, BASE_CFG + f"\n[output]\ntrace = {tmp_path}/no/dir/x.csv\n",
        "nodir.ini")
    assert cli.main(["simulate", nodir]) == 4


def test_csv_round_trip_reproduces_thd(tmp_path):
    cfg = DriveConfig(soft_start_duration=0.02)
    tr = simulate(cfg, RlLoad(r=10.0, l=0.025), 0.15, 1_000_000)
    path = tmp_path / "rt.csv"
    cli.write_trace_csv(tr, str(path))
    back = cli.read_trace_csv(str(path))
    assert back.sample_period == pytest.approx(tr.sample_period, rel=1e-9)
    for channel in ("i_uv_A", "v_uv_V"):
        s0 = spectrum(tr, channel, 60.0, 0.05, 5, 100)
        s1 = spectrum(back, channel, 60.0, 0.05, 5, 100)
        assert thd(s0) == pytest.approx(thd(s1), rel=1e-8)
        assert s0.fundamental == pytest.approx(s1.fundamental, rel=1e-8)


# --- compare command -------------------------------------------------------

def test_cmd_compare_single_cell(tmp_path, capsys):
    table = tmp_path / "cmp.csv"
    text = (BASE_CFG
            + "\n[compare]\nschemes = spwm\nm_list = 0.5\n"
            + f"\n[output]\ntable = {table}\ntable_txt = {tmp_path}/cmp.txt\n")
    cfgp = _write_cfg(tmp_path, text.replace("duration = 0.05", "duration = 0.3"))
    assert cli.main(["compare", cfgp]) == 0
    lines = table.read_text().splitlines()
    assert lines[0] == "scheme,m,thd_current,thd_voltage"
    assert len(lines) == 2
    assert lines[1].startswith("spwm,0.5,")


def test_cmd_compare_rerun_byte_identical(tmp_path, capsys):
    outs = []
    for name in ("c1.csv", "c2.csv"):
        table = tmp_path / name
        text = (BASE_CFG.replace("duration = 0.05", "duration = 0.3")
                + "\n[compare]\nschemes = spwm,svpwm\nm_list = 0.4\n"
                + f"\n[output]\ntable = {table}\ntable_txt = {tmp_path}/{name}.txt\n")
        cfgp = _write_cfg(tmp_path, text, name + ".ini")
        assert cli.main(["compare", cfgp]) == 0
        outs.append(table.read_bytes())
    assert outs[0] == outs[1]


def test_cmd_simulate_motor_speed_column(tmp_path, capsys):
    trace = tmp_path / "m.csv"
    text = (BASE_CFG.replace("kind = rl\nr = 10.0\nl = 0.025", "kind = motor")
            .replace("duration = 0.05", "duration = 0.2")
            .replace("sample_hz = 1000000", "sample_hz = 100000")
            + f"\n[output]\ntrace = {trace}\n")
    cfgp = _write_cfg(tmp_path, text)
    assert cli.main(["simulate", cfgp]) == 0
    header = trace.read_text().splitlines()[0].split(",")
    assert "speed_mech_rad_s" in header
    col = header.index("speed_mech_rad_s")
    speed = np.loadtxt(trace, delimiter=",", skiprows=1, usecols=col)
    assert speed[0] == 0.0
    assert speed[-1] > 10.0  # spinning up


# --- softstart-sweep command -----------------------------------------------

def test_cmd_softstart_sweep(tmp_path, capsys):
    table = tmp_path / "sweep.csv"
    text = (BASE_CFG.replace("kind = rl\nr = 10.0\nl = 0.025", "kind = motor")
            .replace("sample_hz = 1000000", "sample_hz = 100000")
            + "\n[sweep]\ndurations = 0.1, 0\nsettle = 0.7\n"
            + f"\n[output]\ntable = {table}\ntable_txt = {tmp_path}/sweep.txt\n")
    cfgp = _write_cfg(tmp_path, text)
    assert cli.main(["softstart-sweep", cfgp]) == 0
    lines = table.read_text().splitlines()
    assert lines[0] == "soft_start_duration_s,startup_pkpk_A,nominal_pkpk_A"
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    assert [r[0] for r in rows] == [0.0, 0.1]  # sorted ascending
    for _, startup, nominal in rows:
        assert startup >= nominal


def test_cmd_softstart_sweep_needs_motor(tmp_path, capsys):
    cfgp = _write_cfg(tmp_path, BASE_CFG + "\n[sweep]\ndurations = 0\n")
    assert cli.main(["softstart-sweep", cfgp]) == 2
