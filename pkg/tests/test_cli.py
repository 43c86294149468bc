import json
import math

import pytest

from stringsens import ConfigError, FrequencyGrid, sweep
from stringsens.cli import load_config, main, parse_config, write_sweep_csv

from oracles import oscillator_coeffs

PLATOON_CFG = """
# double-integrator platoon with lead compensator
plant_num = [1]
plant_den = [0, 0, 1, 0.1]       # s^2 (0.1 s + 1), ascending powers
controller_num = [1, 2]
controller_den = [1, 0.05]
n_values = [1, 10]
omega_min = 1e-2
omega_max = 1e2
points_per_decade = 120
"""

OSCILLATOR_CFG = """
plant_num = [1, 4, 6, 4, 1]
plant_den = [1, 0, 2, 0, 1]
controller_num = [1]
controller_den = [1]
n_values = [2, 10]
"""


@pytest.fixture
def platoon_cfg(tmp_path):
    path = tmp_path / "platoon.cfg"
    path.write_text(PLATOON_CFG)
    return str(path)


@pytest.fixture
def oscillator_cfg(tmp_path):
    path = tmp_path / "osc.cfg"
    path.write_text(OSCILLATOR_CFG)
    return str(path)


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def test_parse_config_builds_expected_loop():
    cfg = parse_config(PLATOON_CFG)
    loop = cfg.loop()
    info = {round(p.real, 6): m for p, m in loop.poles()}
    assert info == {0.0: 2, -10.0: 1, -20.0: 1}
    assert cfg.points_per_decade == 120
    assert cfg.cluster_tol == 1e-6 and cfg.axis_tol == 1e-7 and cfg.quad_tol == 1e-6


def test_parse_config_missing_required_key():
    broken = "\n".join(line for line in PLATOON_CFG.splitlines()
                       if not line.startswith("plant_den"))
    with pytest.raises(ConfigError) as exc:
        parse_config(broken)
    assert "plant_den" in str(exc.value)


def test_parse_config_empty_n_values():
    with pytest.raises(ConfigError) as exc:
        parse_config(PLATOON_CFG.replace("n_values = [1, 10]", "n_values = []"))
    assert "n_values" in str(exc.value)


def test_parse_config_unknown_key_names_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("bogus = 3\n" + PLATOON_CFG)
    assert "bogus" in str(exc.value)
    assert exc.value.line == 1


def test_parse_config_rejects_bad_number():
    with pytest.raises(ConfigError):
        parse_config(PLATOON_CFG.replace("[1, 2]", "[1, two]"))


def test_parse_config_rejects_descending_n_values():
    with pytest.raises(ConfigError):
        parse_config(PLATOON_CFG.replace("[1, 10]", "[10, 1]"))


def test_parse_config_rejects_duplicate_key():
    with pytest.raises(ConfigError):
        parse_config(PLATOON_CFG + "\nplant_num = [2]\n")


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.cfg")


# ---------------------------------------------------------------------------
# Commands and exit codes
# ---------------------------------------------------------------------------

def test_cmd_bound_oscillator(oscillator_cfg, capsys):
    assert main(["bound", oscillator_cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "finite"
    assert abs(out["bound_value"] - 4.0 / (math.pi * math.sqrt(5.0))) < 1e-9
    assert abs(out["bound_db"] - (-4.8915)) < 1e-3


def test_cmd_stability_platoon(platoon_cfg, capsys):
    assert main(["stability", platoon_cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["stable_all_gains"] is True
    ks = [c["k"] for c in out["critical_gains"]]
    assert len(ks) == 1 and abs(ks[0] - 13.875) < 1e-6


def test_cmd_integral_platoon(platoon_cfg, capsys):
    assert main(["integral", platoon_cfg]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert [r["n"] for r in reports] == [1, 10]
    assert all(abs(r["value"]) <= 1e-3 for r in reports)


def test_cmd_integral_refuses_flat_loop(oscillator_cfg, capsys):
    assert main(["integral", oscillator_cfg]) == 1
    err = capsys.readouterr().err
    assert "relative degree" in err


def test_missing_config_file_is_input_error(capsys):
    assert main(["bound", "/no/such/file.cfg"]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_config_is_input_error(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("plant_num = [1]\n")
    assert main(["bound", str(path)]) == 2


# ---------------------------------------------------------------------------
# Sweep output files
# ---------------------------------------------------------------------------

def test_sweep_csv_round_trip(platoon_cfg, tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", platoon_cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["omega", "re_S1", "im_S1", "ln_abs_S1",
                      "re_S10", "im_S10", "ln_abs_S10"]

    cfg = load_config(platoon_cfg)
    expected = [sweep(cfg.loop(), n, cfg.grid()) for n in cfg.n_values]
    assert len(lines) - 1 == len(expected[0].omegas)
    for i, line in enumerate(lines[1:]):
        cells = [float(tok) for tok in line.split(",")]
        assert cells[0] == float(expected[0].omegas[i])  # bit-for-bit
        for j, sw in enumerate(expected):
            assert cells[1 + 3 * j] == float(sw.values[i].real)
            assert cells[2 + 3 * j] == float(sw.values[i].imag)
            assert cells[3 + 3 * j] == float(sw.log_mags[i])


def test_sweep_deterministic_outputs(platoon_cfg, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["sweep", platoon_cfg, "--out", str(a), "--svg"]) == 0
    assert main(["sweep", platoon_cfg, "--out", str(b), "--svg"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["tool"] == "stringsens"


def test_bound_output_deterministic(oscillator_cfg, capsys):
    main(["bound", oscillator_cfg])
    first = capsys.readouterr().out
    main(["bound", oscillator_cfg])
    second = capsys.readouterr().out
    assert first == second


def test_svg_is_self_contained(platoon_cfg, tmp_path):
    out = tmp_path / "fig.csv"
    assert main(["sweep", platoon_cfg, "--out", str(out), "--svg"]) == 0
    svg = (tmp_path / "fig.svg").read_text()
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert "href" not in svg and "<script" not in svg and "url(" not in svg
    assert "polyline" in svg
    # the preset frequency range shows up as decade tick labels
    assert "1e-2" in svg and "1e2" in svg
    assert "N=1" in svg and "N=10" in svg


def test_sweep_json_to_stdout(platoon_cfg, capsys):
    assert main(["sweep", platoon_cfg, "--method", "linsolve"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert [entry["n"] for entry in payload] == [1, 10]
    assert payload[0]["method"] == "linsolve"
    assert len(payload[0]["omega"]) == len(payload[0]["re"])


def test_write_sweep_csv_handles_gap_markers(tmp_path):
    from stringsens import RationalTF
    osc = RationalTF(*oscillator_coeffs())
    grid = FrequencyGrid(0.999, 1.001, 20, scale="linear")
    sw = sweep(osc, 10, grid, method="mobius")
    assert sw.gap_count > 0
    path = tmp_path / "gaps.csv"
    write_sweep_csv(str(path), [sw])
    rows = path.read_text().strip().splitlines()[1:]
    parsed = [[float(tok) for tok in row.split(",")] for row in rows]
    assert any(math.isnan(vals[1]) for vals in parsed)


def test_cmd_verify_platoon(platoon_cfg, capsys):
    assert main(["verify", platoon_cfg, "--points", "15"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"] is True
    assert out["max_relative_deviation"] <= 1e-7


def test_cmd_verify_respects_method_agreement(oscillator_cfg, capsys):
    assert main(["verify", oscillator_cfg, "--points", "15"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"] is True
