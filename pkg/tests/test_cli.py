import csv
import json
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swanson_forge import cli
from swanson_forge.config import ConfigError, RunConfig, config_from_dict
from swanson_forge.verify import CHECK_NAMES

OSC = ["--model", "shifted-oscillator", "--param", "a=2", "--param", "b=0.5", "--alpha", "0.1", "--beta", "0.3"]


def test_list(capsys):
    assert cli.main(["list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 8
    by_model = {line.split()[0]: line for line in lines}
    assert "b > a²" in by_model["eckart"]
    assert "α < β" in by_model["rosen-morse-2"]


def test_verify_reference_run(tmp_path, capsys):
    assert cli.main(["verify", *OSC, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["derived"]["mu"] == pytest.approx(-1 / 3, abs=1e-14)
    assert report["pass"] is True
    assert set(report) >= {"config", "derived", "checks", "findings", "pass", "timestamp"}
    assert set(report["checks"][0]) == {"name", "metric", "tolerance", "passed", "details"}
    rows = list(csv.reader((tmp_path / "spectra.csv").open()))
    assert tuple(rows[0]) == cli.CSV_COLUMNS
    assert len(rows) == 5
    assert "overall: PASS" in capsys.readouterr().out


def test_equal_parameters_exit_2(tmp_path, capsys):
    code = cli.main(["verify", "--model", "morse", "--param", "a=3", "--param", "b=1",
                     "--alpha", "0.5", "--beta", "0.5", "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2
    assert err.count("\n") == 1 and "EqualParameters" in err


@pytest.mark.parametrize("argv", [
    ["verify", "--model", "nope"],
    ["verify", *OSC, "--grid-n", "10"],
    ["verify", *OSC, "--checks", "spectrum,bogus"],
    ["verify", *OSC, "--window", "3,1"],
    ["verify", *OSC, "--param", "a"],
    ["verify", *OSC, "--format", "pdf"],
    ["verify", "--unknown-flag"],
    ["verify", "--model", "morse", "--param", "a=3", "--param", "c=1", "--alpha", "0.05", "--beta", "0.1"],
])
def test_invalid_input_exit_2(argv, tmp_path, capsys):
    assert cli.main([*argv, "--out", str(tmp_path)]) == 2
    assert capsys.readouterr().err.count("\n") == 1


def test_constraint_violation_exit_2_with_report(tmp_path, capsys):
    code = cli.main(["verify", "--model", "eckart", "--param", "a=1", "--param", "b=0.5",
                     "--alpha", "0.05", "--beta", "0.1", "--out", str(tmp_path)])
    assert code == 2
    assert "b > a²" in capsys.readouterr().err
    assert json.loads((tmp_path / "report.json").read_text())["input_error"]["rule"] == "b > a²"


def test_failing_check_exit_1(tmp_path, monkeypatch):
    from swanson_forge import verify

    monkeypatch.setattr(verify, "check_spectrum", _strict_spectrum(verify.check_spectrum))
    assert cli.main(["verify", *OSC, "--checks", "spectrum", "--out", str(tmp_path)]) == 1


def _strict_spectrum(inner):
    def run(*args, **kwargs):
        res = inner(*args, **kwargs)
        return type(res)(res.name, res.metric, 1e-12, res.details)
    return run


def test_single_check_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "morse", "params": {"a": 3, "b": 1}, "alpha": 0.05, "beta": 0.1,
                               "checks": ["spectrum"], "out_dir": str(tmp_path / "out")}))
    assert cli.main(["verify", "--config", str(cfg)]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert len(report["checks"]) == 1


def test_flags_override_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "morse", "params": {"a": 3, "b": 1}, "alpha": 0.05, "beta": 0.1}))
    assert cli.main(["verify", "--config", str(cfg), "--param", "b=2", "--nmax", "1", "--dump-config"]) == 0
    dumped = json.loads(capsys.readouterr().out)
    assert dumped["params"] == {"a": 3.0, "b": 2.0} and dumped["nmax"] == 1


def test_unknown_config_keys_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "morse", "alhpa": 0.1}))
    assert cli.main(["verify", "--config", str(cfg)]) == 2
    assert "alhpa" in capsys.readouterr().err


def test_dump_config_round_trip(tmp_path):
    path = tmp_path / "dump.json"
    assert cli.main(["verify", *OSC, "--window=-9,9", "--checks", "spectrum,operators",
                     "--format", "json,svg", "--dump-config", str(path)]) == 0
    again = config_from_dict(json.loads(path.read_text()))
    assert again == config_from_dict(json.loads(again.to_json()))
    assert again.window == (-9.0, 9.0) and again.checks == ("spectrum", "operators")


@settings(max_examples=30)
@given(st.sampled_from(["morse", "scarf-2"]), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3),
       st.one_of(st.none(), st.integers(64, 5000)), st.integers(0, 6),
       st.one_of(st.just("all"), st.lists(st.sampled_from(CHECK_NAMES), min_size=1, max_size=4, unique=True)))
def test_config_round_trip_property(model, alpha, beta, grid_n, nmax, checks):
    cfg = RunConfig(model=model, params={"a": 1.0}, alpha=alpha, beta=beta, grid_n=grid_n, nmax=nmax, checks=checks)
    assert config_from_dict(json.loads(cfg.to_json())) == cfg


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(model="morse", grid_n=63)
    with pytest.raises(ConfigError):
        RunConfig(model="morse", nmax=-1)
    with pytest.raises(ConfigError):
        config_from_dict({"alpha": 0.1})


def svg_ids(path):
    root = ET.parse(path).getroot()
    return [el.get("id") for el in root.iter() if el.get("id")]


def test_plots_are_deterministic_and_well_formed(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["plot", *OSC, "--nmax", "2", "--out", str(out)]) == 0
    for name in ("potentials.svg", "wavefunctions.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
        assert ET.parse(a / name).getroot().tag.endswith("svg")
    ids = svg_ids(a / "potentials.svg")
    assert {"v-minus", "v-plus", "level-0", "level-1", "level-2"} <= set(ids)


def test_nmax_zero_gives_one_level(tmp_path):
    assert cli.main(["plot", *OSC, "--nmax", "0", "--out", str(tmp_path)]) == 0
    assert [i for i in svg_ids(tmp_path / "potentials.svg") if i.startswith("level-")] == ["level-0"]
    assert [i for i in svg_ids(tmp_path / "wavefunctions.svg") if i.startswith("psi-")] == ["psi-0"]


def test_csv_is_deterministic(tmp_path):
    for out in ("a", "b"):
        assert cli.main(["verify", *OSC, "--checks", "spectrum", "--out", str(tmp_path / out)]) == 0
    assert (tmp_path / "a" / "spectra.csv").read_bytes() == (tmp_path / "b" / "spectra.csv").read_bytes()


def test_solve_and_spectrum(capsys):
    assert cli.main(["solve", "--model", "rosen-morse-2", "--param", "a=1", "--param", "b=0.5",
                     "--alpha", "0.05", "--beta", "0.1"]) == 0
    solved = json.loads(capsys.readouterr().out)
    assert solved["lambda1"] == pytest.approx(1.16819, abs=1e-5)
    assert cli.main(["spectrum", *OSC, "--nmax", "2"]) == 0
    rows = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
    assert rows[0] == "n,eps_minus,eps_plus,E_minus" and len(rows) == 4
