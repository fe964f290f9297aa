import json
import math
from pathlib import Path

import pytest

from btlab.cli import ConfigError, EXIT_ERROR, EXIT_FAIL, EXIT_PASS, load_config, main, to_json

ROOT = Path(__file__).resolve().parents[1]


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_list_catalog(capsys):
    assert main(["list"]) == EXIT_PASS
    out = capsys.readouterr().out
    models = out.split("models:\n")[1].split("perturbations")[0].split()
    experiments = out.split("experiments:\n")[1].split("symbols:")[0].split()
    assert len(models) == 4 and len(experiments) == 9
    assert "x3: (1 - z*zb) / (1 + z*zb)" in out


def test_minimal_config_passes(tmp_path):
    cfg = write(tmp_path, 'experiment: expansion\nmodel: cp1_fs\nsymbols: {f: "1"}\n'
                          "k_ladder: [16, 24, 32]\n")
    assert main(["run", cfg, "--output", str(tmp_path / "out")]) == EXIT_PASS
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert set(report) == {"config", "results", "pass", "versions"}
    c0 = report["results"]["fits"][0]["coefficients"][0]
    assert c0 == pytest.approx(1 / (2 * math.pi), rel=1e-9)
    lines = (tmp_path / "out" / "diagonal_0.csv").read_text().splitlines()
    assert lines[0] == "k,value" and len(lines) == 4


def test_unknown_model_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "experiment: expansion\nmodel: cp2\n")
    assert main(["run", cfg, "--output", str(tmp_path / "o")]) == EXIT_ERROR
    assert "model" in capsys.readouterr().err


@pytest.mark.parametrize("text, key", [
    ("experiment: nonsense\n", "experiment"),
    ("experiment: expansion\nsymbols: {f: y7}\n", "symbols.f"),
    ("experiment: expansion\nk_ladder: [32, 16]\n", "k_ladder"),
    ("experiment: expansion\nbogus: 1\n", "bogus"),
    ("experiment: expansion\nquadrature: {n_radial: -3}\n", "quadrature.n_radial"),
    ("experiment: expansion\nmodel: {kind: bargmann, eps: 0.1}\n", "model"),
])
def test_config_errors_name_the_key(tmp_path, text, key):
    with pytest.raises(ConfigError, match=f"'{key}'"):
        load_config(write(tmp_path, text))


def test_yaml_syntax_error_names_line(tmp_path):
    with pytest.raises(ConfigError, match="line 3"):
        load_config(write(tmp_path, "experiment: expansion\nmodel: [cp1\nk: 3\n"))


def test_forced_decay_failure_exits_2(tmp_path):
    cfg = str(ROOT / "configs" / "examples" / "decay_forced_failure.yaml")
    assert main(["run", cfg, "--output", str(tmp_path)]) == EXIT_FAIL
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["pass"] is False and "failure" in report["results"]
    assert (tmp_path / "decay.csv").read_text().splitlines()[0] == "k,dist,abs_kernel"


def test_reports_are_byte_identical(tmp_path):
    cfg = write(tmp_path, "experiment: weyl\nmodel: {kind: cp1_fs, eps: 0.1}\n"
                          'symbols: {f: "x3^2"}\nk_ladder: [8, 12, 16]\n')
    main(["run", cfg, "--output", str(tmp_path / "a")])
    main(["run", cfg, "--output", str(tmp_path / "b"), "--threads", "3"])
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()


def test_seed_controls_random_points(tmp_path):
    cfg = write(tmp_path, "experiment: star\nmodel: cp1_fs\nsymbols: {f: x3, g: x1, h: x2}\n")
    main(["run", cfg, "--output", str(tmp_path / "a"), "--seed", "1"])
    main(["run", cfg, "--output", str(tmp_path / "b"), "--seed", "2"])
    pa = json.loads((tmp_path / "a" / "report.json").read_text())["results"]["points"]
    pb = json.loads((tmp_path / "b" / "report.json").read_text())["results"]["points"]
    assert pa[0]["point"] != pb[0]["point"]


def test_json_round_trip_is_lossless():
    vals = [0.1, 1 / 3, math.pi * 1e-300, -2.5e17, 1e-7 + 3j]
    text = to_json({"v": vals})
    back = json.loads(text)["v"]
    assert back[:4] == vals[:4]
    assert complex(back[4]["re"], back[4]["im"]) == vals[4]
    assert to_json(float("nan")) == "null"


@pytest.mark.parametrize("path", sorted((ROOT / "configs").glob("*/*.yaml")))
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg["experiment"]


def test_report_carries_full_configuration(tmp_path):
    cfg = write(tmp_path, "experiment: expansion\nmodel: {kind: cp1_fs, eps: 0.1}\n"
                          'symbols: {f: x3}\nk_ladder: [8, 12, 16, 24]\nquadrature: {n_radial: 40}\n')
    main(["run", cfg, "--output", str(tmp_path / "o")])
    echo = json.loads((tmp_path / "o" / "report.json").read_text())["config"]
    assert echo["model"] == {"kind": "cp1_fs", "eps": 0.1, "perturbation": "re_bump"}
    assert echo["k_ladder"] == [8, 12, 16, 24] and echo["N"] == 8
    assert echo["quadrature_resolved"]["16"]["n_radial"] == 40
    assert echo["symbol_expressions"]["f"] == "(1 - z*zb) / (1 + z*zb)"
