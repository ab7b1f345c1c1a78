import json

import pytest
from hypothesis import given, settings, strategies as st

from cocylab.cli import main
from cocylab.errors import ConfigInvalid, UnknownTemplate
from cocylab.runner import run_config, run_scenario
from cocylab.scenarios import TEMPLATES, build_scenario, dump_config, generate_scenario, load_config

GOLDEN = {"transition": [[1, 1], [1, 0]], "alpha": 0.5, "beta": 1.0, "seed": 1,
          "experiments": [{"id": "mix", "type": "validate"}]}


def test_golden_validate_only(tmp_path):
    bundle = run_scenario(GOLDEN, out=tmp_path)
    assert bundle.passed
    assert bundle.experiment("mix")["report"]["N_mix"] == 2
    saved = json.loads((tmp_path / "bundle.json").read_text())
    assert saved["overall"] == "PASS"


def test_empty_experiments():
    bundle = run_config(load_config({"transition": [[1, 1], [1, 1]]}))
    assert bundle.passed and bundle.experiments == []
    assert bundle.to_json()["metadata"]["seed"] == 0


def test_malformed_row_named():
    with pytest.raises(ConfigInvalid, match="row 1"):
        load_config({"transition": [[1, 1], [1, 1, 0]]})


@pytest.mark.parametrize("bad,where", [
    ({"transition": [[1, 1], [1, 1]], "alpha": 2}, "/alpha"),
    ({"transition": [[1, 1], [1, 1]], "experiments": [{"type": "nope"}]}, "/experiments/0/type"),
    ({"transition": [[1, 1], [1, 1]], "systems": {"B": {"perturb": {"of": "Z"}}}}, "/systems/B"),
    ({"transition": [[1, 1], [1, 1]], "systems": {"A": {"generator": {"window_radius": 1, "entries": {"01": []}}}}},
     "/systems/A/generator/entries/01"),
])
def test_config_errors_have_pointers(bad, where):
    with pytest.raises(ConfigInvalid, match=where):
        load_config(bad)


def test_unknown_template():
    with pytest.raises(UnknownTemplate):
        generate_scenario("thm9.9", 0)


@pytest.mark.parametrize("name", TEMPLATES)
def test_templates_reproducible(name):
    assert dump_config(generate_scenario(name, 5)) == dump_config(generate_scenario(name, 5))
    build_scenario(generate_scenario(name, 5))


def test_templates_depend_on_seed():
    assert dump_config(generate_scenario("thm2.2-roundtrip", 1)) != dump_config(generate_scenario("thm2.2-roundtrip", 2))


def test_roundtrip_equal_by_construction():
    cfg = generate_scenario("thm2.2-roundtrip", 7)
    assert cfg["systems"]["B"] == {"conjugate": {"of": "A", "field": "C_true", "inverse": True}}
    cfg["experiments"] = [e for e in cfg["experiments"] if e["type"] == "periodic"]
    bundle = run_config(cfg)
    assert bundle.passed and bundle.experiments[0]["report"]["max_residual"] < 1e-9


@settings(max_examples=5)
@given(st.integers(0, 10_000))
def test_negative_template_fails_condition_b(seed):
    cfg = generate_scenario("negative-pcf", seed)
    cfg["experiments"] = [dict(e, windows=[2]) for e in cfg["experiments"] if e["type"] == "condition_b"]
    bundle = run_config(cfg)
    x = bundle.experiments[0]
    assert x["outcome"] == "FAIL" and x["status"] == "PASS"
    assert x["report"]["condition_a"] < 1e-9


def test_crosscheck_routes_agree():
    cfg = generate_scenario("cor4.2-crosscheck", 3)
    cfg["experiments"] = [e for e in cfg["experiments"] if e["type"] == "bunching"]
    bundle = run_config(cfg)
    for x in bundle.experiments:
        assert not x["report"]["contradiction"]
        assert x["status"] == "PASS"


def test_cli_template_and_run(tmp_path, capsys, monkeypatch):
    assert main(["template", "prop4.8-tower", "--seed", "2", "--out", str(tmp_path)]) == 0
    cfg_path = tmp_path / "prop4.8-tower.json"
    assert json.loads(cfg_path.read_text())["seed"] == 2
    monkeypatch.setenv("COCYLAB_THREADS", "3")
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert json.loads((out / "timings.json").read_text())["threads"] == 3
    assert (out / "tables" / "tower-T1-tower.csv").read_text().startswith("k,dim\n1,2\n2,4\n")
    capsys.readouterr()
    assert main(["centralizer", "--config", str(cfg_path), "--system", "T1", "--orbit", "0"]) == 0
    rep = json.loads(capsys.readouterr().out)["experiments"]["centralizer"]["report"]
    assert rep["L_star"] == 2


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"transition": [[1, 1], [1]]}))
    assert main(["validate", "--config", str(bad)]) == 2
    assert "row 1" in capsys.readouterr().err
    cfg = generate_scenario("negative-pcf", 0)
    path = tmp_path / "neg.json"
    path.write_text(dump_config(cfg))
    # the negative control fails condition (b), so the plain conjugacy command fails
    assert main(["conjugacy", "--config", str(path), "--mode", "equal", "--window", "3"]) == 2
    assert main(["bunching", "--config", str(path), "--system", "A", "--max-n", "8"]) == 0


def test_cli_emit_field(tmp_path):
    cfg = generate_scenario("thm2.2-roundtrip", 7)
    path = tmp_path / "rt.json"
    path.write_text(dump_config(cfg))
    field = tmp_path / "field.json"
    assert main(["conjugacy", "--config", str(path), "--mode", "equal", "--window", "4",
                 "--emit", str(field), "--out", str(tmp_path / "o")]) == 0
    obj = json.loads(field.read_text())
    assert set(obj) >= {"p0", "C_p", "cache", "holder"}
    assert len(obj["cache"]) == 16
