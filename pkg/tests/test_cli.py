import csv
import io
import json

import numpy as np
import pytest

from cqtsim import cli
from cqtsim.config import (
    experiments_from_config,
    spec_from_config,
    spec_to_config,
    validate_config,
)
from cqtsim.engines import enumerate_joint
from cqtsim.experiments import PRESETS
from cqtsim.qcore import ConfigurationError, NumericalUnderflowError


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def preset_doc(name="singlet", **extra):
    return {"schema_version": 1, "experiment": {"preset": name}, "engine": "both",
            "mode": "enumerate", **extra}


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_round_trip_every_preset(name):
    specs = experiments_from_config(preset_doc(name), engine="standard")
    for spec in specs.values():
        doc = json.loads(json.dumps(spec_to_config(spec)))
        back = spec_from_config(doc, engine="standard")
        assert spec_to_config(back) == spec_to_config(spec)
        assert back.event_ids == spec.event_ids
        np.testing.assert_array_equal(back.initial_state.data, spec.initial_state.data)
        if np.prod(spec.outcome_counts()) <= 2**8:
            a, b = enumerate_joint(spec), enumerate_joint(back)
            np.testing.assert_array_equal(a.weights, b.weights)


def test_schema_errors_name_the_path():
    with pytest.raises(ConfigurationError, match="runs"):
        validate_config(preset_doc(mode="sample"))
    with pytest.raises(ConfigurationError, match="bogus"):
        validate_config(preset_doc(bogus=1))
    doc = preset_doc()
    doc["engine"] = "bohm"
    with pytest.raises(ConfigurationError, match=r"config\.engine"):
        validate_config(doc)
    explicit = {
        "factor_dims": [2],
        "initial_state": {"vector": [[1, 0], [0, 0]]},
        "models": {"m": {"type": "epsilon_spin", "eps": 0.1, "colour": 1}},
        "events": [],
    }
    with pytest.raises(ConfigurationError, match=r"config\.experiment"):
        validate_config({"experiment": explicit, "engine": "causal", "mode": "enumerate"})


def test_explicit_config_errors_are_located():
    explicit = {
        "factor_dims": [2],
        "initial_state": {"vector": [[1, 0], [0, 0]]},
        "models": {"m": {"type": "epsilon_spin", "eps": 0.7}},
        "events": [{"id": "a", "t": 0, "x": 0, "factor": 0, "model": "m"}],
    }
    with pytest.raises(ConfigurationError, match=r"config\.experiment\.models\.m"):
        spec_from_config(explicit)
    explicit["models"]["m"]["eps"] = 0.1
    explicit["initial_state"] = {"vector": [[1, 0], [1, 0]]}
    with pytest.raises(ConfigurationError, match="initial_state"):
        spec_from_config(explicit)


def test_run_singlet_both_engines(tmp_path, capsys):
    code = cli.main(["run", write(tmp_path, preset_doc()), "--no-timestamp"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["schema_version"] == 1
    assert report["tool_version"].startswith("cqt-sim ")
    assert "timestamp" not in report
    results = report["experiments"][0]["results"]
    assert set(results) == {"causal", "standard"}
    assert all(len(r["table"]) == 4 for r in results.values())
    assert report["experiments"][0]["spec"]["factor_dims"] == [2, 2]


def test_timestamp_present_by_default(tmp_path, capsys):
    cli.main(["run", write(tmp_path, preset_doc())])
    assert "timestamp" in json.loads(capsys.readouterr().out)


def test_sample_without_runs_exits_2(tmp_path, capsys):
    code = cli.main(["run", write(tmp_path, preset_doc(mode="sample"))])
    assert code == 2
    assert "runs" in capsys.readouterr().err


def test_unreadable_config_exits_2(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.main(["run", str(bad)]) == 2


def test_numerical_error_exits_3(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericalUnderflowError("outcome weight underflows")
    monkeypatch.setattr(cli, "run_config", boom)
    assert cli.main(["run", write(tmp_path, preset_doc())]) == 3
    assert "numerical error" in capsys.readouterr().err


def test_repeated_runs_are_byte_identical(tmp_path):
    path = write(tmp_path, preset_doc("reversion", mode="sample", runs=5000, seed=42,
                                      engine="both"))
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["run", path, "--no-timestamp", "--out", str(out1)]) == 0
    assert cli.main(["run", path, "--no-timestamp", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_seed_and_runs_overrides(tmp_path):
    path = write(tmp_path, preset_doc(mode="sample", runs=10))
    out = tmp_path / "r.json"
    cli.main(["run", path, "--runs", "321", "--seed", "9", "--no-timestamp", "--out", str(out)])
    report = json.loads(out.read_text())
    assert report["seed"] == 9
    counts = [row["count"] for row in report["experiments"][0]["results"]["causal"]["table"]]
    assert sum(counts) == 321


def test_csv_and_json_carry_identical_values(tmp_path):
    path = write(tmp_path, preset_doc("sequential_drift"))
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    cli.main(["run", path, "--no-timestamp", "--out", str(js)])
    cli.main(["run", path, "--no-timestamp", "--out", str(cs), "--format", "csv"])
    report = json.loads(js.read_text())
    rows = list(csv.DictReader(io.StringIO(cs.read_text())))
    expected = []
    for exp in report["experiments"]:
        for eng, res in exp["results"].items():
            for row in res["table"]:
                expected.append(row["probability"])
    assert [float(r["value"]) for r in rows] == expected


def test_list_presets(capsys):
    assert cli.main(["list-presets"]) == 0
    text = capsys.readouterr().out
    for name in PRESETS:
        assert name in text
    assert cli.main(["list-presets", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {r["name"] for r in rows} == set(PRESETS)
    assert all(r["scenario"] and isinstance(r["parameters"], dict) for r in rows)


@pytest.mark.parametrize("name", ["singlet", "chsh"])
def test_compare(tmp_path, capsys, name):
    assert cli.main(["compare", write(tmp_path, preset_doc(name)), "--no-timestamp"]) == 0
    result = json.loads(capsys.readouterr().out)["comparison"]
    assert result["passed"]
    assert {e["engine"] for e in result["entries"]} == {"causal", "standard"}


def test_compare_requires_both_engines(tmp_path):
    doc = preset_doc()
    doc["engine"] = "causal"
    assert cli.main(["compare", write(tmp_path, doc)]) == 2


def test_chsh_report_block(tmp_path, capsys):
    cli.main(["run", write(tmp_path, preset_doc("chsh")), "--no-timestamp"])
    chsh = json.loads(capsys.readouterr().out)["chsh"]
    assert chsh["causal"]["S"] <= 1e-12
    assert chsh["standard"]["S"] >= 2.7


def test_explicit_experiment(tmp_path, capsys):
    r = 2**-0.5
    doc = {
        "experiment": {
            "label": "bell",
            "factor_dims": [2, 2],
            "initial_state": {"vector": [[r, 0], [0, 0], [0, 0], [r, 0]]},
            "models": {"z": {"type": "epsilon_spin", "eps": 0.05},
                       "k": {"type": "kraus", "operators": [
                           [[[0.8, 0], [0, 0]], [[0, 0], [0.6, 0]]],
                           [[[0.6, 0], [0, 0]], [[0, 0], [0.8, 0]]]]}},
            "events": [{"id": "a", "t": 0, "x": [-1], "factor": 0, "model": "z"},
                       {"id": "b", "t": 0, "x": [1], "factor": 1, "model": "k"}],
        },
        "engine": "both",
        "mode": "enumerate",
    }
    assert cli.main(["run", write(tmp_path, doc), "--no-timestamp"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["experiments"][0]["name"] == "bell"
    assert cli.main(["compare", write(tmp_path, doc, "c.json"), "--no-timestamp"]) == 0
    tv = json.loads(capsys.readouterr().out)["comparison"][0]["total_variation"]
    assert 0 < tv < 1
