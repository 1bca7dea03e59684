import json

import jsonschema
import numpy as np
import pytest

from labevents import atlas
from labevents import lab as L
from labevents.cli import main, scenario_file


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.fixture
def no_env(monkeypatch):
    for name in ("TOLERANCE", "D", "SEED", "FORMAT", "STRICT_LOCAL"):
        monkeypatch.delenv("LABEVENTS_" + name, raising=False)


pytestmark = pytest.mark.usefixtures("no_env")


def test_table_main_json(capsys):
    code, out, _ = run(capsys, "table", "--which", "main")
    assert code == 0
    report = json.loads(out)
    assert report["matches_expected"] and len(report["rows"]) == 7
    assert report["config"] == {"tolerance": 1e-9, "d": 2, "seed": 0, "strict_local": False}


def test_table_appendix_markdown(capsys):
    code, out, _ = run(capsys, "table", "--which", "appendix", "--format", "markdown")
    assert code == 0
    assert out.startswith("| Description | QS_CT | QS_QT | QS_G |")
    assert "Unresolved" in out
    assert "seed=0" in out


def test_table_options_work_on_either_side(capsys):
    a = run(capsys, "--d", "3", "table")
    b = run(capsys, "table", "--d", "3")
    assert a == b
    assert json.loads(a[1])["config"]["d"] == 3


def test_tiny_tolerance_flips_verdicts(capsys):
    code, out, err = run(capsys, "table", "--tolerance", "1e-30")
    assert code == 1
    assert not json.loads(out)["matches_expected"]
    assert "verdict mismatch" in err


def test_strict_local_changes_the_table(capsys):
    code, _, err = run(capsys, "table", "--strict-local")
    assert code == 1
    assert "row 4" in err and "row 5" in err


@pytest.mark.parametrize("argv", [
    ("table", "--d", "7"),
    ("table", "--tolerance", "0.5"),
    ("table", "--format", "yaml"),
    ("table", "--seed", str(2 ** 70)),
    ("nonsense",),
    (),
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_env_overrides(capsys, monkeypatch):
    monkeypatch.setenv("LABEVENTS_SEED", "5")
    monkeypatch.setenv("LABEVENTS_FORMAT", "markdown")
    code, out, _ = run(capsys, "table")
    assert code == 0 and "seed=5" in out
    code, out, _ = run(capsys, "table", "--seed", "6")
    assert "seed=6" in out
    monkeypatch.setenv("LABEVENTS_D", "two")
    assert run(capsys, "table")[0] == 2


@pytest.mark.parametrize("argv,meas,loc", [
    (("--name", "qs_ct", "--agent", "alice", "--reference", "x"), "Yes", "x_A-localised"),
    (("--name", "qs_qt", "--reference", "a"), "No", "non-localised"),
    (("--name", "qs_g", "--reference", "τ"), "Yes", "tau_*-localised"),
    (("--name", "double-slit", "--agent", "quinn"), "No", None),
])
def test_scenario_examples(capsys, argv, meas, loc):
    code, out, _ = run(capsys, "scenario", *argv)
    assert code == 0
    body = json.loads(out)
    assert body["measurability"]["verdict"] == meas
    if loc is not None:
        assert body["localisation"]["verdict"] == loc


def test_scenario_double_slit_markdown(capsys):
    code, out, _ = run(capsys, "scenario", "--name", "double-slit", "--format", "markdown")
    assert code == 0
    assert "readout with π intervention | 0.0000, 1.0000" in out


@pytest.mark.parametrize("argv", [
    ("--name", "qs_g", "--reference", "t"),
    ("--name", "qs_g", "--agent", "claire", "--reference", "(x,t)"),
    ("--name", "double-slit", "--reference", "t"),
])
def test_scenario_unsupported(capsys, argv):
    code, out, err = run(capsys, "scenario", *argv)
    assert code == 2 and out == ""
    assert err.strip()


def _emit(tmp_path, capsys, *argv):
    path = tmp_path / "lab.json"
    code, out, _ = run(capsys, "scenario", *argv, "--emit-file", str(path))
    assert code == 0
    return path, json.loads(out)


def test_check_singleton_file(tmp_path, capsys):
    path, _ = _emit(tmp_path, capsys, "--name", "qs_g", "--reference", "singleton")
    code, out, _ = run(capsys, "check", str(path))
    assert code == 0
    body = json.loads(out)
    assert body["measurability"] == {"verdict": "Yes", "distance": pytest.approx(0.0, abs=1e-12)}
    assert body["localisation"]["verdict"] == "localised"
    assert all(v <= 1e-12 for v in body["localisation"]["distances"].values())


def test_check_entangled_file_is_not_measurable(tmp_path, capsys):
    path, _ = _emit(tmp_path, capsys, "--name", "qs_qt", "--reference", "(x,t)")
    code, out, _ = run(capsys, "check", str(path), "--format", "markdown")
    assert code == 0
    assert "| relative measurability | No" in out


def _corrupt(tmp_path, capsys, edit):
    path, _ = _emit(tmp_path, capsys, "--name", "qs_ct", "--reference", "x")
    doc = json.loads(path.read_text())
    edit(doc)
    path.write_text(json.dumps(doc))
    return run(capsys, "check", str(path))


def test_check_incomplete_projectors(tmp_path, capsys):
    def shrink(doc):
        doc["reference"]["projectors"] = [[[[0.9 * re, 0.9 * im] for re, im in row] for row in p]
                                          for p in doc["reference"]["projectors"]]

    code, _, err = _corrupt(tmp_path, capsys, shrink)
    assert code == 3 and "completeness" in err


def test_check_non_psd_state(tmp_path, capsys):
    def negate(doc):
        m = np.array(doc["initial"]["matrix"])
        doc["initial"]["matrix"] = (-m).tolist()

    code, _, err = _corrupt(tmp_path, capsys, negate)
    assert code == 3 and "numeric invariant" in err


def test_check_shape_error_reports_a_path(tmp_path, capsys):
    def truncate(doc):
        doc["initial"]["matrix"] = doc["initial"]["matrix"][:-1]

    code, _, err = _corrupt(tmp_path, capsys, truncate)
    assert code == 2 and "initial" in err


def test_check_schema_errors(tmp_path, capsys):
    code, _, err = _corrupt(tmp_path, capsys, lambda doc: doc.pop("schema_version"))
    assert code == 2 and "schema error" in err
    code, _, _ = _corrupt(tmp_path, capsys, lambda doc: doc.update(schema_version="2"))
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check", str(bad))[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2


def test_schema_is_valid_draft_2020_12():
    jsonschema.Draft202012Validator.check_schema(scenario_file.SCHEMA)


ROUND_TRIP = [(s, atlas.LabChoice(a, r, e)) for (s, a, r), evs in atlas.SUPPORTED.items() for e in evs
              if s is not atlas.ScenarioId.DOUBLE_SLIT]


@pytest.mark.parametrize("s,c", ROUND_TRIP, ids=[f"{s.value}-{c}" for s, c in ROUND_TRIP])
def test_scenario_file_round_trip(s, c):
    lab, ctx, event = atlas.build_context(s, c)
    lab2, ctx2, event2 = scenario_file.loads(scenario_file.dumps(lab, ctx, event))
    m1 = L.check_relative_measurability(lab, ctx, event)
    m2 = L.check_relative_measurability(lab2, ctx2, event2)
    assert m1.distance == pytest.approx(m2.distance, abs=1e-12)
    l1 = L.check_localisation(lab, ctx, event)
    l2 = L.check_localisation(lab2, ctx2, event2)
    assert l1.status == l2.status
    for k, v in l1.distances.items():
        assert l2.distances[k] == pytest.approx(v, abs=1e-12)


def test_verify_is_reproducible(capsys):
    a = run(capsys, "verify", "--seed", "7")
    b = run(capsys, "verify", "--seed", "7")
    assert a[0] == 0 and a == b
    report = json.loads(a[1])
    assert report["passed"] and len(report["criteria"]) == 9
    assert report["config"]["seed"] == 7
    assert "elapsed_s" not in report["criteria"][0]


def test_verify_timings_and_markdown(capsys):
    code, out, _ = run(capsys, "verify", "--timings")
    assert code == 0 and "elapsed_s" in json.loads(out)["criteria"][0]
    code, out, _ = run(capsys, "verify", "--format", "markdown")
    assert code == 0 and out.count("| pass |") == 9


def test_check_non_tp_continuation(tmp_path, capsys):
    path, _ = _emit(tmp_path, capsys, "--name", "qs_qt", "--reference", "(x,t)")
    doc = json.loads(path.read_text())
    doc["continuation"]["kraus"] = [(0.5 * np.array(k)).tolist() for k in doc["continuation"]["kraus"]]
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "check", str(path))
    assert code == 3 and "trace preserving" in err
