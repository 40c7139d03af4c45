import json
import subprocess
import sys

import pytest

from voltlab.checks import Assertion
from voltlab.cli import (ConfigError, ScenarioResult, emit_report, main, parse_config,
                         scenario_library)


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def test_library_mirrors_acceptance():
    lib = scenario_library()
    numbered = sorted(n for n in lib if n[0] == "a" and n[1:3].isdigit())
    assert [n[:3] for n in numbered] == [f"a{i:02d}" for i in range(1, 13)]
    for path in lib.values():
        parse_config(json.loads(path.read_text()))


@pytest.mark.parametrize("doc", [
    [],
    {"kind": "verify"},
    {"name": "x", "kind": "plot"},
    {"name": "x", "kind": "verify", "params": {"checks": ["nope"]}},
    {"name": "x", "kind": "verify", "params": {"checks": {"der": {"bogus": 1}}}},
    {"name": "x", "kind": "verify", "params": {"seed": -1}},
    {"name": "x", "kind": "verify", "params": {"colour": 1}},
    {"name": "x", "kind": "orbit", "params": {"checks": {"dump": {"operator": "W"}}}},
    {"name": "x", "kind": "orbit", "params": {"checks": {"dump": {"x": "import os"}}}},
])
def test_bad_configs(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


@pytest.mark.parametrize("text", ["{not json", json.dumps({"name": "x", "kind": "orbit"})])
def test_config_error_exit_code_and_no_outputs(tmp_path, text):
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert main(["verify", "--config", cfg, "--out", str(out), "--quiet"]) == 2
    assert not out.exists()


def test_missing_config_file(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 2


def test_identity_suite_passes(tmp_path):
    out = tmp_path / "ids"
    assert main(["verify", "--config", "identity_suite", "--out", str(out), "--quiet"]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["passed"] and s["scenario"] == "identity_suite"
    names = [a["name"] for a in s["assertions"]]
    assert any(n.startswith("der:") for n in names) and any(n.startswith("g1_chain:") for n in names)
    assert "| verdict |" in (out / "report.md").read_text()
    assert "timestamp" in json.loads((out / "run_meta.json").read_text())
    assert "timestamp" not in s


def test_certify_default_writes_certificate(tmp_path):
    out = tmp_path / "cert"
    assert main(["certify", "--out", str(out), "--quiet"]) == 0
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["k"] == 4 and cert["epsilon"] > 0
    assert (out / "small_ball.csv").exists()


def test_determinism(tmp_path):
    cfg = write(tmp_path, {"name": "d", "kind": "kronecker",
                           "params": {"checks": {"density": {"targets": 3, "two_term_targets": 2,
                                                             "obstruction_samples": 100}}}})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["kronecker", "--config", cfg, "--out", str(a), "--seed", "9", "--quiet"]) == 0
    assert main(["kronecker", "--config", cfg, "--out", str(b), "--seed", "9", "--quiet"]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "density.json").read_bytes() == (b / "density.json").read_bytes()


def test_assertion_failure_exit_code(tmp_path):
    cfg = write(tmp_path, {"name": "f", "kind": "verify",
                           "params": {"checks": {"volterra_calculus": {"N": 64, "n_max": 3}}}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "f"), "--quiet"]) == 3
    s = json.loads((tmp_path / "f" / "summary.json").read_text())
    assert not s["passed"]


def test_grid_override(tmp_path):
    out = tmp_path / "g"
    assert main(["verify", "--config", "a03_der", "--grid", "32", "--out", str(out), "--quiet"]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert "N = 32" in s["assertions"][0]["name"]


def test_orbit_dump(tmp_path):
    out = tmp_path / "o"
    assert main(["orbit", "--config", "orbit_dump_cesaro", "--out", str(out), "--quiet"]) == 0
    header = (out / "orbit.csv").read_text().splitlines()[0]
    assert header == "n,log_norm,functional_1,functional_2"


def test_emit_report_flags_empty_and_ands():
    ok = ScenarioResult("ok", "verify", [Assertion("a", "anchor", 1.0, "<= 2", True)])
    empty = ScenarioResult("empty", "verify")
    md, summary = emit_report([ok])
    assert summary["passed"] and "Aggregate verdict: PASS" in md
    md, summary = emit_report([ok, empty])
    assert not summary["passed"]
    assert "| empty | no assertions | | | | FLAGGED |" in md
    with pytest.raises(ValueError):
        emit_report([])


def test_report_subcommand(tmp_path):
    runs = tmp_path / "runs"
    main(["commutant", "--out", str(runs / "c"), "--quiet"])
    main(["verify", "--config", "a10_quasinilpotency", "--out", str(runs / "q"), "--quiet"])
    assert main(["report", "--out", str(runs), "--quiet"]) == 0
    summary = json.loads((runs / "report.json").read_text())
    assert summary["passed"] and len(summary["scenarios"]) == 2
    assert main(["report", "--out", str(tmp_path / "empty"), "--quiet"]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "voltlab", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "a12_pipeline" in r.stdout
