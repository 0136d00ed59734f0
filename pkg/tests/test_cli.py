import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from bsrlab import cli
from bsrlab.errors import ResolutionError
from bsrlab.spectral import load_bsd

GOLDEN = Path(__file__).parent / "golden" / "help.txt"


def _run(tmp_path, command, cfg, *extra, capsys=None):
    path = tmp_path / f"{command}.json"
    path.write_text(json.dumps(cfg))
    return cli.main([command, "--config", str(path), "--out", str(tmp_path), *extra])


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


@pytest.fixture
def forward_bsd(tmp_path):
    cfg = {"potential": {"kind": "constant", "value": 0.0}, "alpha": 1.0, "lambda_max": 30.0,
           "output": "bsd.json"}
    assert _run(tmp_path, "forward", cfg) == 0
    return tmp_path / "bsd.json"


def test_help_golden():
    out = subprocess.run([sys.executable, "-m", "bsrlab.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout == GOLDEN.read_text()
    for flag in ("--config", "--out", "--threads", "--seed", "--version"):
        assert flag in out.stdout


def test_forward_first_eigenvalue(tmp_path, forward_bsd, capsys):
    bsd = load_bsd(forward_bsd)
    assert abs(bsd.lam[0] - math.pi ** 2 / 4) < 1e-8
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "forward" and len(manifest["fingerprint"]) == 64
    assert not list(tmp_path.glob("*.tmp*"))


def test_validate_and_decreasing_lambda(tmp_path, forward_bsd, capsys):
    assert _run(tmp_path, "validate", {"input": str(forward_bsd)}) == 0
    assert "validate: ok" in capsys.readouterr().out
    doc = json.loads(forward_bsd.read_text())
    e = doc["entries"]
    e[0]["lambda"], e[1]["lambda"] = e[1]["lambda"], e[0]["lambda"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert _run(tmp_path, "validate", {"input": str(bad)}) == 2
    assert _error(capsys)["exit_code"] == 2


def test_unknown_key_rejected(tmp_path, capsys):
    rc = _run(tmp_path, "vdc", {"density": {"kind": "constant"}, "bogus": 1})
    assert rc == 2
    err = _error(capsys)
    assert err["error"] == "ConfigError" and "bogus" in err["message"]


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["validate", "--config", str(tmp_path / "nope.json")]) == 2


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", "--config", "x"])
    assert exc.value.code == 2
    assert _error(capsys)["error"] == "UsageError"


def test_numeric_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise ResolutionError("unresolved")
    monkeypatch.setattr(cli, "vdc_decay_report", boom)
    assert _run(tmp_path, "vdc", {"density": {"kind": "constant"}}) == 3
    assert _error(capsys) == {"error": "ResolutionError", "message": "unresolved", "exit_code": 3}


def test_vdc_constant_density(tmp_path):
    assert _run(tmp_path, "vdc", {"density": {"kind": "constant"}, "theta": [1, 1, 0]}) == 0
    rep = json.loads((tmp_path / "vdc.json").read_text())
    assert abs(rep["exponent"] - 1.0) < 0.05
    rows = (tmp_path / "vdc.csv").read_text().splitlines()
    t, m, b = rows[1].split(",")
    assert float(t) == 1.0 and len(m.replace("-", "").replace(".", "").split("e")[0]) >= 15


def test_perturb_reconstruct_pipeline(tmp_path, forward_bsd):
    before = forward_bsd.read_bytes()
    assert _run(tmp_path, "perturb", {"input": str(forward_bsd), "amplitude": 0.01}) == 0
    pert = load_bsd(tmp_path / "bsd_perturbed.json")
    ref = load_bsd(forward_bsd)
    assert abs(pert.lam[0] - ref.lam[0] - 0.01) < 1e-12
    cfg = {"reference": str(forward_bsd), "target": str(tmp_path / "bsd_perturbed.json"),
           "tau_ladder": [2.0, 2.5], "xi": [[0, 0, 0], [0, 0, 1]]}
    assert _run(tmp_path, "reconstruct", cfg) == 0
    pts = json.loads((tmp_path / "field_points.json").read_text())["points"]
    assert len(pts) == 2 and all(p["error"] >= 0 for p in pts)
    cfg = {"reference": str(forward_bsd), "target": str(tmp_path / "bsd_perturbed.json"),
           "tau_ladder": [2.0, 2.5], "delta": 0.5, "spacing": 1.0, "synthesize": True, "spatial_n": 5}
    assert _run(tmp_path, "reconstruct", cfg, "--threads", "2") == 0
    assert (tmp_path / "field.csv").exists() and (tmp_path / "field_real.csv").exists()
    assert forward_bsd.read_bytes() == before


def test_reconstruct_domain_error(tmp_path, forward_bsd, capsys):
    cfg = {"reference": str(forward_bsd), "target": str(forward_bsd), "tau_ladder": [1.0, 2.0],
           "xi": [[0, 0, 5.0]]}
    assert _run(tmp_path, "reconstruct", cfg) == 2
    assert _error(capsys)["error"] == "DomainError"


def test_stability_and_incomplete(tmp_path):
    fwd = {"potential": {"kind": "constant", "value": 0.0}, "alpha": 1.0, "lambda_max": 200.0,
           "output": "ref.json"}
    assert _run(tmp_path, "forward", fwd) == 0
    fwd2 = dict(fwd, potential={"kind": "constant", "value": 0.05}, output="tgt.json")
    assert _run(tmp_path, "forward", fwd2) == 0
    cfg = {"reference": "ref.json", "deltas": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
           "tau_ladder": [8.5, 12.0], "lambda_cap": 200.0}
    (tmp_path / "sub").mkdir()
    path = tmp_path / "stab.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["stability", "--config", str(path), "--out", str(tmp_path / "sub"), "--seed", "3"]) == 0
    summary = json.loads((tmp_path / "sub" / "stability.json").read_text())
    assert summary["slope"] > 0.25
    cfg = {"reference": "ref.json", "target": "tgt.json", "n0_ladder": [1, 5],
           "tau_ladder": [5.0, 7.0], "lambda_cap": 200.0, "decay_range": [8.0, 16.0]}
    assert _run(tmp_path, "incomplete", cfg) == 0
    rows = (tmp_path / "incomplete.csv").read_text().splitlines()
    assert len(rows) == 3 and "-inf" in rows[1]
    assert json.loads((tmp_path / "incomplete.json").read_text())["condition"] == "c1"
    single = dict(cfg, n0_ladder=[5], output="single")
    assert _run(tmp_path, "incomplete", single) == 0
    assert json.loads((tmp_path / "single.json").read_text())["slope"] is None
    assert json.loads((tmp_path / "manifest.json").read_text())["summary"]["slope"] is None


def test_threads_must_be_positive(tmp_path, forward_bsd):
    assert _run(tmp_path, "validate", {"input": str(forward_bsd)}, "--threads", "0") == 2
