import json
import os
import subprocess
import sys

import pytest

from ncgrass.algebra import layered
from ncgrass.cli import main, point_to_json
from ncgrass.grassmann import affine_embed


def run(args, doc=None, env=None):
    full_env = {k: v for k, v in os.environ.items() if not k.startswith("NCGRASS_")}
    full_env.update(env or {})
    proc = subprocess.run([sys.executable, "-m", "ncgrass", *args],
                          input=None if doc is None else json.dumps(doc),
                          capture_output=True, text=True, env=full_env, timeout=120)
    out = json.loads(proc.stdout) if proc.stdout.strip() else None
    return proc.returncode, out, proc.stderr


def scalar_point(x, mode="exact"):
    return point_to_json(affine_embed(layered([[x]], 1, 1, 1, mode)))


def test_resolvent_scalar():
    doc = {"pi": scalar_point(0), "sigma": scalar_point(2)}
    code, out, _ = run(["resolvent", "--v", "1", "--u", "1"], doc)
    assert code == 0
    assert out["scalar"] == "1/2"
    assert out["value"]["data"] == [["1/2", "0/1"]]


def test_resolvent_from_file(tmp_path):
    path = tmp_path / "in.json"
    path.write_text(json.dumps({"pi": scalar_point(1), "sigma": scalar_point(5)}))
    code, out, _ = run(["resolvent", "--v", "1", "--u", "1", str(path)])
    assert code == 0 and out["scalar"] == "1/4"


def test_equiv():
    code, out, _ = run(["equiv"], {"sigma": scalar_point(0), "tau": scalar_point(1)})
    assert code == 0 and out == {"equiv": False}
    code, out, _ = run(["equiv"], {"sigma": scalar_point(3), "tau": scalar_point(3)})
    assert out == {"equiv": True}


def test_embed_extract_round_trip():
    X = {"m": 1, "n": 1, "k": 1, "mode": "exact", "data": [["3/2", "0"]]}
    code, sigma, _ = run(["embed"], {"X": X})
    assert code == 0 and sigma["d"] == 1 and sigma["m"] == 2
    code, out, _ = run(["extract"], {"sigma": sigma})
    assert out["affine"] and out["X"]["data"] == [["3/2", "0/1"]]


def test_inset_and_transversal():
    doc = {"pi": scalar_point(2), "sigma": scalar_point(2)}
    assert run(["inset"], doc)[1] == {"in_resolvent_set": False}
    assert run(["transversal"], doc)[1] == {"transversal": False}
    doc["sigma"] = scalar_point(3)
    assert run(["inset"], doc)[1] == {"in_resolvent_set": True}


def test_reseq_passes():
    doc = {"pi": scalar_point(0), "sigma": scalar_point(2), "sigma2": scalar_point(3),
           "X": {"m": 1, "n": 1, "k": 1, "mode": "exact", "data": [["1", "0"]]}}
    code, out, _ = run(["reseq", "--s", "1", "--t", "1", "--v", "1", "--u", "1"], doc)
    assert code == 0 and out == {"pass": True, "residual": 0.0}


def test_verify_exact():
    code, out, _ = run(["verify", "--suite", "reseq", "--seed", "42", "--cases", "20", "--mode", "exact"])
    assert code == 0 and out["ok"] and out["max_residual"] == 0.0
    assert out["config"]["mode"] == "exact" and out["config"]["seed"] == 42


def test_verify_several_suites(tmp_path):
    report = tmp_path / "report.json"
    code, out, _ = run(["verify", "--suite", "flag", "--suite", "negative", "--cases", "6",
                        "--out", str(report)])
    assert code == 0 and out["ok"]
    assert [r["suite"] for r in out["reports"]] == ["flag", "negative"]
    assert json.loads(report.read_text()) == out


def test_env_overrides():
    code, out, _ = run(["verify", "--suite", "reseq", "--cases", "3"],
                       env={"NCGRASS_MODE": "exact", "NCGRASS_TOL": "1e-6"})
    assert code == 0 and out["config"]["mode"] == "exact" and out["config"]["tol"] == 1e-6
    code, out, _ = run(["verify", "--suite", "reseq", "--cases", "3", "--mode", "float"],
                       env={"NCGRASS_MODE": "exact"})
    assert out["config"]["mode"] == "float"


def test_dilate_and_correspond():
    code, out, _ = run(["dilate"], {"a": [[0.5]]})
    assert code == 0 and out["unitarity_residual"] < 1e-10
    re, _ = out["t"]["data"][0]
    assert abs(float(re) - 3 ** -0.5) < 1e-12
    code, out, _ = run(["correspond"], {"a": [[0.5]], "beta": [[1.0]]})
    assert code == 0 and out["agree"]


@pytest.mark.parametrize("args, doc", [
    ([], None),
    (["no-such-verb"], {}),
    (["resolvent", "--v", "1"], {}),
    (["equiv"], {"sigma": scalar_point(0)}),
    (["verify", "--suite", "nope"], None),
])
def test_usage_errors(args, doc):
    code, out, err = run(args, doc if doc is not None else {})
    assert code == 2 and out is None and err


def test_bad_json_and_env():
    proc = subprocess.run([sys.executable, "-m", "ncgrass", "equiv"], input="{not json",
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "invalid JSON" in proc.stderr
    code, _, err = run(["equiv"], {"sigma": scalar_point(0), "tau": scalar_point(0)},
                       env={"NCGRASS_TOL": "abc"})
    assert code == 2 and "NCGRASS_TOL" in err


def test_verification_failure_exit_code(monkeypatch, capsys):
    from ncgrass import harness as H
    from ncgrass.harness import CaseOutcome

    monkeypatch.setitem(H.SUITES, "reseq",
                        H.Suite("reseq", 1, lambda rng, cfg, i: CaseOutcome(False, 1.0)))
    assert main(["verify", "--suite", "reseq"]) == 1
    assert json.loads(capsys.readouterr().out)["ok"] is False
