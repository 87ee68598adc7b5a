import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gammakit import cli
from gammakit.errors import NoConvergence
from gammakit.instances import gamma_unitary_instance
from gammakit.io import dump_json, pair_to_instance


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def instance(tmp_path):
    path = tmp_path / "inst.json"
    code, text = run("gen-instance", "--seed", "3", "--dim", "4", "--kind", "symmetrized")
    assert code == 0
    path.write_text(text)
    return path


def test_check_point():
    code, text = run("check-point", "2", "0", "1", "0")
    doc = json.loads(text)
    assert code == 0 and doc["verdict"] == "Boundary" and doc["on_distinguished_boundary"]
    assert run("check-point", "1.5", "0", "0", "0")[0] == 2


def test_classify_gamma_unitary(tmp_path):
    pair, _, _ = gamma_unitary_instance(0, 3)
    path = tmp_path / "gu.json"
    dump_json(pair_to_instance(pair), path=str(path))
    code, text = run("classify", "-i", str(path))
    assert code == 0
    assert json.loads(text)["is_gamma_contraction"]["kind"] == "Certified"


def test_solve_fundamental_both(instance):
    code, text = run("solve-fundamental", "-i", str(instance), "--route", "both")
    doc = json.loads(text)
    assert code == 0
    assert doc["disagreement"] <= 1e-9
    assert {"pinv", "fejer_riesz", "certificate"} <= doc.keys()


def test_solve_fundamental_no_convergence(instance, monkeypatch):
    def fail(*a, **k):
        raise NoConvergence("budget exhausted", max_size=2**60 + 1)

    monkeypatch.setattr(cli, "solve_fundamental_via_fejer_riesz", fail)
    code, text = run("solve-fundamental", "-i", str(instance), "--route", "fejer-riesz")
    assert code == 3
    assert json.loads(text)["fejer_riesz"]["status"] == "NoConvergence"


def test_dilate_round_trip(instance, tmp_path):
    code, text = run("dilate", "-i", str(instance), "--blocks", "6")
    assert code == 0
    path = tmp_path / "dil.json"
    path.write_text(text)
    code, text = run("verify-dilation", "-i", str(path), "--max-degree", "4")
    doc = json.loads(text)
    assert code == 0 and doc["report"]["passed"] and doc["minimality"]["minimal"]
    # consumer re-emits the same dilation bytes
    from gammakit.dilation import TruncatedDilation

    again = json.dumps(TruncatedDilation.from_dict(json.loads(path.read_text())).to_dict())
    assert again + "\n" == path.read_text()


def test_dilate_model(instance):
    code, text = run("dilate", "-i", str(instance), "--blocks", "60", "--model")
    assert code == 0 and json.loads(text)["report"]["passed"]


def test_kernel_commands(tmp_path):
    pts = tmp_path / "pts.json"
    pts.write_text(json.dumps({"points": [[[0.5, 0], [0, 0]], [[0, 0], [0, 0]]]}))
    code, text = run("kernel-eval", "--kind", "szego", "--points", str(pts))
    doc = json.loads(text)
    assert code == 0 and len(doc["values"]) == 4
    code, text = run("kernel-eval", "--kind", "bergman:2", "--points", str(pts), "--series", "30")
    assert json.loads(text)["mode"] == "Series(30)"
    code, text = run("kernel-eval", "--kind", "symfock:2", "--points", str(pts), "--format", "csv")
    assert code == 0 and len(text.strip().splitlines()) == 5
    code, text = run("kernel-gram", "--ratio", "2", "--points", str(pts))
    doc = json.loads(text)
    assert code == 0 and doc["psd_verdict"] == "PSD"
    # z = (0.5, 0), w = (0, 0): a = b = 1
    assert doc["values"]["re"][0][1] == pytest.approx(1.0)


def test_finite_section_feeds_classify(tmp_path):
    code, text = run("finite-section", "--lambda", "2", "--cutoff", "4", "--family", "s")
    assert code == 0
    path = tmp_path / "fs.json"
    path.write_text(text)
    assert run("classify", "-i", str(path))[0] == 0


def test_gen_instance_deterministic():
    a = run("--seed", "5", "gen-instance", "--dim", "3", "--kind", "normal")
    b = run("gen-instance", "--seed", "5", "--dim", "3", "--kind", "normal")
    assert a == b and a[0] == 0
    doc = json.loads(a[1])
    assert doc["meta"]["certification"]["status"] == "GammaContraction"


def test_adversarial_exit_code(tmp_path):
    code, text = run("gen-instance", "--seed", "1", "--dim", "2", "--kind", "adversarial")
    path = tmp_path / "adv.json"
    path.write_text(text)
    assert run("solve-fundamental", "-i", str(path))[0] == 2
    assert run("classify", "-i", str(path))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [["bogus"], ["classify", "-i", "/nonexistent.json"], ["kernel-eval", "--kind", "bergman:0.5",
                                                          "--points", "x"],
     ["--tol", "-1", "check-point", "0", "0", "0", "0"], ["gen-instance"]],
)
def test_usage_errors(argv, capsys):
    assert run(*argv)[0] == 1
    assert capsys.readouterr().err


def test_bad_instance(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"S": {"rows": 2, "cols": 2, "re": [[0, 1], [0, 0]]},
                                "P": {"rows": 2, "cols": 2, "re": [[0, 0], [1, 0]]}}))
    assert run("classify", "-i", str(path))[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gammakit.cli", "check-point", "0", "0", "0", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "Interior"
    assert np.isfinite(json.loads(proc.stdout)["root_tolerance"])
