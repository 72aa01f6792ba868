import json

import pytest

from kronecker_triples.cli import main


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_spectrum_linear(tmp_path):
    code, text = run(tmp_path, "spectrum", "--operator", "linear", "--pyth", "3,4", "--N", "5")
    lines = text.splitlines()
    assert code == 0 and len(lines) == 1 + 4 * 121
    rows = [ln.split(",") for ln in lines[1:]]
    for k, l, _, br, ev in rows:
        assert abs(abs(float(ev)) - (int(k) ** 2 + int(l) ** 2) ** 0.5) < 1e-12


def test_spectrum_is_byte_identical(tmp_path):
    a = run(tmp_path, "spectrum", "--operator", "dirac", "--N", "3")[1]
    b = run(tmp_path, "spectrum", "--operator", "dirac", "--N", "3")[1]
    assert a == b and a


def test_spectrum_mixed_origin(tmp_path):
    code, text = run(tmp_path, "spectrum", "--operator", "mixed", "--N", "0", "--format", "json")
    rows = json.loads(text)["rows"]
    assert code == 0 and len(rows) == 4 and all(r["eigenvalue"] == 0 for r in rows)


def test_usage_errors(tmp_path, capsys):
    assert main(["spectrum", "--operator", "nope"]) == 2
    assert main(["verify", "bogus"]) == 2
    assert main(["spectrum", "--pyth", "1,1", "--a", "0.5"]) == 2
    assert main(["spectrum", "--a", "0.5", "--b", "0.5", "--mode", "numeric"]) == 2
    assert main(["dimension", "--rmax", "3"]) == 2
    assert main(["frobnicate"]) == 2


def test_verify_relations_and_tamper(tmp_path):
    code, text = run(tmp_path, "verify", "relations")
    report = json.loads(text)
    assert code == 0 and report["schema"] == 1 and report["passed"]
    code, text = run(tmp_path, "verify", "relations", "--tamper")
    report = json.loads(text)
    assert code == 1 and not report["passed"]
    assert all(f["witness"] is not None for f in report["failures"])


def test_verify_torus(tmp_path):
    code, text = run(tmp_path, "verify", "torus")
    assert code == 0 and json.loads(text)["n_failed"] == 0


def test_dimension(tmp_path):
    code, text = run(tmp_path, "dimension", "--operator", "dirac", "--rmax", "60")
    d = json.loads(text)
    assert code == 0 and d["schema"] == 1 and abs(d["exponent"] - 3) < 0.2
    assert len(d["R"]) == len(d["N"])


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\npyth = 5,12\nN = 1\nformat = json\n")
    code, text = run(tmp_path, "spectrum", "--config", str(cfg), "--N", "2")
    d = json.loads(text)
    assert code == 0 and d["N"] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["spectrum", "--config", str(bad)]) == 2
