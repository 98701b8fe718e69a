import io
import json
import subprocess
import sys

import pytest

from critline.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_encode_decode():
    assert call("encode", "13") == (0, "11012222\n", "")
    assert call("decode", "11012222")[1] == "13\n"
    assert call("decode", "121")[0] == 1


def test_qpe_csv_has_metadata():
    code, out, _ = call("qpe", "--t", "3", "--xi", "0.1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# tool: critline"
    header = lines.index("label,re,im,probability")
    assert len(lines) - header - 1 == 8


def test_json_output_to_file(tmp_path):
    path = tmp_path / "q.json"
    code, out, _ = call("qpe", "--t", "2", "--xi", "0.125", "--format", "json", "--output", str(path))
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["metadata"]["seed"] == 0
    assert doc["result"]["low_half_mass"] == pytest.approx(0.5)


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("CRITLINE_OUTPUT_DIR", str(tmp_path))
    assert call("spectrum", "--model", "xy", "--L", "8", "--method", "closed")[0] == 0
    doc = json.loads((tmp_path / "spectrum.json").read_text())
    assert doc["result"]["classification"] == "Gapless"


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"t": 3, "xi": 0.0625, "format": "json"}))
    code, out, _ = call("qpe", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["result"]["t"] == 3
    cfg.write_text(json.dumps({"nope": 1}))
    assert call("qpe", "--config", str(cfg))[0] == 1


def test_usage_errors_exit_one():
    assert call()[0] == 1
    assert call("bogus")[0] == 1
    assert call("qpe", "--t", "3")[0] == 1
    assert call("compare", "--lam-a", "0.1", "--lam-b", "0", "--t", "30")[0] == 1
    assert call("spectrum", "--model", "xy", "--L", "20", "--max-dense-dim", "64")[0] == 1


def test_compare_and_trotter():
    code, out, _ = call("compare", "--lam-a", "0.3", "--lam-b", "0.1", "--t", "3", "--format", "json")
    assert code == 0
    probs = [r[2] for r in json.loads(out)["result"]["rows"]]
    assert sum(probs) == pytest.approx(1.0)
    code, out, _ = call("trotter", "--steps", "4", "8", "16")
    assert json.loads(out)["result"]["global_slope"] == pytest.approx(2.0, abs=0.1)


def test_spectrum_models():
    code, out, _ = call("spectrum", "--model", "trivial", "--L", "6")
    assert json.loads(out)["result"]["classification"] == "Gapped"
    code, out, _ = call("spectrum", "--model", "guarded", "--L", "3")
    res = json.loads(out)["result"]
    assert res["order_parameter"] == pytest.approx(1.0)
    assert res["classification"] is None
    code, out, _ = call("spectrum", "--model", "xy", "--L", "10", "--method", "lanczos", "--levels", "2")
    assert json.loads(out)["result"]["classification"] == "Gapless"


def test_eta_command(tmp_path):
    code, out, _ = call("eta", "--mode", "one", "--phi", "0.3", "--t", "6")
    assert code == 0
    assert json.loads(out)["result"]["value"] > 0.9
    assert call("eta", "--mode", "two", "--phi", "0.1", "--t", "6")[0] == 1
    from critline.eta import oracle_to_dict, toy_two_param_oracle

    path = tmp_path / "o.json"
    path.write_text(json.dumps(oracle_to_dict(toy_two_param_oracle(1))))
    code, out, _ = call("eta", "--mode", "two", "--phi", "0.1", "--theta", "0.3", "--t", "4", "--oracle", str(path), "--input", "0")
    assert code == 0


def test_assemble_command():
    code, out, _ = call("assemble", "--eta", "0.95", "--L", "16", "--m", "2")
    res = json.loads(out)["result"]
    assert res["square"]["sign"] == "Negative"
    assert "threshold_size" in res
    code, out, _ = call("assemble", "--eta", "0.1", "--L", "16", "--m", "2", "--theta", "1.0")
    assert json.loads(out)["result"]["square"]["sign"] == "NonNegative"


def test_phase_diagram_and_promise_exit(tmp_path):
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps({"kind": "1crt", "N": 4, "alpha": 0.2, "beta": 0.3, "phi_domain": [0, 0.5]}))
    out_path = tmp_path / "pd.json"
    code, _, _ = call("phase-diagram", "--instance", str(inst), "--mode", "1crt", "--brute", "20", "--output", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["result"]["solution"]["decision"] == "YES" and doc["result"]["agree"]
    assert (tmp_path / "pd.csv").read_text().splitlines()[-1].endswith("PhaseB")
    inst.write_text(json.dumps({"kind": "1crt", "N": 4, "alpha": 0.2, "beta": 0.3, "planted": {"phi_star": 0.25}}))
    code, _, err = call("phase-diagram", "--instance", str(inst), "--mode", "1crt")
    assert code == 2 and "promise" in err
    assert call("phase-diagram", "--instance", str(inst), "--mode", "2crt")[0] == 1


def test_verify_quick_suite(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, out, _ = call("verify", "--suite", "encoding", "--output", str(a))
    assert code == 0 and out.startswith("PASS")
    call("verify", "--suite", "encoding", "--output", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "critline.cli", "encode", "5"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "101222\n"
