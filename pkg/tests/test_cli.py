import json
import math
import subprocess
import sys

import pytest

from bb84sec.cli import main, parse_sweep


def _run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def _records(text):
    return [json.loads(line) for line in text.splitlines()]


class TestValidate:
    def test_identity(self, fixtures_dir, tmp_path):
        code, text = _run(["validate", str(fixtures_dir / "identity.json")], tmp_path)
        doc = json.loads(text)
        assert code == 0 and doc["passed"]
        assert doc["checks"][0]["error_rates"] == {"pe": 0.0, "pe_x": 0.0, "pe_z": 0.0}

    def test_cnot(self, fixtures_dir, tmp_path):
        code, text = _run(["validate", str(fixtures_dir / "cnot.json")], tmp_path)
        assert code == 0
        assert json.loads(text)["checks"][0]["error_rates"] == {"pe": 0.25, "pe_x": 0.5, "pe_z": 0.0}

    def test_dependent_checks_fail(self, fixtures_dir, tmp_path):
        code, text = _run(["validate", str(fixtures_dir / "dependent_ecc.json")], tmp_path)
        doc = json.loads(text)
        assert code == 1 and not doc["passed"]
        code_check = [c for c in doc["checks"] if c["item"] == "code"][0]
        assert any("independent" in v["invariant"] for v in code_check["violations"])

    def test_broken_attack(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"attack": {"probe_dim": 1, "e00": [[1, 0]], "e01": [[1, 0]], "e10": [[0, 0]], "e11": [[1, 0]]}}))
        code, text = _run(["validate", str(cfg)], tmp_path)
        assert code == 1
        assert json.loads(text)["checks"][0]["violations"]

    @pytest.mark.parametrize(
        "content",
        ["{not json", json.dumps({"code": {"v": "000"}}), "[]"],
    )
    def test_input_errors(self, tmp_path, content, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(content)
        assert main(["validate", str(cfg)]) == 2
        assert "bb84sec" in capsys.readouterr().err

    def test_noise_length_mismatch(self, tmp_path):
        cfg = tmp_path / "short.json"
        cfg.write_text(json.dumps({"code": {"v": "10"}, "noise": {"alphas": [0.1]}}))
        code, text = _run(["validate", str(cfg)], tmp_path)
        assert code == 1
        assert [c["ok"] for c in json.loads(text)["checks"]] == [True, False]

    def test_missing_file(self, tmp_path):
        assert main(["validate", str(tmp_path / "absent.json")]) == 2


class TestBounds:
    def test_sweep_decreases_with_n(self, fixtures_dir, tmp_path):
        code, text = _run(["bounds", str(fixtures_dir / "sweep.json"), "--sweep", "n=20000:100000:5"], tmp_path)
        assert code == 0
        recs = _records(text)
        assert [r["params"]["n"] for r in recs] == [20000, 40000, 60000, 80000, 100000]
        logs = [r["report"]["log2_total_info_bound"] for r in recs]
        assert all(a > b for a, b in zip(logs, logs[1:]))

    def test_two_dimensional_sweep(self, fixtures_dir, tmp_path):
        code, text = _run(
            ["bounds", str(fixtures_dir / "sweep.json"), "--sweep", "delta=0.002:0.006:3", "--sweep", "alpha=0.5:0.9:2"],
            tmp_path,
        )
        recs = _records(text)
        assert code == 0 and len(recs) == 6
        assert [r["index"] for r in recs] == list(range(6))

    def test_code_record_and_per_coset(self, fixtures_dir, tmp_path):
        doc = json.loads((fixtures_dir / "brute_n6_r2.json").read_text())
        doc["bounds"] = {"p_test": 0.0, "delta": 0.01}
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(doc))
        code, text = _run(["bounds", str(cfg), "--mode", "per_coset"], tmp_path)
        recs = _records(text)
        assert code == 0
        assert recs[0]["record"] == "code" and len(recs[0]["coset_weights"]) == 4
        rep = recs[1]["report"]
        assert (rep["n"], rep["r"], rep["mode"]) == (6, 2, "per_coset")
        assert len(rep["per_coset_terms"]) == 4
        assert recs[0]["sd_bound"] == pytest.approx(min(1.0, recs[0]["tr_delta_bound"] / 2))

    def test_zero_noise_code_bounds(self, fixtures_dir, tmp_path):
        code, text = _run(["bounds", str(fixtures_dir / "identity.json")], tmp_path)
        recs = _records(text)
        assert code == 0
        assert recs[0]["tr_delta_bound"] == 0.0 and recs[0]["sd_bound"] == 0.0
        rep = recs[1]["report"]
        assert rep["hoeffding_tail"] == pytest.approx(2 * math.exp(-2 * 1000 * 0.05 ** 2))

    def test_p_test_sweep_monotone(self, fixtures_dir, tmp_path):
        code, text = _run(["bounds", str(fixtures_dir / "sweep.json"), "--sweep", "p_test=0:0.1:11"], tmp_path)
        firsts = [r["report"]["log2_first_term"] for r in _records(text)]
        assert code == 0 and len(firsts) == 11
        assert all(a <= b for a, b in zip(firsts, firsts[1:]))

    def test_bad_point_reported(self, fixtures_dir, tmp_path):
        code, text = _run(["bounds", str(fixtures_dir / "sweep.json"), "--sweep", "r=100:30000:2"], tmp_path)
        recs = _records(text)
        assert code == 1
        assert "report" in recs[0] and "error" in recs[1]

    def test_witness(self, fixtures_dir, tmp_path):
        code, text = _run(["bounds", str(fixtures_dir / "sweep.json"), "--find-witness"], tmp_path)
        w = _records(text)[-1]
        assert code == 0 and w["record"] == "witness" and w["verified"]
        assert w["report"]["p_test"] == 0.02
        assert w["log2_total_high_precision"] <= -100

    def test_bad_sweep_spec(self, fixtures_dir):
        with pytest.raises(SystemExit) as exc:
            main(["bounds", str(fixtures_dir / "sweep.json"), "--sweep", "q=1:2:3"])
        assert exc.value.code == 2


def test_parse_sweep():
    assert parse_sweep("n=10:20:3") == ("n", [10, 15, 20])
    assert parse_sweep("delta=0.1:0.1:1") == ("delta", [0.1])


class TestBruteCheck:
    def test_fixture(self, fixtures_dir, tmp_path):
        code, text = _run(["brute-check", str(fixtures_dir / "brute_n6_r2.json"), "--povm-trials", "20"], tmp_path)
        doc = json.loads(text)
        assert code == 0 and doc["passed"]
        assert doc["trace_norm_brute"] <= doc["trace_norm_bound"] + 1e-9

    def test_noise_from_attack(self, fixtures_dir, tmp_path):
        code, text = _run(["brute-check", str(fixtures_dir / "cnot.json"), "--povm-trials", "5"], tmp_path)
        assert code == 0 and json.loads(text)["passed"]


class TestSimulate:
    def test_identity(self, fixtures_dir, tmp_path):
        code, text = _run(["simulate", str(fixtures_dir / "identity.json")], tmp_path)
        doc = json.loads(text)
        assert code == 0
        assert doc["transcript"]["p_test"] == 0.0 and doc["transcript"]["accepted"]

    def test_monte_carlo(self, fixtures_dir, tmp_path):
        code, text = _run(["simulate", str(fixtures_dir / "hoeffding.json")], tmp_path)
        mc = json.loads(text)["monte_carlo"]
        assert code == 0 and mc["within_bound"] and mc["n_test"] == 100
        assert mc["bound"] == pytest.approx(1.2130613194252668)

    def test_seed_override(self, fixtures_dir, tmp_path):
        _, a = _run(["simulate", str(fixtures_dir / "identity.json"), "--seed", "1"], tmp_path, "a.json")
        _, b = _run(["simulate", str(fixtures_dir / "identity.json"), "--seed", "2"], tmp_path, "b.json")
        assert a != b

    def test_missing_protocol(self, fixtures_dir):
        assert main(["simulate", str(fixtures_dir / "sweep.json")]) == 2


def test_module_entry_point(fixtures_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "bb84sec", "validate", str(fixtures_dir / "dependent_ecc.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["passed"] is False
