import json
import os

import pytest

from pvbs import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_classify(capsys):
    code, out, _ = run_cli(capsys, "classify", "--lambda-a", "1,1",
                           "--lambda-b", "2,3")
    assert code == 0
    assert json.loads(out)["classification"] == "gapless"


def test_classify_validation_error(capsys):
    code, _, err = run_cli(capsys, "classify", "--lambda-a", "0",
                           "--lambda-b", "2")
    assert code == 2
    assert "error" in err


def test_gap_box(capsys):
    code, out, _ = run_cli(capsys, "gap", "--volume", "box:3",
                           "--lambda-a", "2", "--lambda-b", "0.5")
    assert code == 0
    rec = json.loads(out)
    assert rec["kernel_total"] == 4
    assert rec["gap"] > 0


def test_gap_deterministic_bytes(capsys):
    args = ("gap", "--volume", "box:4", "--lambda-a", "2",
            "--lambda-b", "0.5")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2


def test_gap_dimension_mismatch(capsys):
    code, _, _ = run_cli(capsys, "gap", "--volume", "box:2x2",
                         "--lambda-a", "2", "--lambda-b", "0.5")
    assert code == 2


def test_certify_d1(capsys):
    code, out, _ = run_cli(capsys, "certify", "-d", "1",
                           "--lambda-a", "10", "--lambda-b", "0.1")
    assert code == 0
    rec = json.loads(out)
    assert rec["ell"] == 7
    assert rec["final_bound"] > 0
    assert all(c["pass"] for c in rec["conditions"])


def test_certify_gapless_is_validation_error(capsys):
    code, _, _ = run_cli(capsys, "certify", "--lambda-a", "1",
                         "--lambda-b", "2")
    assert code == 2


def test_certify_margin_failure_is_budget_error(capsys):
    code, _, err = run_cli(capsys, "certify", "--lambda-a", "1.001",
                           "--lambda-b", "1.001")
    assert code == 3
    assert "gapless manifold" in err


def test_verify_lemmas(capsys):
    code, out, _ = run_cli(capsys, "verify-lemmas", "--lambda-a", "2",
                           "--lambda-b", "0.5", "--trials", "5")
    assert code == 0
    rec = json.loads(out)
    assert rec["all_pass"] is True
    assert rec["checks"] > 0


def test_verify_projection(capsys):
    code, out, _ = run_cli(capsys, "verify-projection", "--lambda-a", "10",
                           "--lambda-b", "0.1", "--n", "7", "--ell", "7")
    assert code == 0
    rec = json.loads(out)
    assert rec["condition_i"]["pass"] and rec["condition_iii"]["pass"]


def test_scaling(capsys):
    code, out, _ = run_cli(capsys, "scaling", "--lambda-a", "1",
                           "--lambda-b", "2", "--sizes", "2,3,4")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["trial_energy"] for r in rows] == [0.5, 1 / 3, 0.25]


def test_sweep_with_cache(capsys, tmp_path):
    cdir = str(tmp_path / "cache")
    args = ("sweep", "--grid-a", "0.5,1.0,2.0", "--lambda-b", "2",
            "--sizes", "4,6", "--cache-dir", cdir, "--format", "json")
    code, out, err = run_cli(capsys, *args)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 6
    assert all(r["status"] == "ok" for r in rows)
    # gapless column has the smallest gap at each size
    for size in (4, 6):
        col = {r["lambda_a"]: r["gap"] for r in rows if r["L"] == size}
        assert col["1.0"] == min(col.values())
    # second run: all cache hits, byte-identical output
    code2, out2, err2 = run_cli(capsys, *args)
    assert out2 == out
    assert "6 cache hits, 0 solves" in err2
    assert len(os.listdir(cdir)) == 6


def test_sweep_env_cache(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PVBS_CACHE_DIR", str(tmp_path))
    run_cli(capsys, "sweep", "--grid-a", "2", "--lambda-b", "2",
            "--sizes", "3")
    assert len(os.listdir(tmp_path)) == 1


def test_sweep_csv(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--grid-a", "2",
                           "--lambda-b", "0.5", "--sizes", "3",
                           "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda_a,lambda_b,L,gap,status"
    assert len(lines) == 2


def test_info(capsys):
    code, out, _ = run_cli(capsys, "info")
    rec = json.loads(out)
    assert code == 0
    assert rec["dense_cap"] == 4096
    assert rec["eta"] == 0.05
    assert rec["power_iteration_tol"] == 1e-8


def test_parse_volume():
    v = cli.parse_volume("case1:1@2x2")
    assert len(v) == 4
    v2 = cli.parse_volume("case2:@1x1")
    assert len(v2) == 2
    with pytest.raises(ValueError):
        cli.parse_volume("sphere:3")


def test_canonical_json_17_digits():
    s = cli.dumps_canonical({"x": 1 / 3, "y": [2.0, True, None, "s"]})
    assert s == '{"x":0.33333333333333331,"y":[2.0,true,null,"s"]}'
