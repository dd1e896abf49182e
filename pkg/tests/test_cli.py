import json
import math

import pytest

from binmat.cli import main
from binmat.matroid import Matroid


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_census_basics(capsys):
    art = run_json(capsys, "census", "--forbid", "O2", "--n", "2")
    assert art["schema"] == "binmat/1"
    assert art["command"] == "census"
    assert art["config"]["forbid"] == ["O2"]
    row = art["result"]["rows"][0]
    assert row["n"] == 2 and row["count"] == "7"
    assert row["entropy"] == pytest.approx(math.log2(7))


def test_census_range_and_free_property(capsys):
    art = run_json(capsys, "census", "--n", "1:3")
    counts = [row["count"] for row in art["result"]["rows"]]
    assert counts == ["2", "8", "128"]  # 2^(2^n - 1)


def test_entropy_table_free(capsys):
    art = run_json(capsys, "entropy-table", "--n", "1:3")
    assert art["result"]["chi"] == "inf"
    assert art["result"]["violations"] == 0
    for row in art["result"]["rows"]:
        n = row["n"]
        assert row["entropy"] == float((1 << n) - 1)
        assert row["chi_term"] == 1.0
        assert row["sandwich_ok"] is True


def test_entropy_table_point_free(capsys):
    # forbidding a single present point leaves only the empty matroid
    art = run_json(capsys, "entropy-table", "--forbid", "I1", "--n", "1:4")
    assert art["result"]["chi"] == 0
    for row in art["result"]["rows"]:
        assert row["count"] == "1" and row["entropy"] == 0.0


def test_entropy_table_o2_ratio(capsys):
    art = run_json(capsys, "entropy-table", "--forbid", "O2", "--n", "1:5")
    assert art["result"]["chi"] == 1
    rows = art["result"]["rows"]
    ratios = [row["entropy_ratio"] for row in rows]
    # the ratio approaches the chi limit 1 - 2^-1 from above
    tail = ratios[2:]  # n >= 3, past the small-n bumps
    for a, b in zip(tail, tail[1:]):
        assert a > b
    for row in rows:
        assert row["entropy_ratio"] >= row["chi_term"] == 0.5
        assert row["sandwich_ok"] is True
    assert art["result"]["violations"] == 0


def test_chi_values(capsys):
    assert run_json(capsys, "chi", "--forbid", "O2")["result"]["chi"] == 1
    assert run_json(capsys, "chi", "--forbid", "ones3")["result"]["chi"] == 2


def test_critical_from_file(capsys, tmp_path):
    M = Matroid.constant(3, 1)
    path = tmp_path / "ones3.mat"
    path.write_text(M.to_text())
    art = run_json(capsys, "critical", "--input", str(path))
    assert art["result"] == {"dim": 3, "critical": 3}


def test_critical_from_json_file(capsys, tmp_path):
    M = Matroid.from_values([1, 1, 0])
    path = tmp_path / "m.json"
    path.write_text(json.dumps(M.to_json_dict()))
    art = run_json(capsys, "critical", "--input", str(path))
    assert art["result"] == {"dim": 2, "critical": 1}


def test_instance_search(capsys):
    art = run_json(capsys, "instance", "--pattern", "I1", "--target", "ones:2",
                   "--count")
    assert art["result"]["found"] is True
    assert art["result"]["count"] == "3"
    art2 = run_json(capsys, "instance", "--pattern", "O2", "--target", "ones:2")
    assert art2["result"] == {"found": False, "map": None}


def test_density_exact_and_sampled(capsys):
    art = run_json(capsys, "density", "--pattern", "I1", "--input", "ones:2")
    assert art["result"]["density"] == "1/1"
    est = run_json(capsys, "density", "--pattern", "I1", "--input", "ones:2",
                   "--samples", "50", "--seed", "7")
    assert est["result"]["estimate"] == 1.0
    assert est["result"]["samples"] == 50 and est["result"]["seed"] == 7


def test_ramsey_line(capsys):
    art = run_json(capsys, "ramsey", "--d", "1", "--n", "4")
    assert art["result"]["value"] == 1
    assert art["result"]["verified"] is True


def test_ramsey_budget_refusal(capsys):
    code, out, err = run(capsys, "ramsey", "--d", "2", "--n", "5",
                         "--budget", "10")
    assert code == 2
    assert out == ""
    assert "budget refused" in err


def test_pack_profiles(capsys):
    art = run_json(capsys, "pack", "--n", "6", "--d", "0", "--k", "5")
    res = art["result"]
    assert res["member_dim"] == 1
    assert res["guarantee"] == 16
    assert res["m"] >= 16
    assert len(res["subspaces"]) == res["m"]
    flat = run_json(capsys, "pack", "--n", "4", "--d", "2", "--k", "4")
    assert flat["result"]["m"] == 1 and flat["result"]["guarantee"] == 1


def test_core_membership(capsys, tmp_path):
    path = tmp_path / "point.mat"
    path.write_text(Matroid.from_values([1]).to_text())
    art = run_json(capsys, "core", "--input", str(path), "--forbid", "O2",
                   "--k", "1")
    assert art["result"]["in_core"] is True
    empty = tmp_path / "empty.mat"
    empty.write_text(Matroid.from_values([0]).to_text())
    art2 = run_json(capsys, "core", "--input", str(empty), "--forbid", "O2",
                    "--k", "1", "--samples", "200", "--seed", "1")
    assert art2["result"]["in_core"] is False


def test_ext_count(capsys, tmp_path):
    path = tmp_path / "pt.mat"
    path.write_text(Matroid.from_values([1]).to_text())
    art = run_json(capsys, "ext-count", "--input", str(path),
                   "--pattern", "ones:2", "--n", "2")
    res = art["result"]
    assert res["count"] == "3" and res["total"] == "4"
    assert res["applicable"] is True
    assert res["epsilon"] == "1/256"
    assert res["bound_holds"] is True


def test_o2_check_row(capsys):
    art = run_json(capsys, "o2-check", "--forbid", "ones3", "--n", "4",
                   "--k", "2")
    row = art["result"]["rows"][0]
    assert row["structured_count"] == "29719"
    assert row["member_count"] == "29887"
    assert row["fraction"] == "29719/29887"
    assert 0.994 < row["fraction_float"] < 0.995


def test_decomp_probe(capsys, tmp_path):
    path = tmp_path / "g.vals"
    path.write_text("1 0 1 0 1 0 1 0\n")
    art = run_json(capsys, "decomp-probe", "--input", str(path), "--d", "1",
                   "--k", "1")
    res = art["result"]
    assert res["residual"] == pytest.approx(0.0, abs=1e-9)
    assert res["n_parts"] == 2
    assert len(res["polys"]) == 1


def test_structured(capsys, tmp_path):
    path = tmp_path / "f.vals"
    path.write_text("1/3 1/3 1/3 1 1 0 0\n")
    art = run_json(capsys, "structured", "--input", str(path), "--list")
    res = art["result"]
    assert res["count"] == "3"
    assert res["bound_holds"] is True
    assert len(res["tables"]) == 3
    tables = {t["table"] for t in res["tables"]}
    assert tables == {"1001100", "0101100", "0011100"}


def test_csv_output(capsys):
    code, out, err = run(capsys, "census", "--forbid", "O2", "--n", "2:3",
                         "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    assert "# schema=binmat/1" in comments
    assert '# config.forbid=["O2"]' in comments
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "n,count,entropy"
    assert data[1].startswith("2,7,") and data[2].startswith("3,64,")


def test_csv_key_value_fallback(capsys):
    code, out, _ = run(capsys, "chi", "--forbid", "O2", "--format", "csv")
    assert code == 0
    data = [l for l in out.splitlines() if not l.startswith("#")]
    assert data[0] == "key,value"
    assert data[1] == "chi,1"


def test_out_file_and_determinism(capsys, tmp_path):
    path = tmp_path / "a.json"
    snapshots = []
    for _ in range(2):
        code, out, err = run(capsys, "census", "--forbid", "O2", "--n", "1:3",
                             "--out", str(path))
        assert code == 0
        assert out == ""  # artifact goes to the file, not stdout
        assert "wall_time_s=" in err  # timing still reported, never in the file
        snapshots.append(path.read_bytes())
    assert snapshots[0] == snapshots[1]
    json.loads(snapshots[0])  # the file is a valid JSON artifact


def test_stdout_determinism(capsys):
    outs = {run(capsys, "o2-check", "--forbid", "ones3", "--n", "4", "--k", "2",
                "--seed", "3")[1] for _ in range(2)}
    assert len(outs) == 1


def test_exit_code_bad_builtin(capsys):
    code, out, err = run(capsys, "census", "--forbid", "nope", "--n", "2")
    assert code == 1 and out == "" and "error" in err


def test_exit_code_bad_flag(capsys):
    code, out, err = run(capsys, "census", "--n")
    assert code == 1 and out == ""


def test_exit_code_bad_range(capsys):
    code, _, _ = run(capsys, "census", "--n", "3:1")
    assert code == 1
    code2, _, _ = run(capsys, "census", "--n", "x")
    assert code2 == 1


def test_exit_code_unknown_command(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 1


def test_star_pattern_rejected_where_matroid_needed(capsys, tmp_path):
    path = tmp_path / "p.pat"
    path.write_text("dim=2\n1*0\n")
    code, _, err = run(capsys, "critical", "--input", str(path))
    assert code == 1 and "wildcard" in err


def test_missing_values_file(capsys):
    code, _, _ = run(capsys, "structured", "--input", "/nonexistent/f.vals")
    assert code == 1
