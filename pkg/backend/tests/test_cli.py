# backend/tests/test_cli.py
import sys
import os
# 解决模块导入问题：将项目根目录加入Python路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import json

import pytest

from app.cli import parse_k_range, run
from app.core.config import settings


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """夹具：把输出目录指向临时目录"""
    monkeypatch.setattr(settings, "AFFINE_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def _json_out(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def _last_error(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_parse_k_range():
    assert parse_k_range("-2..2") == (-2, 2)
    assert parse_k_range("3") == (3, 3)


def test_enumerate_writes_family(capsys, output_dir):
    code = run(["--json", "--quiet", "enumerate", "--group", "h3", "--axis", "2fold", "--k", "-2..2", "--output", "family.json"])
    assert code == 0
    payload = _json_out(capsys)
    assert payload["status"] == "success"
    documents = payload["result"]
    assert [d["k"] for d in documents] == [-2, -1, 0, 1, 2]
    assert all(d["det"] == {"a": "0", "b": "0"} for d in documents), "族成员行列式应为零"
    assert (output_dir / "family.json").exists(), "相对路径应写到输出目录"


def test_enumerate_is_deterministic(capsys):
    argv = ["--json", "--quiet", "enumerate", "--group", "h4", "--axis", "a2", "--k", "-1..1"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first, "重复运行输出应字节一致"


def test_verify_round_trip(capsys, output_dir):
    path = output_dir / "family.json"
    assert run(["--quiet", "enumerate", "--axis", "3fold", "--k", "-1..1", "--output", str(path)]) == 0
    capsys.readouterr()
    assert run(["--quiet", "verify", "--file", str(path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    assert all("R4=ok" in line and "symmetrisable=True" in line for line in lines)


def test_verify_reports_failure(capsys, output_dir):
    path = output_dir / "finite.json"
    path.write_text(json.dumps({"entries": [["2", "-1", "0"], ["-1", "2", "-t"], ["0", "-t", "2"]]}), encoding="utf-8")
    assert run(["--quiet", "verify", "--file", str(path)]) == 1, "有限型矩阵不满足 det = 0，应以 1 退出"
    assert "R4=FAIL" in capsys.readouterr().out


def test_verify_rejects_bad_documents(capsys, output_dir):
    path = output_dir / "ragged.json"
    path.write_text(json.dumps({"entries": [["2", "-1"], ["-1"]]}), encoding="utf-8")
    assert run(["--quiet", "verify", "--file", str(path)]) == 1
    assert _last_error(capsys)["status"] == "failed"
    assert run(["--quiet", "verify", "--file", str(output_dir / "missing.json")]) == 1
    assert "无法读取" in _last_error(capsys)["error"]


def test_solve(capsys):
    assert run(["--json", "--quiet", "solve", "--target", "3-1t"]) == 0
    result = _json_out(capsys)["result"]
    assert result["bases"] == ["(-3,1;-1,0)", "(-1,0;-3,1)"]


def test_solve_rejects_bad_target(capsys):
    assert run(["--quiet", "solve", "--target", "abc"]) == 1
    diagnostic = _last_error(capsys)
    assert diagnostic["status"] == "failed" and diagnostic["message"] == "solve 参数无效"


def test_argument_errors_exit_2():
    with pytest.raises(SystemExit) as excinfo:
        run(["enumerate", "--k", "x..y"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit):
        run(["lengths", "--preset", "9fold"])


def test_group_and_roots(capsys, output_dir):
    assert run(["--quiet", "group", "--group", "h2"]) == 0
    assert capsys.readouterr().out.strip() == "H2: order=10 rotations=5 roots=10"
    assert run(["--json", "--quiet", "roots", "--group", "h3", "--positive", "--output", "roots.csv"]) == 0
    assert _json_out(capsys)["result"]["count"] == 15
    assert len((output_dir / "roots.csv").read_text(encoding="utf-8").splitlines()) == 16


def test_roots_json_format(capsys, output_dir):
    assert run(["--quiet", "roots", "--group", "h3", "--format", "json", "--output", "roots.json"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["count"] == 30 and len(printed["roots"]) == 30
    assert json.loads((output_dir / "roots.json").read_text(encoding="utf-8"))["count"] == 30


def test_group_count_only(capsys):
    assert run(["--quiet", "group", "--group", "h2", "--count-only"]) == 0
    assert capsys.readouterr().out.strip() == "10"
    assert run(["group", "--group", "h3", "--count-only", "--json", "--quiet"]) == 0
    assert _json_out(capsys)["result"] == {"group": "H3", "order": 120}


def test_global_flags_after_subcommand(capsys):
    assert run(["enumerate", "--group", "h3", "--axis", "2fold", "--k", "-1..1", "--json", "--quiet"]) == 0
    payload = _json_out(capsys)
    assert payload["subcommand"] == "enumerate"
    assert [d["k"] for d in payload["result"]] == [-1, 0, 1]


def test_signed_values_without_equals(capsys):
    assert run(["--json", "--quiet", "array", "--length", "-1+t"]) == 0
    assert [r["cardinality"] for r in _json_out(capsys)["result"]] == [25]
    assert run(["--json", "--quiet", "solve", "--target", "-2+t"]) == 0
    assert _json_out(capsys)["result"]["bases"] == [], "τ−2 < 0，两负因子之积不可能为负"


def test_solve_reports_anchors(capsys):
    assert run(["--json", "--quiet", "solve", "--target", "7-4t"]) == 0
    result = _json_out(capsys)["result"]
    assert result["bases"] == ["(-3,1;-2,1)", "(-2,1;-3,1)"]
    assert result["anchors"] == ["(-7,4;-1,0)", "(-1,0;-7,4)"]


def test_op_twists(capsys):
    assert run(["--json", "--quiet", "op", "--axis", "3fold"]) == 0
    (entry,) = _json_out(capsys)["result"]
    assert len(entry["twists"]) == 6
    assert sum(t["pure_translation"] for t in entry["twists"]) == 1
    assert sum(t["rotation"] for t in entry["twists"]) == 3, "3 次轴稳定子含 3 个旋转与 3 个反射"
    assert entry["translation"]["is_translation"] is True


def test_array_scan(capsys):
    assert run(["--json", "--quiet", "array", "--length=-1+t", "--length", "1", "--length", "t"]) == 0
    rows = _json_out(capsys)["result"]
    assert [r["cardinality"] for r in rows] == [25, 20, 25]


def test_array_svg_and_csv(capsys, output_dir):
    assert run(["--quiet", "array", "--length", "1", "--out", "svg", "--output", "pentagon.svg"]) == 0
    svg = (output_dir / "pentagon.svg").read_text(encoding="utf-8")
    assert "<svg" in svg
    assert run(["--quiet", "array", "--length", "1", "--out", "csv", "--output", "pentagon.csv"]) == 0
    lines = (output_dir / "pentagon.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 21, "表头 + 20 个点"
    assert run(["--quiet", "array", "--length", "1", "--out", "svg"]) == 1, "SVG 缺少 --output 应报错"


def test_lengths_preset(capsys):
    assert run(["--json", "--quiet", "lengths", "--preset", "5fold-gamma-1"]) == 0
    rows = _json_out(capsys)["result"]
    assert len(rows) == 4
    assert {r["series"] for r in rows} == {"sqrt(2+t)/2"}
