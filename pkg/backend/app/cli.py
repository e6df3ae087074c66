"""
命令行入口（在 backend/ 下执行 python -m app.cli <子命令> ...）

子命令：enumerate / solve / verify / roots / group / op / array / lengths
全局参数：--quiet（日志只留 WARNING）、--json（stdout 只输出 JSON，日志走 stderr），放在子命令前后均可
领域错误以 {"status":"failed","error":…,"message":…} 写到 stderr，退出码 1
"""
import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from app.core.config import settings
from app.schemas.golden_schema import MatrixDocument
from app.services.affine_service import (
    LENGTH_PRESETS,
    enumerate_family,
    length_series,
    preset_series,
    resolve_family,
    solve_constraint_orbits,
    verify_matrix,
)
from app.services.coxeter_service import generate_group, group_summary, positive_roots, root_system, roots_as_rows
from app.services.export_service import csv_text, dumps, render_svg, write_csv, write_json
from app.services.geometry_service import (
    affine_reflection,
    affine_root_vector,
    orbit,
    reflection,
    twist_choices,
)
from app.services.golden_service import dot, parse_golden, parse_rational
from app.services.pointarray_service import axis_vector, cardinality_scan, generate_array, seed

logger = logging.getLogger(__name__)


def parse_k_range(text: str) -> tuple[int, int]:
    """"-2..2" 或单个整数 "3" """
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            k_min, k_max = int(low), int(high)
        else:
            k_min = k_max = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"k 范围格式应为 a..b：{text}") from e
    if k_min > k_max:
        raise argparse.ArgumentTypeError(f"k 范围为空：{text}")
    return k_min, k_max


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.cli",
        description="黄金域仿射 Coxeter 群计算工具",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例：
  python -m app.cli enumerate --group h3 --axis 2fold --k -2..2
  python -m app.cli solve --target "3-1t" --bound 12
  python -m app.cli verify --file matrix.json
  python -m app.cli roots --group h3 --format json
  python -m app.cli group --group h4 --count-only
  python -m app.cli solve --target -2+t
  python -m app.cli array --group h2 --seed pentagon --axis highest --length 1 --out svg
        """,
    )
    parser.add_argument("--quiet", action="store_true", help="只输出 WARNING 及以上日志")
    parser.add_argument("--json", dest="as_json", action="store_true", help="stdout 只输出 JSON")
    # 子命令后面也接受 --quiet / --json；SUPPRESS 保证没写时不覆盖全局值
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="同全局 --quiet")
    common.add_argument("--json", dest="as_json", action="store_true", default=argparse.SUPPRESS, help="同全局 --json")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    k_default = f"{settings.DEFAULT_K_MIN}..{settings.DEFAULT_K_MAX}"

    p = sub.add_parser("enumerate", help="生成扩展 Cartan 矩阵族", parents=[common])
    p.add_argument("--group", default="h3")
    p.add_argument("--axis", default="2fold")
    p.add_argument("--k", type=parse_k_range, default=parse_k_range(k_default))
    p.add_argument("--gamma", type=_rational, default=_rational(settings.DEFAULT_GAMMA))
    p.add_argument("--output", help="JSON 输出文件（相对路径写到输出目录）")

    p = sub.add_parser("solve", help="求解 xy = c", parents=[common])
    p.add_argument("--target", required=True)
    p.add_argument("--gamma", type=_rational, default=Fraction(1))
    p.add_argument("--delta", type=_rational, default=Fraction(1))
    p.add_argument("--bound", type=int, default=settings.DEFAULT_SEARCH_BOUND)

    p = sub.add_parser("verify", help="校验矩阵 JSON（规则 1–4 + 一致性 + 对称化）", parents=[common])
    p.add_argument("--file", required=True)

    p = sub.add_parser("roots", help="列出根系", parents=[common])
    p.add_argument("--group", default="h3")
    p.add_argument("--positive", action="store_true")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default="csv", help="stdout 与 --output 的格式")
    p.add_argument("--output", help="输出文件（格式由 --format 决定）")

    p = sub.add_parser("group", help="群闭包统计", parents=[common])
    p.add_argument("--group", default="h3")
    p.add_argument("--elements", action="store_true", help="同时输出全部群元素")
    p.add_argument("--count-only", action="store_true", help="只输出群的阶")

    p = sub.add_parser("op", help="输出仿射算子（H3 笛卡尔坐标）", parents=[common])
    p.add_argument("--axis", default="2fold", choices=["2fold", "3fold", "5fold"])
    p.add_argument("--k", type=parse_k_range, default=(0, 0))
    p.add_argument("--gamma", type=_rational, default=_rational(settings.DEFAULT_GAMMA))
    p.add_argument("--emit", choices=["matrix", "orbit"], default="matrix")

    p = sub.add_parser("array", help="生成点阵并统计基数", parents=[common])
    p.add_argument("--group", default="h2")
    p.add_argument("--seed", default=None, help="pentagon（H2）/ icosidodecahedron（H3）")
    p.add_argument("--axis", default="highest")
    p.add_argument("--length", action="append", help="可重复；缺省为 1")
    p.add_argument("--convention", default="rotation", choices=["rotation", "mirror"])
    p.add_argument("--out", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--output", help="输出文件（缺省输出到 stdout，svg 必须给出）")

    p = sub.add_parser("lengths", help="平移长度序列", parents=[common])
    p.add_argument("--group", default="h3")
    p.add_argument("--axis", default="2fold")
    p.add_argument("--gamma", type=_rational, default=_rational(settings.DEFAULT_GAMMA))
    p.add_argument("--k", type=parse_k_range, default=parse_k_range(k_default))
    p.add_argument("--preset", choices=[preset.name for preset in LENGTH_PRESETS])
    p.add_argument("--output", help="CSV 输出文件")
    return parser


# 这些选项的值可能以 "-" 开头（"-2..2"、"-1+t"），argparse 会误认成选项
_SIGNED_VALUE_OPTIONS = ("--k", "--length", "--target")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """把 "--k -2..2" 合并成 "--k=-2..2"，--length / --target 同理"""
    joined: list[str] = []
    items = list(argv)
    i = 0
    while i < len(items):
        nxt = items[i + 1] if i + 1 < len(items) else ""
        if items[i] in _SIGNED_VALUE_OPTIONS and nxt.startswith("-") and not nxt.startswith("--"):
            joined.append(f"{items[i]}={nxt}")
            i += 2
            continue
        joined.append(items[i])
        i += 1
    return joined


# ========== 子命令 ==========
def _enumerate(args) -> dict:
    family = resolve_family(args.group, args.axis)
    members = enumerate_family(family, args.k, args.gamma)
    documents = [ext.to_document(k=m.k, quadruplet=m.quadruplet) for m, ext in members]
    if args.output:
        write_json(documents, args.output)
    lines = [f"k={m.k:+d} {m.quadruplet} det={ext.det().to_text()}" for m, ext in members]
    return {"result": documents, "text": lines}


def _solve(args) -> dict:
    orbits = solve_constraint_orbits(parse_golden(args.target), args.gamma, args.delta, args.bound)
    lines = [f"base {o.base}  members={len(o.members)}  anchors={', '.join(str(a) for a in o.anchors) or '-'}" for o in orbits]
    result = {
        "target": args.target,
        "bases": [str(o.base) for o in orbits],
        # 整数因子为 −1 的成员，例如 7−4t 的 (−7,4;−1,0) 与 (−1,0;−7,4)
        "anchors": [str(a) for o in orbits for a in o.anchors],
        "orbits": [o.to_dict() for o in orbits],
    }
    return {"result": result, "text": lines}


def _verify(args) -> dict:
    path = Path(args.file)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ValueError(f"无法读取矩阵文件：{path}") from e
    except json.JSONDecodeError as e:
        raise ValueError(f"矩阵文件不是合法 JSON：{e}") from e
    documents = payload if isinstance(payload, list) else [payload]
    reports = []
    for raw in documents:
        document = MatrixDocument.model_validate(raw)
        reports.append(verify_matrix(document.to_matrix(), allow_rational=document.allow_rational))
    lines = []
    for idx, report in enumerate(reports):
        rules = " ".join(f"R{r['rule']}={'ok' if r['passed'] else 'FAIL'}" for r in report["rules"]["rules"])
        lines.append(f"[{idx}] {rules} consistency={report['consistency']['passed']} symmetrisable={report['symmetrisation']['symmetrisable']}")
    return {"result": reports, "text": lines, "passed": all(r["passed"] for r in reports)}


def _roots(args) -> dict:
    found = positive_roots(args.group) if args.positive else root_system(args.group)
    coords = roots_as_rows(found)
    rows = [{"index": i, **{f"c{j}": c for j, c in enumerate(r)}} for i, r in enumerate(coords)]
    result = {"group": args.group.upper(), "count": len(found), "roots": coords}
    if args.fmt == "json":
        if args.output:
            write_json(result, args.output)
        return {"result": result, "text": [dumps(result)]}
    if args.output:
        write_csv(rows, args.output)
    return {"result": result, "text": csv_text(rows).splitlines()}


def _group(args) -> dict:
    if args.count_only:
        order = len(generate_group(args.group))
        return {"result": {"group": args.group.upper(), "order": order}, "text": [str(order)]}
    summary = group_summary(args.group, include_elements=args.elements)
    lines = [f"{summary['group']}: order={summary['order']} rotations={summary['rotation_order']} roots={summary['root_count']}"]
    return {"result": summary, "text": lines}


def _op(args) -> dict:
    family = resolve_family("h3", args.axis)
    documents = []
    lines = []
    for member, _ in enumerate_family(family, args.k, args.gamma):
        alpha0 = affine_root_vector(family, member.quadruplet)
        entry = {"k": member.k, "quadruplet": member.quadruplet.to_dict(), "alpha0": [c.to_json() for c in alpha0]}
        if args.emit == "orbit":
            points = orbit(alpha0)
            entry["orbit"] = [[c.to_json() for c in p] for p in points]
            lines.append(f"k={member.k:+d} |orbit|={len(points)}")
        else:
            translation = affine_reflection(alpha0).compose(reflection(alpha0))
            choices = twist_choices(alpha0)
            entry["length2"] = dot(alpha0, alpha0).to_json()
            entry["affine_reflection"] = affine_reflection(alpha0).to_dict()
            entry["translation"] = translation.to_dict()
            entry["twists"] = [
                {
                    "index": c.index,
                    "angle": round(c.angle, 12),
                    "rotation": c.is_rotation,
                    "pure_translation": c.is_pure_translation,
                    **c.operator.to_dict(),
                }
                for c in choices
            ]
            lines.append(
                f"k={member.k:+d} α0=({', '.join(c.to_text() for c in alpha0)}) "
                f"twists={len(choices)} pure={sum(c.is_pure_translation for c in choices)}"
            )
        documents.append(entry)
    return {"result": documents, "text": lines}


def _array(args) -> dict:
    seed_name = args.seed or ("pentagon" if args.group.lower() == "h2" else "icosidodecahedron")
    config = seed(seed_name, args.convention)
    lengths = [parse_golden(text) for text in (args.length or ["1"])]
    if args.out == "json" or len(lengths) > 1:
        rows = cardinality_scan(config, args.axis, lengths)
        result = [r.to_dict() for r in rows]
        if args.out == "csv" and args.output:
            write_csv(result, args.output)
        elif args.output:
            write_json(result, args.output)
        return {"result": result, "text": [f"|t|²={r['length2']} cardinality={r['cardinality']}" for r in result]}
    array = generate_array(config, axis_vector(config, args.axis, lengths[0]))
    rows = array.to_rows()
    if args.out == "svg":
        if not args.output:
            raise ValueError("SVG 输出需要 --output")
        render_svg(array, args.output)
    elif args.output:
        write_csv(rows, args.output)
    summary = {"seed": seed_name, "convention": args.convention, "length": lengths[0].to_text(), "cardinality": array.cardinality}
    text = csv_text(rows).splitlines() if args.out == "csv" and not args.output else [f"cardinality={array.cardinality}"]
    return {"result": {**summary, "points": rows}, "text": text}


def _lengths(args) -> dict:
    if args.preset:
        series = preset_series(args.preset)
    else:
        series = length_series(resolve_family(args.group, args.axis), args.gamma, args.k)
    rows = [c.to_dict() for c in series]
    if args.output:
        write_csv(
            [{"series": c.series, "length2": c.length2.to_text(), "rho": str(c.rho), "k": c.k,
              "coefficient": None if c.coefficient is None else c.coefficient.to_text()} for c in series],
            args.output,
        )
    lines = [
        f"{c.series} ρ={c.rho} k={c.k} |α0|²={c.length2.to_text()} λ={'-' if c.coefficient is None else c.coefficient.to_text()}"
        for c in series
    ]
    return {"result": rows, "text": lines}


HANDLERS = {
    "enumerate": _enumerate,
    "solve": _solve,
    "verify": _verify,
    "roots": _roots,
    "group": _group,
    "op": _op,
    "array": _array,
    "lengths": _lengths,
}


def _failure(error: Exception, message: str) -> int:
    diagnostic = {"status": "failed", "error": str(error), "message": message}
    sys.stderr.write(json.dumps(diagnostic, ensure_ascii=False) + "\n")
    return 1


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(
        level=logging.WARNING if args.quiet else settings.LOG_LEVEL,
        stream=sys.stderr,
        force=True,
    )
    try:
        outcome = HANDLERS[args.subcommand](args)
    except OSError as e:
        logger.error(f"输出失败：{str(e)}", exc_info=True)
        return _failure(e, "输出文件写入失败")
    except ValueError as e:
        logger.debug("参数错误", exc_info=True)
        return _failure(e, f"{args.subcommand} 参数无效")

    if args.as_json:
        sys.stdout.write(dumps({"status": "success", "subcommand": args.subcommand, "result": outcome["result"]}) + "\n")
    else:
        for line in outcome["text"]:
            sys.stdout.write(line + "\n")
    return 0 if outcome.get("passed", True) else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
