# backend/tests/test_coxeter_service.py
import sys
import os
# 解决模块导入问题：将项目根目录加入Python路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import pytest

from app.services.affine_service import ExtensionFamily, ExtensionSpec, extend
from app.services.coxeter_service import (
    CoxeterError,
    GroupId,
    cartan_matrix,
    check_km_rules,
    close_group,
    generate_group,
    gram_for,
    group_summary,
    highest_root,
    positive_roots,
    root_system,
    rotation_subgroup,
    simple_reflection,
)
from app.services.golden_service import ONE, SIGMA, TAU, GMatrix, GoldenRational, cofactor_det


@pytest.fixture
def fig2_h3_affine():
    """夹具：x = y = σ 的对称 H3 仿射扩展"""
    return extend(ExtensionSpec(GroupId.H3, ExtensionFamily.H3_2FOLD, SIGMA, SIGMA)).entries


# ========== Cartan 矩阵 ==========
def test_cartan_entries():
    h3 = cartan_matrix("h3").entries
    assert h3 == GMatrix([[2, -1, 0], [-1, 2, -TAU], [0, -TAU, 2]]), "H3 Cartan 矩阵与 Dynkin 图不符"
    h4 = cartan_matrix(GroupId.H4).entries
    assert h4[2, 3] == -TAU and h4[0, 1] == -1 and h4[0, 3] == 0


def test_cartan_determinants():
    assert cartan_matrix("H2").det() == GoldenRational(3, -1), "det(H2) 应为 3−τ"
    assert cartan_matrix("H3").det() == GoldenRational(4, -2), "det(H3) 应为 4−2τ"
    h4 = cartan_matrix("H4")
    assert h4.det() == cofactor_det(h4.entries), "H4 行列式与余子式展开不一致"
    assert h4.det().sign() > 0


def test_unknown_group_and_reflection_index():
    with pytest.raises(CoxeterError):
        GroupId.parse("h5")
    with pytest.raises(CoxeterError):
        simple_reflection("h3", 0)
    with pytest.raises(CoxeterError):
        simple_reflection("h3", 4)


# ========== 群闭包 ==========
@pytest.mark.parametrize("group, order, rotations", [("H2", 10, 5), ("H3", 120, 60)])
def test_group_orders(group, order, rotations):
    elements = generate_group(group)
    assert len(elements) == order, f"{group} 的阶应为 {order}"
    assert len(rotation_subgroup(group)) == rotations
    gram = gram_for(group)
    assert all(e.preserves(gram) for e in elements), "存在不保持 Gram 型的元素"


def test_simple_reflections_are_involutions():
    for i in (1, 2, 3):
        r = simple_reflection("H3", i)
        assert (r @ r).matrix == GMatrix.identity(3)
        image = r.apply(tuple(ONE if j == i - 1 else GoldenRational(0) for j in range(3)))
        assert all(c == (-1 if j == i - 1 else 0) for j, c in enumerate(image)), "r_i α_i 应为 −α_i"


def test_generator_order_does_not_change_output():
    default = [e.key for e in generate_group("H3")]
    shuffled = [e.key for e in generate_group("H3", generator_order=[3, 1, 2])]
    assert default == shuffled, "生成元顺序不应影响规范输出"
    with pytest.raises(CoxeterError):
        generate_group("H3", generator_order=[1, 1, 2])


def test_close_group_generic():
    swap = GMatrix([[0, 1], [1, 0]])
    assert len(close_group([swap])) == 2
    with pytest.raises(CoxeterError):
        close_group([])


@pytest.mark.slow
def test_h4_order():
    elements = generate_group("H4")
    assert len(elements) == 14400, "H4 的阶应为 14400"
    assert len(rotation_subgroup("H4")) == 7200
    summary = group_summary("H4")
    assert summary["preserves_gram"] is True


# ========== 根系 ==========
@pytest.mark.parametrize("group, total, positive", [("H2", 10, 5), ("H3", 30, 15), ("H4", 120, 60)])
def test_root_counts(group, total, positive):
    roots = root_system(group)
    assert len(roots) == total, f"{group} 应有 {total} 个根"
    assert len(positive_roots(group)) == positive
    gram = gram_for(group)
    assert all(r.length2(gram) == 1 for r in roots), "所有根都应为单位长度"
    keys = {r.key for r in roots}
    assert all((-r).key in keys for r in roots), "根系应关于原点对称"


def test_highest_root_h2():
    root = highest_root("H2")
    assert root.coords == (TAU, TAU), "H2 最高根应为 τ(α_1+α_2)"


@pytest.mark.parametrize("group", ["H3", "H4"])
def test_highest_root_is_maximal(group):
    root = highest_root(group)
    assert root.is_positive()
    assert root.length2(gram_for(group)) == 1
    assert root.height() == pytest.approx(max(r.height() for r in positive_roots(group)))


def test_group_summary_h3():
    summary = group_summary("h3")
    assert summary["order"] == 120 and summary["rotation_order"] == 60
    assert summary["root_count"] == 30 and summary["positive_root_count"] == 15


# ========== 扩展规则 ==========
def test_fig2_extensions_pass_all_rules(fig2_h3_affine):
    report = check_km_rules(fig2_h3_affine)
    assert report.passed, f"对称 H3 仿射扩展应满足全部规则：{report.to_dict()}"
    h2 = extend(ExtensionSpec("H2", ExtensionFamily.H2_HIGHEST, SIGMA, SIGMA)).entries
    h4 = extend(ExtensionSpec("H4", ExtensionFamily.H4_A1, SIGMA, SIGMA)).entries
    assert check_km_rules(h2).passed
    assert check_km_rules(h4).passed


def test_rule_violations(fig2_h3_affine):
    positive = fig2_h3_affine.replace({(0, 2): 1})
    report = check_km_rules(positive)
    assert not report.rule(2).passed and report.rule(2).witness

    half_zero = fig2_h3_affine.replace({(0, 2): 0})
    assert not check_km_rules(half_zero).rule(2).passed

    rational = fig2_h3_affine.replace({(0, 2): GoldenRational("1/2", -1), (2, 0): GoldenRational("1/2", -1)})
    assert not check_km_rules(rational).rule(3).passed
    relaxed = check_km_rules(rational, allow_rational=True)
    assert relaxed.rule(3).passed and relaxed.rule(3).witness, "放宽后仍应报告非整元素"

    assert not check_km_rules(cartan_matrix("H3").entries).rule(4).passed, "有限型 Cartan 矩阵行列式非零"
