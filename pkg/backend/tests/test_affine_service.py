# backend/tests/test_affine_service.py
import sys
import os
# 解决模块导入问题：将项目根目录加入Python路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import itertools
import math
from fractions import Fraction

import pytest

from app.services.affine_service import (
    DEFAULT_BASES,
    FAMILY_INFO,
    FIVE_FOLD_FIRST_SERIES_BASE,
    LENGTH_PRESETS,
    ExtensionError,
    ExtensionFamily,
    ExtensionSpec,
    Quadruplet,
    classify_length,
    consistency_check,
    constraint_constant,
    coxeter_corner_root,
    enumerate_family,
    enumerate_solutions,
    extend,
    family,
    fib_step,
    length_series,
    multipliers_for,
    preset_series,
    resolve_family,
    root_geometry,
    shift,
    solve_constraint,
    solve_constraint_orbits,
    sqrt5_folded_coefficient,
    swap,
    symmetrize,
    translation_coefficient,
    verify_matrix,
)
from app.services.golden_service import ONE, SIGMA, TAU, GoldenRational, det, tau_pow


def g(a, b=0) -> GoldenRational:
    return GoldenRational(a, b)


@pytest.fixture
def symmetric_h3():
    """夹具：x = y = σ 的 H3 二次轴扩展"""
    return extend(ExtensionSpec("H3", ExtensionFamily.H3_2FOLD, SIGMA, SIGMA))


# ========== 扩展矩阵与约束常数 ==========
@pytest.mark.parametrize("fam", list(ExtensionFamily))
def test_constraint_constant_matches_closed_form(fam):
    assert constraint_constant(fam) == FAMILY_INFO[fam].closed_form, f"{fam.value} 的约束常数与闭式不符"


def test_constraint_constant_values():
    assert constraint_constant("H3-2fold") == g(2, -1)
    assert constraint_constant("H3-3fold") == g(2, -1) * Fraction(4, 3)
    assert constraint_constant("H3-5fold") == g(3, -1) * Fraction(4, 5)
    assert constraint_constant("H2-bisector") == g(3, -1)
    assert constraint_constant("H4-A2") == g(7, -4) / 5


def test_extend_layout(symmetric_h3):
    m = symmetric_h3.entries
    assert m.shape == (4, 4)
    assert m[0, 2] == SIGMA and m[2, 0] == SIGMA, "x、y 应位于 α_0 与 α_2 的交叉位置"
    assert m[0, 1] == 0 and m[0, 3] == 0
    assert symmetric_h3.base_part() == symmetric_h3.base.entries
    assert symmetric_h3.det() == 0


def test_extension_spec_validation():
    with pytest.raises(ExtensionError):
        ExtensionSpec("H3", ExtensionFamily.H3_2FOLD, ONE, SIGMA)
    with pytest.raises(ExtensionError):
        ExtensionSpec("H3", ExtensionFamily.H3_2FOLD, SIGMA, 0)
    with pytest.raises(ExtensionError):
        ExtensionSpec("H2", ExtensionFamily.H3_2FOLD, SIGMA, SIGMA)


def test_resolve_family():
    assert resolve_family("h3", "5fold") == ExtensionFamily.H3_5FOLD
    assert resolve_family("H2", "bisector") == ExtensionFamily.H2_BISECTOR
    assert resolve_family("H4", "H4-A3") == ExtensionFamily.H4_A3
    with pytest.raises(ExtensionError):
        resolve_family("H2", "3fold")
    with pytest.raises(ExtensionError):
        resolve_family("H3", "H4-A1")


def test_root_geometry():
    length2, cos2 = root_geometry(SIGMA, SIGMA)
    assert length2 == 1
    assert cos2 == g(2, -1) / 4
    length2, _ = root_geometry(SIGMA * tau_pow(-1), SIGMA * TAU)
    assert length2 == tau_pow(-2)
    with pytest.raises(ExtensionError):
        root_geometry(0, SIGMA)


@pytest.mark.parametrize(
    "x, y, angle",
    [
        (SIGMA, SIGMA, 2 * math.pi / 5),  # xy = 2−τ
        (g(-1), g(-3, 1), 3 * math.pi / 10),  # xy = 3−τ
    ],
)
def test_root_angle_matches_embedding(x, y, angle):
    _, cos2 = root_geometry(x, y)
    assert math.isclose(cos2.embed(), math.cos(angle) ** 2, rel_tol=0, abs_tol=1e-12)


# ========== 一致性检查 ==========
def test_consistency_symmetric(symmetric_h3):
    report = consistency_check(symmetric_h3)
    assert report.passed
    assert report.corollary_triggered and report.symmetric
    assert report.ratios == [(2, ONE)]


def test_consistency_detects_inconsistent_ratios():
    h2 = extend(ExtensionSpec("H2", ExtensionFamily.H2_HIGHEST, SIGMA, SIGMA)).entries
    skewed = h2.replace({(0, 1): SIGMA * 2})
    report = consistency_check(skewed)
    assert not report.passed and not report.ratios_consistent
    assert "比值不一致" in report.witness


def test_consistency_detects_half_zero(symmetric_h3):
    report = consistency_check(symmetric_h3.entries.replace({(0, 2): 0}))
    assert not report.passed
    assert "只有一个为零" in report.witness


# ========== Fibonacci 族 ==========
def test_fib_step_examples():
    base = Quadruplet(1, -1, 1, -1)
    up = fib_step(base, 1)
    assert up.as_tuple() == (-1, 0, -2, 1)
    assert up.x == base.x * TAU and up.y == base.y * tau_pow(-1)
    down = fib_step(base, -1)
    assert down.as_tuple() == (-2, 1, -1, 0)
    assert fib_step(up, -1) == base, "fib_step 的两个方向应互逆"
    with pytest.raises(ExtensionError):
        fib_step(base, 0)


def test_shift_and_family_preserve_product():
    base = Quadruplet(-1, 0, -3, 1)
    for k in range(-4, 5):
        member = shift(base, k)
        assert member.x == base.x * tau_pow(-k), f"第 {k} 个成员的 x 应为 τ^(-k)x"
        assert member.product == base.product
    fib = family(base, (-2, 2))
    assert [m.k for m in fib.members] == [-2, -1, 0, 1, 2]
    with pytest.raises(ExtensionError):
        family(base, (2, -2))


def test_swap():
    q = Quadruplet(-3, 1, -1, 0, Fraction(1), Fraction(4, 5))
    swapped = swap(q)
    assert swapped.as_tuple() == (-1, 0, -3, 1)
    assert swapped.gamma == Fraction(4, 5) and swapped.delta == 1
    assert swapped.product == q.product


# ========== 约束求解 ==========
def test_solve_unit_target():
    assert solve_constraint("2-t") == [Quadruplet(-2, 1, -1, 0)], "2−τ 是单位，只有一个轨道"
    orbit = solve_constraint_orbits("2-t")[0]
    assert {a.as_tuple() for a in orbit.anchors} == {(-1, 0, -2, 1), (-2, 1, -1, 0)}
    assert Quadruplet(1, -1, 1, -1) in orbit.members
    assert len(solve_constraint("5-3t")) == 1


def test_solve_sqrt5_targets():
    assert solve_constraint("3-t") == [Quadruplet(-3, 1, -1, 0), Quadruplet(-1, 0, -3, 1)]
    orbits = solve_constraint_orbits("7-4t")
    assert [o.base.as_tuple() for o in orbits] == [(-3, 1, -2, 1), (-2, 1, -3, 1)]
    assert [a.as_tuple() for a in orbits[0].anchors] == [(-7, 4, -1, 0)]
    assert [a.as_tuple() for a in orbits[1].anchors] == [(-1, 0, -7, 4)]


def test_solutions_are_exhaustive():
    """与四重循环暴力搜索逐一比对"""
    target = g(3, -1)
    bound = 5
    expected = set()
    for a, b, c, d in itertools.product(range(-bound, bound + 1), repeat=4):
        x, y = g(a, b), g(c, d)
        if x.sign() < 0 and y.sign() < 0 and x * y == target:
            expected.add((a, b, c, d))
    found = {q.as_tuple() for q in enumerate_solutions(target, bound)}
    assert found == expected, "enumerate_solutions 漏解或多解"
    assert found, "3−τ 在界 5 内应有解"


def test_solve_with_multipliers():
    quads = solve_constraint(constraint_constant("H3-5fold"), gamma=1, delta=Fraction(4, 5))
    assert Quadruplet(-1, 0, -3, 1, Fraction(1), Fraction(4, 5)) in quads
    assert solve_constraint("1/3-t", gamma=1, delta=1) == [], "目标不属于 Z[τ] 时无解"
    with pytest.raises(ExtensionError):
        enumerate_solutions("2-t", 0)


@pytest.mark.parametrize("target", ["2-t", "3-t", "5-3t", "7-4t"])
def test_every_solution_reachable_from_reported_base(target):
    """界 12 内的每个解都能由某个轨道基经 τ 平移（或交换）得到"""
    orbits = solve_constraint_orbits(target, bound=12)
    reachable = set()
    for o in orbits:
        for k in range(-12, 13):
            member = shift(o.base, k)
            reachable.add(member.as_tuple())
            reachable.add(swap(member).as_tuple())
    solutions = enumerate_solutions(target, 12)
    assert solutions, f"{target} 在界 12 内应有解"
    missing = [q.as_tuple() for q in solutions if q.as_tuple() not in reachable]
    assert not missing, f"以下解不在任何报告的轨道中：{missing}"


# ========== 族与默认基解 ==========
@pytest.mark.parametrize("fam", list(ExtensionFamily))
def test_enumerated_members_are_affine(fam):
    members = enumerate_family(fam, (-1, 1))
    assert len(members) == 3
    for member, ext in members:
        assert ext.det() == 0, f"{fam.value} 第 {member.k} 个成员行列式应为零"
        assert member.quadruplet.product == constraint_constant(fam)


def test_default_bases_multipliers():
    assert multipliers_for("H3-5fold", DEFAULT_BASES[ExtensionFamily.H3_5FOLD], 1) == (1, Fraction(4, 5))
    assert multipliers_for("H3-3fold", DEFAULT_BASES[ExtensionFamily.H3_3FOLD], 1) == (1, Fraction(4, 3))
    assert multipliers_for("H4-A2", DEFAULT_BASES[ExtensionFamily.H4_A2], 1) == (1, Fraction(1, 5))
    with pytest.raises(ExtensionError):
        multipliers_for("H3-2fold", Quadruplet(-3, 1, -1, 0), 1)


def test_document_flags_rational_entries():
    (_, integral), = enumerate_family("H3-2fold", (0, 0))
    assert integral.to_document()["allow_rational"] is False
    (member, rational), = enumerate_family("H3-3fold", (0, 0))
    document = rational.to_document(member.k, member.quadruplet)
    assert document["allow_rational"] is True
    assert document["quadruplet"]["delta"] == "4/3"


# ========== 长度分类 ==========
@pytest.mark.parametrize("preset", LENGTH_PRESETS, ids=lambda p: p.name)
def test_length_presets(preset):
    classes = preset_series(preset.name)
    k_min, k_max = preset.k_range
    assert len(classes) == k_max - k_min + 1
    for k, cls in zip(range(k_min, k_max + 1), classes):
        assert cls.series != "raw", f"{preset.name} 第 {k} 项未能分类"
        assert cls.rho == preset.gamma, "该族的长度系数应等于 γ"
        assert cls.k == -k
        assert cls.solves_constraint


def test_two_fold_lengths_are_tau_powers():
    classes = length_series("H3-2fold", 1, (-2, 2))
    assert [c.length for c in classes] == [tau_pow(2), TAU, ONE, tau_pow(-1), tau_pow(-2)]
    assert all(c.coefficient == c.length for c in classes), "二次轴长度为 1，系数即长度"


def test_five_fold_series():
    classes = length_series("H3-5fold", 1, (-2, 1))
    assert {c.series for c in classes} == {"sqrt(2+t)/2"}
    assert [c.coefficient for c in classes] == [tau_pow(2) / 2, TAU / 2, ONE / 2, tau_pow(-1) / 2]
    first = length_series("H3-5fold", 1, (0, 0), base=FIVE_FOLD_FIRST_SERIES_BASE)[0]
    assert first.series == "sqrt(5/4(3-t))"
    assert first.rho == 1


def test_three_fold_example_outside_constraint():
    q = Quadruplet(1, -1, 1, -1, Fraction(3, 4), Fraction(1))
    cls = classify_length(q, "H3-3fold")
    assert cls.length2 == Fraction(3, 4)
    assert cls.series == "sqrt3/2" and cls.rho == 1 and cls.k == 0
    assert translation_coefficient("H3-3fold", q) == Fraction(1, 2)
    assert cls.solves_constraint is False, "xy = (3/4)(2−τ) 不满足 3 次轴约束"


def test_bisector_lengths():
    cls = length_series("H2-bisector", 1, (0, 0))[0]
    assert cls.series == "sqrt(3-t)"
    assert cls.coefficient is not None


def test_unknown_preset():
    with pytest.raises(ExtensionError):
        preset_series("7fold")


def test_sqrt5_folded_coefficient():
    for gval, k in [(1, 0), (2, 1), (Fraction(1, 3), -2)]:
        coefficient = sqrt5_folded_coefficient(gval, k)
        assert coefficient * coefficient == tau_pow(2 * k) * Fraction(gval) ** 2 / 20


# ========== 对称化 ==========
def test_symmetrize_family_member():
    (member, ext), = enumerate_family("H3-2fold", (1, 1))
    result = symmetrize(ext)
    assert result.symmetrisable
    assert result.d[0, 0] == member.x / member.y, "d_0 应为 x/y"
    assert all(result.d[i, i] == 1 for i in range(1, 4))
    assert result.s.is_symmetric()
    assert result.positive_semidefinite
    assert det(result.s) == 0


@pytest.mark.parametrize(
    "family_id, factor",
    [
        ("H3-2fold", TAU ** 2),
        ("H3-3fold", TAU ** 2 * Fraction(3, 4)),
        ("H3-5fold", g(2, 1) * Fraction(1, 4)),
    ],
)
def test_symmetrisation_diagonals(family_id, factor):
    """D = diag(f·x², 1, 1, 1)，角元 S_00 = 2f·x²"""
    for member, ext in enumerate_family(family_id, (-2, 2)):
        result = symmetrize(ext)
        assert result.symmetrisable and result.positive_semidefinite
        x2 = member.x * member.x
        assert result.d[0, 0] == factor * x2, f"{family_id} k={member.k} 的 d_0 不符"
        assert result.s[0, 0] == factor * x2 * 2
        assert result.s.is_symmetric()


def test_symmetrize_rejects_inconsistent_cycle():
    h2 = extend(ExtensionSpec("H2", ExtensionFamily.H2_HIGHEST, SIGMA, SIGMA)).entries
    result = symmetrize(h2.replace({(0, 1): SIGMA * 2}))
    assert not result.symmetrisable and "不一致" in result.witness
    assert symmetrize(h2).symmetrisable


# ========== 角元根 ==========
def test_corner_roots():
    two = coxeter_corner_root("H3-2fold")
    assert two.in_field and two.x == SIGMA, "二次轴的角元根应为 σ"
    three = coxeter_corner_root("H3-3fold")
    assert not three.in_field and three.x is None
    assert three.x_squared == g(2, -1) * Fraction(4, 3)
    five = coxeter_corner_root("H3-5fold")
    assert not five.in_field and five.note
    with pytest.raises(ExtensionError):
        coxeter_corner_root("H2-highest")


# ========== 矩阵校验汇总 ==========
def test_verify_matrix(symmetric_h3):
    report = verify_matrix(symmetric_h3.entries)
    assert report["passed"] is True
    assert report["symmetrisation"]["positive_semidefinite"] is True
    broken = verify_matrix(symmetric_h3.entries.replace({(0, 2): SIGMA * 2}))
    assert broken["passed"] is False
    assert broken["rules"]["rules"][3]["passed"] is False, "改动 x 后行列式不再为零"
