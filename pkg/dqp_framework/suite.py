# -*- encoding: UTF-8 -*-
"""
验收矩阵

每一行（SuiteRow）是一组用例，每个用例产出一份 CheckReport。
各行在线程池中并发执行，结果按声明顺序汇总成 pandas 表。
quick 模式缩小抽样规模并跳过 N = 3 的表示空间检查。
"""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from . import catalog
from .algebra import AlgebraSpec
from .brackets import (
    Bundle,
    CheckReport,
    _typed_triples,
    bracket_equal,
    check_cyclic_antisymmetry,
    check_leibniz,
    check_moment_map,
    check_quasi_poisson,
    moment_map_equal,
    triple_bracket,
)
from .exceptions import DQPError
from .fusion import (
    check_fusion_table,
    check_kappa,
    fuse_algebra,
    fused_bracket,
    trE_sum_check,
    type_signature,
)
from .logger_config import LoggerMixin, log_method_call
from .representation import (
    RepresentationChecker,
    coordinate_ring,
    DimVector,
    InducedBracket,
    moment_map_numeric_check,
)

HALF = Fraction(1, 2)

Case = Tuple[str, Callable[[], CheckReport]]


def _suite_option(key, default):
    import settings

    return settings.get_option('suite', key, default)


def _seed() -> int:
    import settings

    return settings.get_config().get('seed', 42)


def _expect_failure(label: str, build: Callable[[], Bundle]) -> CheckReport:
    """扰动后的括号必须不满足拟泊松条件；仍然通过时记一个见证"""
    perturbed = build()
    original = check_quasi_poisson(perturbed.bracket)
    report = CheckReport(f"{label} fails after perturbation", checked=0)
    report.record((perturbed.name,), None if original.witnesses else "扰动后仍满足拟泊松条件")
    return report


def _away(value) -> Fraction:
    """向远离 0 的方向加 1，±1/2 这类符号约束一定被破坏"""
    value = Fraction(value)
    return value + 1 if value >= 0 else value - 1


def _coverage(name: str, found, expected: int) -> CheckReport:
    report = CheckReport(name)
    report.notes.extend(",".join(item) for item in sorted(found))
    report.record((f"{len(found)}/{expected}",), None if len(found) >= expected else f"只覆盖 {len(found)} 类")
    return report


# ----------------------------------------------------------------------
# 1 分类
# ----------------------------------------------------------------------
FREE1_GRID = [(0, HALF, 0), (1, -HALF, 0), (Fraction(3, 4), 1, 1), (1, 0, Fraction(-1, 4)), (-2, HALF, 0)]

Q1_FIXTURES = {
    "1a": [dict(delta=1), dict(delta=-1)],
    "1b": [dict(gamma=0, phi=0, alpha=HALF), dict(gamma=1, phi=0, alpha=-HALF),
           dict(gamma=2, phi=1, alpha=Fraction(3, 2))],
    "2": [dict(delta=1, lam=1), dict(delta=-1, lam=2), dict(delta=1, lam=Fraction(-1, 3))],
    "3": [dict(delta=1, lam=1), dict(delta=-1, lam=3), dict(delta=-1, lam=Fraction(1, 2))],
}

FREE2_FIXTURES = {
    "1": [dict(gamma0=0, gamma1=0, alpha=HALF, mu=HALF), dict(gamma0=1, gamma1=2, alpha=Fraction(-3, 2), mu=-HALF)],
    "2": [dict(gamma=0, alpha=HALF, mu=HALF), dict(gamma=3, alpha=-HALF, mu=HALF)],
    "3": [dict(m=HALF, mu=HALF), dict(m=-HALF, mu=-HALF)],
    "4": [dict(alpha=HALF, m=HALF, mu=-HALF), dict(alpha=-HALF, m=-HALF, mu=HALF)],
    "5": [dict(n=1, alpha=HALF, mu=HALF), dict(n=-2, alpha=-HALF, mu=-HALF)],
    "6": [dict(n=1, mu=HALF), dict(n=3, mu=-HALF)],
    "7": [dict(n=1, nu=1, alpha=HALF), dict(n=2, nu=-1, alpha=-HALF)],
}


def _q1_perturbed(case: str, params: dict) -> dict:
    key = "alpha" if case == "1b" else "delta"
    changed = dict(params)
    changed[key] = _away(params.get(key, HALF if key == "alpha" else 1))
    return changed


def _free2_perturbed(case: str, params: dict) -> dict:
    key = "alpha" if case == "7" else "mu"
    changed = dict(params)
    changed[key] = _away(params[key])
    return changed


def classification_cases(quick: bool = False) -> List[Case]:
    cases: List[Case] = []
    for lam, mu, nu in FREE1_GRID:
        cases.append(("free1", lambda lam=lam, mu=mu, nu=nu: check_quasi_poisson(catalog.free1(lam, mu, nu).bracket)))
        cases.append(("free1 perturbed", lambda lam=lam, mu=mu, nu=nu: _expect_failure(
            "free1", lambda: catalog.free1(lam, _away(mu), nu, validate=False))))
    for case, fixtures in Q1_FIXTURES.items():
        for params in fixtures:
            cases.append((f"q1[{case}]", lambda case=case, params=params: check_quasi_poisson(
                catalog.q1(case, **params).bracket)))
            perturbed = _q1_perturbed(case, params)
            cases.append((f"q1[{case}] perturbed", lambda case=case, perturbed=perturbed: _expect_failure(
                f"q1[{case}]", lambda: catalog.q1(case, validate=False, **perturbed))))
    for case, fixtures in FREE2_FIXTURES.items():
        for params in fixtures:
            cases.append((f"free2[{case}]", lambda case=case, params=params: check_quasi_poisson(
                catalog.free2(case, **params).bracket)))
            perturbed = _free2_perturbed(case, params)
            cases.append((f"free2[{case}] perturbed", lambda case=case, perturbed=perturbed: _expect_failure(
                f"free2[{case}]", lambda: catalog.free2(case, validate=False, **perturbed))))
    return cases


# ----------------------------------------------------------------------
# 2、3 融合
# ----------------------------------------------------------------------
def _four_type_quiver(weight=0) -> catalog.QuiverSpec:
    """顶点 1、2 上各一个环加一条箭头：融合 1 ← 2 时四种生成元类型都出现"""
    return catalog.QuiverSpec(
        vertices=("1", "2"),
        arrows=(("a", "1", "2"), ("l", "1", "1"), ("m", "2", "2")),
        weights={"a": weight, "l": weight, "m": weight},
    )


def fusion_fixtures(quick: bool = False) -> List[Bundle]:
    """至少两个幂等元的拟泊松目录输入"""
    fixtures = [
        catalog.q1("1a", delta=1),
        catalog.q1("1b", gamma=1, phi=0, alpha=HALF),
        catalog.q1("2", delta=-1, lam=2),
        catalog.q1("3", delta=1, lam=1),
        catalog.kronecker_pair(gamma0=1, gamma1=0, alpha=HALF),
        catalog.vdb_quiver(_four_type_quiver()),
    ]
    if not quick:
        fixtures.append(catalog.vdb_quiver(catalog.QuiverSpec(
            vertices=("1", "2", "3"), arrows=(("a", "1", "2"), ("b", "2", "3")))))
    return fixtures


def _contexts(bundle: Bundle):
    A = bundle.algebra
    for kept, absorbed in itertools.permutations(A.idempotents, 2):
        yield fuse_algebra(A, kept, absorbed)


def fusion_kappa_cases(quick: bool = False) -> List[Case]:
    cases: List[Case] = []
    covered = set()
    for bundle in fusion_fixtures(quick):
        for ctx in _contexts(bundle):
            cases.append((f"kappa {bundle.name}", lambda ctx=ctx, br=bundle.bracket: check_kappa(ctx, br)))
            cases.append((f"fused qP {bundle.name}",
                          lambda ctx=ctx, br=bundle.bracket: check_quasi_poisson(fused_bracket(ctx, br))))
            names = ctx.result.bracket_generators()
            covered.update(type_signature(ctx, triple) for triple in _typed_triples(ctx.result, names))
    cases.append(("kappa type coverage", lambda: _coverage("kappa type combinations", covered, 20)))
    return cases


def fusion_table_cases(quick: bool = False) -> List[Case]:
    cases: List[Case] = []
    covered = set()
    for bundle in fusion_fixtures(quick):
        for ctx in _contexts(bundle):
            cases.append((f"fusion table {bundle.name}", lambda ctx=ctx: check_fusion_table(ctx)))
            cases.append((f"Tr(E1)+Tr(E2) {bundle.name}", lambda ctx=ctx: trE_sum_check(ctx)))
            names = ctx.result.bracket_generators()
            covered.update((ctx.type_of(a), ctx.type_of(b)) for a in names for b in names)
    cases.append(("fusion table coverage", lambda: _coverage("fusion type pairs", covered, 16)))
    return cases


# ----------------------------------------------------------------------
# 4 融合后的矩映射
# ----------------------------------------------------------------------
def _moment_report(bundle: Bundle, dim, trials: int) -> CheckReport:
    """可约化的矩映射做符号检查，带形式逆时在表示点上检查"""
    if not bundle.moment_map.has_formal_inverse():
        return check_moment_map(bundle.bracket, bundle.moment_map)
    return moment_map_numeric_check(bundle.bracket, bundle.moment_map, dim, trials=trials)


SURFACES = [(0, 1), (1, 0), (1, 1), (2, 0)]


def fused_moment_map_cases(quick: bool = False) -> List[Case]:
    trials = 2 if quick else None
    cases: List[Case] = []
    for gamma, delta, forward in itertools.product((0, 1), (1, -1), (True, False)):
        cases.append((f"q1_fusion γ={gamma} δ={delta}", lambda gamma=gamma, delta=delta, forward=forward: _moment_report(
            catalog.q1_fusion(gamma, delta, forward), 2, trials)))
    for genus, boundaries in SURFACES:
        spec = catalog.SurfaceSpec(genus, boundaries)
        cases.append((f"surface_fusion({genus},{boundaries})", lambda spec=spec: _moment_report(
            catalog.surface_fusion(spec), 1, trials)))
    return cases


# ----------------------------------------------------------------------
# 5 箭图
# ----------------------------------------------------------------------
def vdb_quivers(weight) -> Dict[str, catalog.QuiverSpec]:
    one_arrow = catalog.QuiverSpec(("1", "2"), (("a", "1", "2"),), weights={"a": weight})
    one_loop = catalog.QuiverSpec(("1",), (("l", "1", "1"),), weights={"l": weight})
    star_arrows = (("a", "1", "2"), ("b", "1", "3"))
    star = catalog.QuiverSpec(("1", "2", "3"), star_arrows, weights={"a": weight, "b": weight})
    reversed_star = catalog.QuiverSpec(("1", "2", "3"), star_arrows, weights={"a": weight, "b": weight},
                                       orderings={"1": ("b", "a")})
    return {"one arrow": one_arrow, "one loop": one_loop, "star": star, "star reversed": reversed_star}


def _vdb_cases(label: str, q: catalog.QuiverSpec, dim_size: int, trials) -> List[Case]:
    def closed():
        return catalog.vdb_quiver(q)

    def compare_brackets():
        return bracket_equal(catalog.vdb_sep_fusion(q).bracket, closed().bracket, name=f"vdb {label}: fusion == closed form")

    def compare_moment_maps():
        return moment_map_equal(catalog.vdb_sep_fusion(q).moment_map, closed().moment_map,
                                name=f"vdb {label}: fused Φ == closed-form Φ")

    def moment():
        bundle = closed()
        return _moment_report(bundle, {s: dim_size for s in q.vertices}, trials)

    return [(f"vdb {label} bracket", compare_brackets), (f"vdb {label} Φ", compare_moment_maps),
            (f"vdb {label} moment map", moment)]


def vdb_cases(quick: bool = False) -> List[Case]:
    trials = 2 if quick else None
    dim_size = 1 if quick else 2
    cases: List[Case] = []
    for weight in (0, 1):
        for label, q in vdb_quivers(weight).items():
            cases.extend(_vdb_cases(f"{label} γ={weight}", q, dim_size, trials))
    return cases


# ----------------------------------------------------------------------
# 6 曲面
# ----------------------------------------------------------------------
def surface_cases(quick: bool = False) -> List[Case]:
    cases: List[Case] = []
    for genus, boundaries in SURFACES:
        spec = catalog.SurfaceSpec(genus, boundaries)
        name = f"surface({genus},{boundaries})"
        cases.append((f"{name} fusion == closed form", lambda spec=spec: bracket_equal(
            catalog.surface_fusion(spec).bracket, catalog.surface(spec).bracket)))
        cases.append((f"{name} Φ", lambda spec=spec: moment_map_equal(
            catalog.surface_fusion(spec).moment_map, catalog.surface(spec).moment_map)))
        cases.append((f"{name} moment map", lambda spec=spec: check_moment_map(
            catalog.surface(spec).bracket, catalog.surface(spec).moment_map)))
        if not quick or genus + boundaries == 1:
            cases.append((f"{name} qP", lambda spec=spec: check_quasi_poisson(catalog.surface(spec).bracket)))
    weighted = catalog.SurfaceSpec(0, 1, weights=(2,))
    cases.append(("weighted surface qP", lambda: check_quasi_poisson(catalog.surface(weighted).bracket)))
    cases.append(("weighted surface moment map", lambda: check_moment_map(
        catalog.surface(weighted).bracket, catalog.surface(weighted).moment_map)))
    return cases


# ----------------------------------------------------------------------
# 7 表示空间
# ----------------------------------------------------------------------
def representation_fixtures() -> List[Bundle]:
    return [
        catalog.nilpotent_free1(3),
        catalog.free2("2", gamma=0, alpha=HALF, mu=HALF),
        catalog.nilpotent_sum([3, 3]),
    ]


def representation_cases(quick: bool = False) -> List[Case]:
    cases: List[Case] = []
    sizes = (2,) if quick else (2, 3)
    for bundle in representation_fixtures():
        for size in sizes:
            samples = 200 if size == 3 else None
            checker = lambda br=bundle.bracket, size=size, samples=samples: RepresentationChecker(
                br, size, samples=samples, exhaustive_max_dim=2)
            cases.append((f"{bundle.name} Jacobi N={size}", lambda checker=checker: checker().jacobiator_check()))
            cases.append((f"{bundle.name} qP N={size}", lambda checker=checker: checker().qp_rep_check()))
    if not quick:
        cases.append(("trace trivector N=2", lambda: RepresentationChecker(
            representation_fixtures()[1].bracket, 2).trivector_check()))
        cases.append(("equivariance N=2", lambda: RepresentationChecker(
            representation_fixtures()[1].bracket, 2).equivariance_check()))
    return cases


# ----------------------------------------------------------------------
# 8 性质
# ----------------------------------------------------------------------
def property_fixtures() -> List[Bundle]:
    return [
        catalog.free2("1", gamma0=1, gamma1=2, alpha=Fraction(-3, 2), mu=-HALF),
        catalog.q1("1a", delta=1),
        catalog.surface(catalog.SurfaceSpec(1, 1)),
    ]


def tau_invariance(bundle: Bundle, count: int, seed: int, max_length: int = 3) -> CheckReport:
    """⟪a,b,c⟫ = τ⟪b,c,a⟫ 在随机字上成立"""
    A = bundle.algebra
    rng = random.Random(seed)
    report = CheckReport(f"{bundle.name}: τ-invariance of triple brackets")
    while report.checked < count:
        words = [A.random_word(rng, max_length) for _ in range(3)]
        if any(w is None for w in words):
            continue
        a, b, c = (A.word_element(w) for w in words)
        residual = triple_bracket(bundle.bracket, a, b, c) - triple_bracket(bundle.bracket, b, c, a).tau(1)
        report.record(tuple(A.format_word(w) for w in words), residual)
    return report


def normalize_confluence(algebra: AlgebraSpec, count: int, seed: int, length: int = 8) -> CheckReport:
    """单顶点群代数上：先约化两半再拼接，与整体约化结果相同"""
    rng = random.Random(seed)
    letters = algebra.letter_names
    report = CheckReport("normalize confluence on group-like words")
    for _ in range(count):
        word = [rng.choice(letters) for _ in range(rng.randint(2, length))]
        cut = rng.randint(1, len(word) - 1)
        whole = algebra.reduce(word)
        left, right = algebra.reduce(word[:cut]), algebra.reduce(word[cut:])
        pieces = None if left is None or right is None else algebra.concat(left, right)
        report.record((" ".join(word), cut), None if pieces == whole else f"{pieces} != {whole}")
    return report


def induced_bracket_properties(bundle: Bundle, count: int, seed: int, size: int = 2) -> CheckReport:
    """坐标环上诱导括号的反对称性与第二变元的莱布尼茨律"""
    coords = coordinate_ring(bundle.algebra, DimVector.of(bundle.algebra, size))
    bracket = InducedBracket(bundle.bracket, coords)
    rng = random.Random(seed)
    report = CheckReport(f"{bundle.name}: induced bracket is an antisymmetric biderivation")

    def random_poly():
        value = coords.constant(rng.randint(-2, 2))
        for _ in range(rng.randint(1, 2)):
            term = coords.constant(rng.randint(1, 3))
            for _ in range(rng.randint(1, 2)):
                name, i, j = rng.choice(coords.variables)
                term = term * coords.variable(name, i, j)
            value = value + term
        return value

    for index in range(count):
        f, g, h = random_poly(), random_poly(), random_poly()
        report.record((index, "antisymmetry"), bracket(f, g) + bracket(g, f))
        report.record((index, "leibniz"), bracket(f, g * h) - bracket(f, g) * h - g * bracket(f, h))
    return report


def property_cases(quick: bool = False) -> List[Case]:
    count = 50 if quick else 500
    seed = _seed()
    cases: List[Case] = []
    for bundle in property_fixtures():
        cases.append((f"{bundle.name} Leibniz", lambda b=bundle: check_leibniz(b.bracket, samples=count, seed=seed)))
        cases.append((f"{bundle.name} cyclic antisymmetry",
                      lambda b=bundle: check_cyclic_antisymmetry(b.bracket, samples=count, seed=seed)))
        cases.append((f"{bundle.name} τ", lambda b=bundle: tau_invariance(b, count, seed)))
    group = catalog.surface_algebra(catalog.SurfaceSpec(1, 1))
    cases.append(("normalize confluence", lambda: normalize_confluence(group, count, seed)))
    induced_count = 20 if quick else 500
    cases.append(("induced bracket", lambda: induced_bracket_properties(
        catalog.free2("2", gamma=0, alpha=HALF, mu=HALF), induced_count, seed)))
    return cases


# ----------------------------------------------------------------------
# 执行
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SuiteRow:
    name: str
    label: str
    cases: Callable[[bool], List[Case]]


SUITE_ROWS: Tuple[SuiteRow, ...] = (
    SuiteRow("classification", "分类族与扰动", classification_cases),
    SuiteRow("fusion_kappa", "融合定理与 κ 消失", fusion_kappa_cases),
    SuiteRow("fusion_table", "融合项表", fusion_table_cases),
    SuiteRow("fused_moment_map", "融合后的矩映射", fused_moment_map_cases),
    SuiteRow("vdb_quiver", "箭图括号", vdb_cases),
    SuiteRow("surface", "曲面括号", surface_cases),
    SuiteRow("representation", "表示空间", representation_cases),
    SuiteRow("properties", "性质抽样", property_cases),
)


@dataclass
class CaseResult:
    row: str
    label: str
    report: CheckReport
    seconds: float


@dataclass
class SuiteResult:
    results: List[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.report.passed for r in self.results)

    def summary(self) -> pd.DataFrame:
        rows = [{
            "row": r.row,
            "label": r.label,
            "passed": r.report.passed,
            "checked": r.report.checked,
            "witnesses": len(r.report.witnesses),
            "seconds": round(r.seconds, 3),
        } for r in self.results]
        return pd.DataFrame(rows, columns=["row", "label", "passed", "checked", "witnesses", "seconds"])

    def to_dict(self) -> dict:
        """不含耗时：同样的输入与种子得到逐字节相同的结果"""
        return {
            "passed": self.passed,
            "rows": [{"row": r.row, "label": r.label, "report": r.report.to_dict()} for r in self.results],
        }


def select_rows(names: Optional[Sequence[str]] = None) -> List[SuiteRow]:
    """按名称（子串匹配）挑选行；未给出时返回全部"""
    if not names:
        return list(SUITE_ROWS)
    chosen = [row for row in SUITE_ROWS if any(name in row.name for name in names)]
    if not chosen:
        raise DQPError(f"没有匹配的验收行: {list(names)}（可选: {[row.name for row in SUITE_ROWS]}）",
                       location="suite.row")
    return chosen


class SuiteRunner(LoggerMixin):
    def __init__(self, quick: bool = False, workers: Optional[int] = None):
        self.quick = quick
        self.workers = workers or _suite_option('workers', 4)

    def _run_row(self, row: SuiteRow) -> List[CaseResult]:
        results = []
        start_row = time.perf_counter()
        for label, case in row.cases(self.quick):
            start = time.perf_counter()
            report = case()
            results.append(CaseResult(row.name, label, report, time.perf_counter() - start))
            if not report.passed:
                self.log_warning(f"[{row.name}] {label} 未通过: {len(report.witnesses)} 个见证")
        self.log_info(f"[{row.name}] 完成 {len(results)} 个用例，用时 {time.perf_counter() - start_row:.2f}s")
        return results

    @log_method_call(include_args=False)
    def run(self, rows: Optional[Sequence[str]] = None) -> SuiteResult:
        selected = select_rows(rows)
        self.log_info(f"运行验收矩阵: {[row.name for row in selected]}，quick={self.quick}，workers={self.workers}")
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = [executor.submit(self._run_row, row) for row in selected]
            result = SuiteResult()
            for future in futures:
                result.results.extend(future.result())
        return result


def run_suite(quick: bool = False, rows: Optional[Sequence[str]] = None, workers: Optional[int] = None) -> SuiteResult:
    return SuiteRunner(quick=quick, workers=workers).run(rows)
