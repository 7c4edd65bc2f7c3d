# -*- encoding: UTF-8 -*-
"""
幂等元融合

把 A 的两个正交幂等元 e_kept 与 e_absorbed 粘合得到融合代数 A^f：
矩阵单位 e12/e21 不作为运行时符号出现，生成元直接改挂到 kept 上，
FusionType 记录每个生成元原来是否碰到 absorbed，融合项公式据此分派。

融合后的双括号 = 诱导括号（沿 φ 搬运）+ 融合项 -½ Tr(E1)Tr(E2)；
融合后的矩映射在 kept 处为 φ(Φ_kept)·φ(Φ_absorbed)。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import AlgebraSpec, GeneratorDecl, NCPoly, Tensor2, Tensor3, WordMap, tensor2
from .brackets import (
    CheckReport,
    DoubleBracketSpec,
    DoubleDerivation,
    MomentMapSpec,
    _typed_triples,
    check_moment_map,
    check_quasi_poisson,
    differential_double,
    gauge_element,
    triple_bracket,
)
from .exceptions import DeferToNumericError, StructuralError
from .logger_config import LoggerMixin, log_check_operation, log_method_call

FIRST = "first"
SECOND = "second"
THIRD = "third"
FOURTH = "fourth"
FUSION_TYPES = (FIRST, SECOND, THIRD, FOURTH)

HALF = Fraction(1, 2)


def fusion_type(decl: GeneratorDecl, absorbed: str) -> str:
    """(尾 = absorbed?, 头 = absorbed?) → (否,否)=first, (是,否)=second, (否,是)=third, (是,是)=fourth"""
    at_tail, at_head = decl.tail == absorbed, decl.head == absorbed
    if at_tail and at_head:
        return FOURTH
    if at_tail:
        return SECOND
    if at_head:
        return THIRD
    return FIRST


class FusionContext(LoggerMixin):
    """
    一次融合 (kept ← absorbed) 的全部数据

    Attributes:
        source / result: 融合前后的代数
        kept / absorbed: 保留与被吸收的幂等元
        rename: 源生成元 → 融合代数生成元（名称不变，尾头改挂）
        types: 生成元 → FusionType
        word_map: 诱导映射 φ
    """

    def __init__(self, source: AlgebraSpec, kept, absorbed):
        kept, absorbed = str(kept), str(absorbed)
        source.require_idempotent(kept)
        source.require_idempotent(absorbed)
        if kept == absorbed:
            raise StructuralError(f"融合需要两个不同的幂等元，得到 {kept} 与 {absorbed}")
        self.source = source
        self.kept = kept
        self.absorbed = absorbed
        self.types: Dict[str, str] = {g.name: fusion_type(g, absorbed) for g in source.generators}
        self.rename: Dict[str, str] = {g.name: g.name for g in source.generators}
        idem_map = {absorbed: kept}
        decls = [self._retarget(g, idem_map) for g in source.generators]
        self.result = AlgebraSpec([s for s in source.idempotents if s != absorbed], decls)
        self.word_map = WordMap(source, self.result, self.rename, idem_map)
        self.log_debug(f"融合 {kept} ← {absorbed}: 生成元类型 {self.types}")

    @staticmethod
    def _retarget(decl: GeneratorDecl, idem_map) -> GeneratorDecl:
        relabel = lambda s: None if s is None else idem_map.get(s, s)
        defining = tuple((c, w._replace(idem=relabel(w.idem)) if not w.letters else w) for c, w in decl.defining)
        return GeneratorDecl(decl.name, relabel(decl.tail), relabel(decl.head), decl.kind,
                             order=decl.order, torsion=decl.torsion, at=relabel(decl.at), defining=defining)

    @property
    def unit_kept(self) -> NCPoly:
        return self.result.idempotent(self.kept)

    def type_of(self, name: str) -> str:
        return self.types[name]

    def __repr__(self):
        return f"FusionContext(kept={self.kept!r}, absorbed={self.absorbed!r})"


def fuse_algebra(algebra: AlgebraSpec, kept, absorbed) -> FusionContext:
    return FusionContext(algebra, kept, absorbed)


# ----------------------------------------------------------------------
# Tr(E1)、Tr(E2) 与融合项
# ----------------------------------------------------------------------
def trE(ctx: FusionContext, which: str) -> DoubleDerivation:
    """
    which = "kept" 给出 Tr(E1)，"absorbed" 给出 Tr(E2)

        first : Tr(E1)(t) = tE⊗E - E⊗Et,  Tr(E2)(t) = 0
        second: Tr(E1)(u) = uE⊗E,         Tr(E2)(u) = -E⊗u
        third : Tr(E1)(v) = -E⊗Ev,        Tr(E2)(v) = v⊗E
        fourth: Tr(E1)(w) = 0,            Tr(E2)(w) = wE⊗E - E⊗Ew
    """
    if which not in ("kept", "absorbed"):
        raise StructuralError(f"which 只能是 kept 或 absorbed，得到 {which!r}")
    A = ctx.result
    E = ctx.unit_kept
    values = {}
    for name in A.bracket_generators():
        g = A.gen(name)
        kind = ctx.type_of(name)
        if which == "kept":
            if kind == FIRST:
                values[name] = tensor2(g * E, E) - tensor2(E, E * g)
            elif kind == SECOND:
                values[name] = tensor2(g * E, E)
            elif kind == THIRD:
                values[name] = -tensor2(E, E * g)
        else:
            if kind == SECOND:
                values[name] = -tensor2(E, g)
            elif kind == THIRD:
                values[name] = tensor2(g, E)
            elif kind == FOURTH:
                values[name] = tensor2(g * E, E) - tensor2(E, E * g)
    return DoubleDerivation(A, values, name="Tr(E1)" if which == "kept" else "Tr(E2)")


def fusion_bracket_term(ctx: FusionContext, a: str, b: str) -> Tensor2:
    """按 (type(a), type(b)) 分派的 16 个闭式公式（整体带 ½）"""
    A = ctx.result
    E = ctx.unit_kept
    x, y = A.gen(a), A.gen(b)
    pair = (ctx.type_of(a), ctx.type_of(b))
    t = tensor2
    if pair in ((FIRST, FIRST), (FOURTH, FOURTH)):
        return Tensor2(A)
    if pair == (FIRST, SECOND):
        value = t(E, x * y) - t(E * x, y)
    elif pair == (FIRST, THIRD):
        value = t(y * x, E) - t(y, x * E)
    elif pair == (FIRST, FOURTH):
        value = t(y * x, E) + t(E, x * y) - t(y, x * E) - t(E * x, y)
    elif pair == (SECOND, FIRST):
        value = t(x, E * y) - t(y * x, E)
    elif pair == (SECOND, SECOND):
        value = t(E, x * y) - t(y * x, E)
    elif pair == (SECOND, THIRD):
        value = t(x, E * y) - t(y, x * E)
    elif pair == (SECOND, FOURTH):
        value = t(E, x * y) - t(y, x * E)
    elif pair == (THIRD, FIRST):
        value = t(y * E, x) - t(E, x * y)
    elif pair == (THIRD, SECOND):
        value = t(y * E, x) - t(E * x, y)
    elif pair == (THIRD, THIRD):
        value = t(y * x, E) - t(E, x * y)
    elif pair == (THIRD, FOURTH):
        value = t(y * x, E) - t(E * x, y)
    elif pair == (FOURTH, FIRST):
        value = t(y * E, x) + t(x, E * y) - t(y * x, E) - t(E, x * y)
    elif pair == (FOURTH, SECOND):
        value = t(y * E, x) - t(y * x, E)
    else:  # (FOURTH, THIRD)
        value = t(x, E * y) - t(E, x * y)
    return value.scale(HALF)


def fusion_bracket(ctx: FusionContext) -> DoubleBracketSpec:
    """⟪-,-⟫_fus，生成元对上取闭式表值"""
    names = ctx.result.bracket_generators()
    values = {(a, b): fusion_bracket_term(ctx, a, b) for a in names for b in names}
    return DoubleBracketSpec(ctx.result, values, name=f"fus({ctx.kept}<-{ctx.absorbed})", from_bivector=True)


def fusion_bivector_bracket(ctx: FusionContext) -> DoubleBracketSpec:
    """-½ Tr(E1)Tr(E2) 的微分双括号"""
    return differential_double(trE(ctx, "kept"), trE(ctx, "absorbed")).scale(-HALF)


@log_check_operation('融合项表')
def check_fusion_table(ctx: FusionContext) -> CheckReport:
    """闭式表与 -½Tr(E1)Tr(E2) 在全部生成元对上一致"""
    bivector = fusion_bivector_bracket(ctx)
    report = CheckReport(f"fusion table {ctx.kept}<-{ctx.absorbed}")
    for a in ctx.result.bracket_generators():
        for b in ctx.result.bracket_generators():
            residual = fusion_bracket_term(ctx, a, b) - bivector.value(a, b)
            report.record((a, b, ctx.type_of(a), ctx.type_of(b)), residual)
    return report


@log_check_operation('Tr(E1)+Tr(E2)')
def trE_sum_check(ctx: FusionContext) -> CheckReport:
    """Tr(E1) + Tr(E2) = E_kept 在每个生成元上成立"""
    total = trE(ctx, "kept") + trE(ctx, "absorbed")
    gauge = gauge_element(ctx.result, ctx.kept)
    report = CheckReport(f"Tr(E1)+Tr(E2) = E_{ctx.kept}")
    for name in ctx.result.bracket_generators():
        report.record((name,), total.on_generator(name) - gauge.on_generator(name))
    return report


# ----------------------------------------------------------------------
# 融合后的括号与矩映射
# ----------------------------------------------------------------------
def induced_bracket(ctx: FusionContext, br: DoubleBracketSpec) -> DoubleBracketSpec:
    if br.algebra != ctx.source:
        raise StructuralError("双括号不在融合上下文的源代数上")
    return br.transported(ctx.word_map, name=f"induced({br.name})")


def fused_bracket(ctx: FusionContext, br: DoubleBracketSpec) -> DoubleBracketSpec:
    """诱导括号 + 融合项"""
    fused = induced_bracket(ctx, br) + fusion_bracket(ctx)
    fused.name = f"{br.name}^f({ctx.kept}<-{ctx.absorbed})"
    return fused


def fused_moment_map(ctx: FusionContext, mm: MomentMapSpec) -> MomentMapSpec:
    """Φ^f_kept = φ(Φ_kept)·φ(Φ_absorbed)，其余分量直接搬运"""
    if mm.algebra != ctx.source:
        raise StructuralError("矩映射不在融合上下文的源代数上")
    phi = ctx.word_map
    components = {}
    for label in ctx.result.idempotents:
        if label == ctx.kept:
            components[label] = phi(mm.component(ctx.kept)) * phi(mm.component(ctx.absorbed))
        else:
            components[label] = phi(mm.component(label))
    return MomentMapSpec(ctx.result, components)


def kappa(ctx: FusionContext, br: DoubleBracketSpec, a, b, c) -> Tensor3:
    """κ = ⟪a,b,c⟫^f - ⟪a,b,c⟫_诱导 - ⟪a,b,c⟫_fus，预期为 0"""
    brackets = _kappa_brackets(ctx, br)
    return _kappa_value(brackets, a, b, c)


def _kappa_brackets(ctx, br):
    induced = induced_bracket(ctx, br)
    fus = fusion_bracket(ctx)
    fused = induced + fus
    return fused, induced, fus


def _kappa_value(brackets, a, b, c) -> Tensor3:
    fused, induced, fus = brackets
    return triple_bracket(fused, a, b, c) - triple_bracket(induced, a, b, c) - triple_bracket(fus, a, b, c)


def type_signature(ctx: FusionContext, names: Sequence[str]) -> Tuple[str, ...]:
    """三元组的类型组合（无序多重集，用于统计覆盖了哪些类型组合）"""
    return tuple(sorted(ctx.type_of(n) for n in names))


@log_check_operation('κ 消失')
def check_kappa(ctx: FusionContext, br: DoubleBracketSpec) -> CheckReport:
    """κ 在全部（类型允许的）生成元三元组上为 0；notes 中记录覆盖到的类型组合"""
    brackets = _kappa_brackets(ctx, br)
    report = CheckReport(f"kappa {br.name} {ctx.kept}<-{ctx.absorbed}")
    covered = set()
    for a, b, c in _typed_triples(ctx.result, ctx.result.bracket_generators()):
        covered.add(type_signature(ctx, (a, b, c)))
        report.record((a, b, c), _kappa_value(brackets, a, b, c))
    report.notes.extend("types=" + ",".join(sig) for sig in sorted(covered))
    return report


# ----------------------------------------------------------------------
# 逐步融合
# ----------------------------------------------------------------------
def parse_steps(text: str) -> List[Tuple[str, str]]:
    """"1<-2,1<-3" → [("1","2"), ("1","3")]（kept<-absorbed）"""
    steps = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "<-" not in chunk:
            raise StructuralError(f"融合步骤格式应为 kept<-absorbed，得到 {chunk!r}")
        kept, absorbed = (part.strip() for part in chunk.split("<-", 1))
        steps.append((kept, absorbed))
    if not steps:
        raise StructuralError("融合步骤为空")
    return steps


@dataclass
class FusionPipeline:
    """逐步融合的结果：每一步的上下文、最终括号与矩映射、复查报告"""
    contexts: List[FusionContext]
    bracket: DoubleBracketSpec
    moment_map: Optional[MomentMapSpec] = None
    reports: List[CheckReport] = field(default_factory=list)

    @property
    def algebra(self) -> AlgebraSpec:
        return self.bracket.algebra

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


class FusionRunner(LoggerMixin):
    """按顺序执行 (kept, absorbed) 融合步骤，可选地在每一步后复查"""

    def __init__(self, recheck: bool = False):
        self.recheck = recheck

    @log_method_call(include_args=False)
    def run(self, bracket: DoubleBracketSpec, steps: Sequence[Tuple[str, str]],
            moment_map: Optional[MomentMapSpec] = None) -> FusionPipeline:
        pipeline = FusionPipeline([], bracket, moment_map)
        for kept, absorbed in steps:
            ctx = fuse_algebra(pipeline.bracket.algebra, kept, absorbed)
            self.log_info(f"融合 {kept} <- {absorbed}（{pipeline.bracket.name}）")
            if self.recheck:
                pipeline.reports.append(check_kappa(ctx, pipeline.bracket))
            pipeline.contexts.append(ctx)
            pipeline.bracket = fused_bracket(ctx, pipeline.bracket)
            if pipeline.moment_map is not None:
                pipeline.moment_map = fused_moment_map(ctx, pipeline.moment_map)
            if self.recheck:
                pipeline.reports.append(check_quasi_poisson(pipeline.bracket))
                if pipeline.moment_map is not None:
                    try:
                        pipeline.reports.append(check_moment_map(pipeline.bracket, pipeline.moment_map))
                    except DeferToNumericError as exc:
                        self.log_warning(f"第 {len(pipeline.contexts)} 步的矩映射跳过符号检查: {exc}")
        return pipeline


def fuse_sequence(bracket: DoubleBracketSpec, steps, moment_map: Optional[MomentMapSpec] = None,
                  recheck: bool = False) -> FusionPipeline:
    if isinstance(steps, str):
        steps = parse_steps(steps)
    return FusionRunner(recheck=recheck).run(bracket, steps, moment_map)
