# -*- encoding: UTF-8 -*-
"""
双括号

- DoubleBracketSpec：生成元对上的双括号值表，按外/内导子规则与局部化规则延拓到任意元素
- DoubleDerivation：A → A⊗A 的双导子（规范元 E_s、d_x 等），支持双模缩放
- 三重括号、拟泊松反常项、规范元与微分括号、幂等元压缩、直和、矩映射检查

所有检查都返回 CheckReport，数学意义上的失败不抛异常。
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    FORMAL_INVERSE,
    AlgebraSpec,
    GeneratorDecl,
    NCPoly,
    Tensor2,
    Tensor3,
    Word,
    WordMap,
    _accumulate,
    inner_act,
    outer_act,
    tensor2,
    tensor3,
    to_fraction,
)
from .exceptions import DeferToNumericError, SpecIncompleteError, StructuralError
from .logger_config import LoggerMixin, log_check_operation

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def sampling_defaults(count=None, seed=None, max_length=None):
    """抽样参数：显式参数优先，其余取自 config.yaml"""
    import settings

    config = settings.get_config()
    sampling = config.get('sampling', {})
    return (
        sampling.get('random_words', 50) if count is None else count,
        config.get('seed', 42) if seed is None else seed,
        sampling.get('max_word_length', 4) if max_length is None else max_length,
    )


# ----------------------------------------------------------------------
# 检查报告
# ----------------------------------------------------------------------
@dataclass
class Witness:
    input: Tuple[str, ...]
    residual: object

    def to_dict(self):
        return {"input": list(self.input), "residual": str(self.residual)}


@dataclass
class CheckReport:
    """一次检查的结果：passed 当且仅当没有见证"""
    name: str
    checked: int = 0
    witnesses: List[Witness] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def record(self, inputs: Sequence, residual) -> bool:
        """登记一次比较；残差非零时记为见证，返回该次是否通过"""
        self.checked += 1
        if residual:
            self.witnesses.append(Witness(tuple(str(x) for x in inputs), residual))
            return False
        return True

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.checked += other.checked
        self.witnesses.extend(other.witnesses)
        self.notes.extend(other.notes)
        return self

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "notes": list(self.notes),
        }


def combine_reports(name: str, reports: Iterable[CheckReport]) -> CheckReport:
    combined = CheckReport(name)
    for report in reports:
        combined.merge(report)
    return combined


# ----------------------------------------------------------------------
# 双括号
# ----------------------------------------------------------------------
class DoubleBracketSpec(LoggerMixin):
    """
    生成元对 (g, h) → ⟪g, h⟫ 的值表

    Args:
        algebra: 所在代数
        values: {(g, h): Tensor2}；只给出一个方向时另一方向自动取 -flip
        default_zero: 未给出的生成元对视为 0；否则求值时抛 SpecIncompleteError
        name: 用于日志与报告
        from_bivector: 是否由双导子乘积（微分括号）构造
    """

    def __init__(self, algebra: AlgebraSpec, values: Optional[Mapping[Tuple[str, str], Tensor2]] = None,
                 default_zero: bool = False, name: Optional[str] = None, from_bivector: bool = False):
        self.algebra = algebra
        self.default_zero = default_zero
        self.name = name or "bracket"
        self.from_bivector = from_bivector
        self._cache: Dict[Tuple[Word, Word], Tensor2] = {}
        self._zero = Tensor2(algebra)

        primaries = set(algebra.bracket_generators())
        given: Dict[Tuple[str, str], Tensor2] = {}
        for key, value in (values or {}).items():
            g, h = key
            location = f"pair({g},{h})"
            for name_ in (g, h):
                if name_ not in primaries:
                    raise StructuralError(f"括号只能在非形式逆的生成元上取值: {name_}", location=location)
            if isinstance(value, int) and value == 0:
                value = self._zero
            if not isinstance(value, Tensor2):
                raise StructuralError(f"括号值必须是 Tensor2，得到 {type(value).__name__}", location=location)
            if value.algebra is not algebra and value.algebra != algebra:
                raise StructuralError("括号值不属于该代数", location=location)
            self._check_typing(g, h, value, location)
            given[(g, h)] = value

        stored = dict(given)
        for (g, h), value in given.items():
            if (h, g) not in stored:
                stored[(h, g)] = -value.flip()
        self._values = stored

    def _check_typing(self, g: str, h: str, value: Tensor2, location: str):
        """⟪g,h⟫ ∈ e_{t(h)} A e_{h(g)} ⊗ e_{t(g)} A e_{h(h)}"""
        gd, hd = self.algebra.generator(g), self.algebra.generator(h)
        if not value.is_typed(hd.tail, gd.head, gd.tail, hd.head):
            raise StructuralError(
                f"⟪{g},{h}⟫ 的值不满足幂等元类型 e{hd.tail}·A·e{gd.head} ⊗ e{gd.tail}·A·e{hd.head}",
                location=location)

    # ------------------------------------------------------------------
    def value(self, g: str, h: str) -> Tensor2:
        try:
            return self._values[(g, h)]
        except KeyError:
            if self.default_zero:
                return self._zero
            raise SpecIncompleteError(f"双括号 {self.name} 缺少生成元对 ({g}, {h}) 的值", pair=(g, h)) from None

    def has_pair(self, g: str, h: str) -> bool:
        return (g, h) in self._values

    def stored_pairs(self) -> List[Tuple[str, str]]:
        order = {name: i for i, name in enumerate(self.algebra.generator_names)}
        return sorted(self._values, key=lambda pair: (order[pair[0]], order[pair[1]]))

    def generator_pairs(self) -> List[Tuple[str, str]]:
        names = self.algebra.bracket_generators()
        return [(g, h) for g in names for h in names]

    def table(self) -> List[Tuple[str, str, Tensor2]]:
        """全部生成元对的值（default_zero 时补 0）"""
        return [(g, h, self.value(g, h)) for g, h in self.generator_pairs()
                if self.default_zero or self.has_pair(g, h)]

    def __repr__(self):
        return f"DoubleBracketSpec(name={self.name!r}, pairs={len(self._values)})"

    # ------------------------------------------------------------------
    # 代数运算与搬运
    # ------------------------------------------------------------------
    def __add__(self, other: "DoubleBracketSpec") -> "DoubleBracketSpec":
        if other.algebra != self.algebra:
            raise StructuralError("只能相加同一代数上的双括号")
        values = {}
        for g, h in self.generator_pairs():
            left = self._values.get((g, h))
            right = other._values.get((g, h))
            if left is None and right is None:
                continue
            values[(g, h)] = (left if left is not None else self.value(g, h)) + \
                (right if right is not None else other.value(g, h))
        return DoubleBracketSpec(self.algebra, values, default_zero=self.default_zero and other.default_zero,
                                 name=f"{self.name}+{other.name}",
                                 from_bivector=self.from_bivector and other.from_bivector)

    def scale(self, coeff) -> "DoubleBracketSpec":
        return DoubleBracketSpec(self.algebra, {k: v.scale(coeff) for k, v in self._values.items()},
                                 default_zero=self.default_zero, name=self.name, from_bivector=self.from_bivector)

    def transported(self, word_map: WordMap, name: Optional[str] = None) -> "DoubleBracketSpec":
        """沿字映射（改名同构或融合映射）搬运值表"""
        values = {(word_map.letter(g), word_map.letter(h)): word_map(v) for (g, h), v in self._values.items()}
        return DoubleBracketSpec(word_map.target, values, default_zero=self.default_zero,
                                 name=name or self.name, from_bivector=self.from_bivector)

    # ------------------------------------------------------------------
    # 求值
    # ------------------------------------------------------------------
    def eval_words(self, u: Word, v: Word) -> Tensor2:
        """两个规范字的双括号（带缓存）"""
        if not u.letters or not v.letters:
            return self._zero
        key = (u, v)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._eval_words(u, v)
            self._cache[key] = cached
        return cached

    def _eval_words(self, u: Word, v: Word) -> Tensor2:
        A = self.algebra
        if v.length > 1:
            first, rest = Word(v.letters[:1]), Word(v.letters[1:])
            return outer_act(None, self.eval_words(u, first), A.word_element(rest)) + \
                outer_act(A.word_element(first), self.eval_words(u, rest), None)
        if u.length > 1:
            first, rest = Word(u.letters[:1]), Word(u.letters[1:])
            return inner_act(None, self.eval_words(first, v), A.word_element(rest)) + \
                inner_act(A.word_element(first), self.eval_words(rest, v), None)

        x, y = u.letters[0], v.letters[0]
        lx, ly = A.letter(x), A.letter(y)
        if ly.sign < 0:
            inverse = A.word_element(v)
            return -outer_act(inverse, self.eval_words(u, Word((ly.base,))), inverse)
        if A.generator(y).kind == FORMAL_INVERSE:
            inverse = A.word_element(v)
            return -outer_act(inverse, eval_double(self, A.word_element(u), A.defining_element(y)), inverse)
        if lx.sign < 0:
            inverse = A.word_element(u)
            return -inner_act(inverse, self.eval_words(Word((lx.base,)), v), inverse)
        if A.generator(x).kind == FORMAL_INVERSE:
            inverse = A.word_element(u)
            return -inner_act(inverse, eval_double(self, A.defining_element(x), A.word_element(v)), inverse)
        return self.value(x, y)


def eval_double(br: DoubleBracketSpec, a, b) -> Tensor2:
    """⟪a, b⟫，对两个参数双线性"""
    A = br.algebra
    a, b = A.element(a), A.element(b)
    terms: Dict = {}
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            for key, c in br.eval_words(u, v).terms.items():
                _accumulate(terms, key, c * cu * cv)
    return Tensor2._raw(A, terms)


def zero_bracket(algebra: AlgebraSpec, name: str = "zero") -> DoubleBracketSpec:
    return DoubleBracketSpec(algebra, {}, default_zero=True, name=name)


# ----------------------------------------------------------------------
# 三重括号与拟泊松条件
# ----------------------------------------------------------------------
def _half_triple(br: DoubleBracketSpec, a: NCPoly, b: NCPoly, c: NCPoly) -> Tensor3:
    """⟪a, ⟪b,c⟫′⟫ ⊗ ⟪b,c⟫″"""
    A = br.algebra
    terms: Dict = {}
    for (w1, w2), coeff in eval_double(br, b, c).terms.items():
        inner = eval_double(br, a, A.word_element(w1))
        for (x1, x2), k in inner.terms.items():
            _accumulate(terms, (x1, x2, w2), coeff * k)
    return Tensor3._raw(A, terms)


def triple_bracket(br: DoubleBracketSpec, a, b, c) -> Tensor3:
    """⟪a,b,c⟫ = ⟪a,⟪b,c⟫′⟫⊗⟪b,c⟫″ + τ⟪b,⟪c,a⟫′⟫⊗⟪c,a⟫″ + τ²⟪c,⟪a,b⟫′⟫⊗⟪a,b⟫″"""
    A = br.algebra
    a, b, c = A.element(a), A.element(b), A.element(c)
    return _half_triple(br, a, b, c) + _half_triple(br, b, c, a).tau(1) + _half_triple(br, c, a, b).tau(2)


def qp_anomaly(algebra: AlgebraSpec, a, b, c) -> Tensor3:
    """拟泊松条件的右端：¼ Σ_s 八项"""
    a, b, c = algebra.element(a), algebra.element(b), algebra.element(c)
    total = Tensor3(algebra)
    for label in algebra.idempotents:
        e = algebra.idempotent(label)
        cea, ae, eb, be, ec = c * e * a, a * e, e * b, b * e, e * c
        ce, ea, aeb, bec = c * e, e * a, a * e * b, b * e * c
        total = total \
            + tensor3(cea, eb, e) - tensor3(cea, e, be) \
            - tensor3(ce, aeb, e) + tensor3(ce, ae, be) \
            - tensor3(ea, eb, ec) + tensor3(ea, e, bec) \
            + tensor3(e, aeb, ec) - tensor3(e, ae, bec)
    return total.scale(QUARTER)


def _typed_triples(algebra: AlgebraSpec, names: Sequence[str]):
    """跳过幂等元类型使两端都为 0 的生成元三元组"""
    decl = {name: algebra.generator(name) for name in names}
    for a, b, c in itertools.product(names, repeat=3):
        da, db, dc = decl[a], decl[b], decl[c]
        if algebra.reachable(dc.tail, da.head) and algebra.reachable(da.tail, db.head) \
                and algebra.reachable(db.tail, dc.head):
            yield a, b, c


@log_check_operation('循环反对称')
def check_cyclic_antisymmetry(br: DoubleBracketSpec, samples=None, seed=None, max_length=None) -> CheckReport:
    """生成元对以及随机字对上 ⟪a,b⟫ = -⟪b,a⟫°"""
    report = CheckReport(f"{br.name}: cyclic antisymmetry")
    for g, h in br.generator_pairs():
        report.record((g, h), br.value(g, h) + br.value(h, g).flip())
    count, seed, max_length = sampling_defaults(samples, seed, max_length)
    rng = random.Random(seed)
    A = br.algebra
    for _ in range(count):
        u, v = A.random_word(rng, max_length), A.random_word(rng, max_length)
        if u is None or v is None:
            continue
        residual = br.eval_words(u, v) + br.eval_words(v, u).flip()
        report.record((A.format_word(u), A.format_word(v)), residual)
    return report


@log_check_operation('拟泊松')
def check_quasi_poisson(br: DoubleBracketSpec, generators: Optional[Sequence[str]] = None) -> CheckReport:
    """所有（类型允许的）有序生成元三元组上 ⟪a,b,c⟫ = 反常项"""
    A = br.algebra
    names = tuple(generators) if generators is not None else A.bracket_generators()
    report = CheckReport(f"{br.name}: quasi-Poisson")
    for a, b, c in _typed_triples(A, names):
        residual = triple_bracket(br, a, b, c) - qp_anomaly(A, a, b, c)
        report.record((a, b, c), residual)
    return report


@log_check_operation('双泊松')
def check_double_poisson(br: DoubleBracketSpec) -> CheckReport:
    """三重括号在生成元上恒为 0"""
    A = br.algebra
    report = CheckReport(f"{br.name}: double Poisson")
    for a, b, c in _typed_triples(A, A.bracket_generators()):
        report.record((a, b, c), triple_bracket(br, a, b, c))
    return report


@log_check_operation('拟泊松抽样')
def check_triple_sampled(br: DoubleBracketSpec, samples=None, seed=None, max_length=None) -> CheckReport:
    """随机字三元组上三重括号 = 反常项（不只是生成元）"""
    A = br.algebra
    count, seed, max_length = sampling_defaults(samples, seed, max_length)
    rng = random.Random(seed)
    report = CheckReport(f"{br.name}: quasi-Poisson on random words")
    for _ in range(count):
        words = [A.random_word(rng, max_length) for _ in range(3)]
        if any(w is None for w in words):
            continue
        a, b, c = (A.word_element(w) for w in words)
        residual = triple_bracket(br, a, b, c) - qp_anomaly(A, a, b, c)
        report.record(tuple(A.format_word(w) for w in words), residual)
    return report


@log_check_operation('莱布尼茨律')
def check_leibniz(br: DoubleBracketSpec, samples=None, seed=None, max_length=None) -> CheckReport:
    """⟪a,bc⟫ = ⟪a,b⟫c + b⟪a,c⟫ 与 ⟪bc,a⟫ = ⟪b,a⟫∗c + b∗⟪c,a⟫"""
    A = br.algebra
    count, seed, max_length = sampling_defaults(samples, seed, max_length)
    rng = random.Random(seed)
    report = CheckReport(f"{br.name}: Leibniz rules")
    for _ in range(count):
        words = [A.random_word(rng, max_length) for _ in range(3)]
        if any(w is None for w in words):
            continue
        a, b, c = (A.word_element(w) for w in words)
        label = tuple(A.format_word(w) for w in words)
        outer = eval_double(br, a, b * c) - outer_act(None, eval_double(br, a, b), c) \
            - outer_act(b, eval_double(br, a, c), None)
        inner = eval_double(br, b * c, a) - inner_act(None, eval_double(br, b, a), c) \
            - inner_act(b, eval_double(br, c, a), None)
        report.record(("outer",) + label, outer)
        report.record(("inner",) + label, inner)
    return report


# ----------------------------------------------------------------------
# 双导子、规范元与微分括号
# ----------------------------------------------------------------------
class DoubleDerivation:
    """
    B-线性双导子 δ: A → A⊗A（外双模结构），值存于非形式逆生成元上。

    逆元按外局部化规则导出：δ(g⁻¹) = -g⁻¹δ(g)g⁻¹，形式逆 y = d⁻¹ 同理用 d。
    """

    def __init__(self, algebra: AlgebraSpec, values: Optional[Mapping[str, Tensor2]] = None,
                 name: Optional[str] = None):
        self.algebra = algebra
        self.name = name or "derivation"
        primaries = set(algebra.bracket_generators())
        clean = {}
        for gen, value in (values or {}).items():
            if gen not in primaries:
                raise StructuralError(f"双导子只能在非形式逆的生成元上取值: {gen}")
            decl = algebra.generator(gen)
            if not all(algebra.word_tail(a) == decl.tail and algebra.word_head(b) == decl.head
                       for a, b in value.terms):
                raise StructuralError(f"δ({gen}) 不满足类型 e{decl.tail}·A ⊗ A·e{decl.head}")
            clean[gen] = value
        self._values = clean
        self._cache: Dict[Word, Tensor2] = {}
        self._zero = Tensor2(algebra)

    def on_generator(self, name: str) -> Tensor2:
        return self._values.get(name, self._zero)

    def apply_word(self, word: Word) -> Tensor2:
        if not word.letters:
            return self._zero
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        A = self.algebra
        if word.length > 1:
            first, rest = Word(word.letters[:1]), Word(word.letters[1:])
            result = outer_act(None, self.apply_word(first), A.word_element(rest)) + \
                outer_act(A.word_element(first), self.apply_word(rest), None)
        else:
            letter = A.letter(word.letters[0])
            if letter.sign < 0:
                inverse = A.word_element(word)
                result = -outer_act(inverse, self.apply_word(Word((letter.base,))), inverse)
            elif A.generator(letter.name).kind == FORMAL_INVERSE:
                inverse = A.word_element(word)
                result = -outer_act(inverse, self.apply(A.defining_element(letter.name)), inverse)
            else:
                result = self.on_generator(letter.name)
        self._cache[word] = result
        return result

    def apply(self, a) -> Tensor2:
        a = self.algebra.element(a)
        terms: Dict = {}
        for w, c in a.terms.items():
            for key, k in self.apply_word(w).terms.items():
                _accumulate(terms, key, c * k)
        return Tensor2._raw(self.algebra, terms)

    __call__ = apply

    def __add__(self, other: "DoubleDerivation") -> "DoubleDerivation":
        names = set(self._values) | set(other._values)
        return DoubleDerivation(self.algebra, {g: self.on_generator(g) + other.on_generator(g) for g in names},
                                name=f"{self.name}+{other.name}")

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, coeff) -> "DoubleDerivation":
        return DoubleDerivation(self.algebra, {g: v.scale(coeff) for g, v in self._values.items()},
                                name=self.name)

    def scaled(self, left=None, right=None) -> "DoubleDerivation":
        """双模缩放 (bδc)(a) = δ(a)′c ⊗ bδ(a)″"""
        A = self.algebra
        left = None if left is None else A.element(left)
        right = None if right is None else A.element(right)
        return DoubleDerivation(A, {g: inner_act(left, v, right) for g, v in self._values.items()},
                                name=f"scaled({self.name})")

    def __repr__(self):
        return f"DoubleDerivation(name={self.name!r}, generators={sorted(self._values)})"


def gauge_element(algebra: AlgebraSpec, label) -> DoubleDerivation:
    """E_s(a) = a e_s ⊗ e_s - e_s ⊗ e_s a"""
    label = algebra.require_idempotent(label)
    e = algebra.idempotent(label)
    values = {}
    for name in algebra.bracket_generators():
        g = algebra.gen(name)
        values[name] = tensor2(g * e, e) - tensor2(e, e * g)
    return DoubleDerivation(algebra, values, name=f"E_{label}")


def partial_derivation(algebra: AlgebraSpec, name: str) -> DoubleDerivation:
    """d_x：d_x(x) = e_{t(x)} ⊗ e_{h(x)}，其余生成元为 0"""
    decl = algebra.generator(name)
    return DoubleDerivation(algebra, {name: tensor2(algebra.idempotent(decl.tail), algebra.idempotent(decl.head))},
                            name=f"d_{name}")


def _contract(x: Tensor2, y: Tensor2) -> Tensor2:
    """C(X, Y) = X′Y″ ⊗ Y′X″"""
    A = x.algebra
    terms: Dict = {}
    for (x1, x2), cx in x.terms.items():
        for (y1, y2), cy in y.terms.items():
            left = A.concat(x1, y2)
            if left is None:
                continue
            right = A.concat(y1, x2)
            if right is None:
                continue
            _accumulate(terms, (left, right), cx * cy)
    return Tensor2._raw(A, terms)


def differential_double(d1: DoubleDerivation, d2: DoubleDerivation, name: Optional[str] = None) -> DoubleBracketSpec:
    """双导子乘积 δ1δ2 给出的双括号：C(δ2(c), δ1(b)) - C(δ1(c), δ2(b))"""
    A = d1.algebra
    if d2.algebra != A:
        raise StructuralError("双导子必须定义在同一代数上")
    values = {}
    for b in A.bracket_generators():
        for c in A.bracket_generators():
            b_poly, c_poly = A.gen(b), A.gen(c)
            values[(b, c)] = _contract(d2(c_poly), d1(b_poly)) - _contract(d1(c_poly), d2(b_poly))
    return DoubleBracketSpec(A, values, name=name or f"{d1.name}·{d2.name}", from_bivector=True)


def _tilde_triple(d1, d2, d3, a, b, c) -> Tensor3:
    """δ3(c)′δ1(a)″ ⊗ δ1(a)′δ2(b)″ ⊗ δ2(b)′δ3(c)″"""
    A = d1.algebra
    x, y, z = d1(a), d2(b), d3(c)
    terms: Dict = {}
    for (x1, x2), cx in x.terms.items():
        for (y1, y2), cy in y.terms.items():
            middle = A.concat(x1, y2)
            if middle is None:
                continue
            for (z1, z2), cz in z.terms.items():
                first = A.concat(z1, x2)
                if first is None:
                    continue
                last = A.concat(y1, z2)
                if last is None:
                    continue
                _accumulate(terms, (first, middle, last), cx * cy * cz)
    return Tensor3._raw(A, terms)


def differential_triple(d1: DoubleDerivation, d2: DoubleDerivation, d3: DoubleDerivation, a, b, c) -> Tensor3:
    """三个双导子乘积的三重括号：Σ_i τ^i ∘ tilde ∘ τ^{-i}"""
    A = d1.algebra
    a, b, c = A.element(a), A.element(b), A.element(c)
    return _tilde_triple(d1, d2, d3, a, b, c) \
        + _tilde_triple(d1, d2, d3, b, c, a).tau(1) \
        + _tilde_triple(d1, d2, d3, c, a, b).tau(2)


def gauge_anomaly(algebra: AlgebraSpec, a, b, c) -> Tensor3:
    """(1/12) Σ_s ⟪a,b,c⟫_{E_s³}"""
    total = Tensor3(algebra)
    for label in algebra.idempotents:
        E = gauge_element(algebra, label)
        total = total + differential_triple(E, E, E, a, b, c)
    return total.scale(Fraction(1, 12))


@log_check_operation('规范元一致性')
def check_gauge_consistency(algebra: AlgebraSpec) -> CheckReport:
    """(1/12)Σ_s E_s³ 的三重括号在全部生成元三元组上等于反常项"""
    report = CheckReport("gauge trivector = quasi-Poisson anomaly")
    for a, b, c in _typed_triples(algebra, algebra.bracket_generators()):
        report.record((a, b, c), gauge_anomaly(algebra, a, b, c) - qp_anomaly(algebra, a, b, c))
    return report


# ----------------------------------------------------------------------
# 矩映射
# ----------------------------------------------------------------------
class MomentMapSpec:
    """Φ = Σ_s Φ_s，Φ_s ∈ e_s A e_s"""

    def __init__(self, algebra: AlgebraSpec, components: Mapping[str, object]):
        self.algebra = algebra
        clean = {}
        for label, value in components.items():
            label = algebra.require_idempotent(label)
            poly = algebra.element(value)
            if not poly.is_typed(label, label):
                raise StructuralError(f"Φ_{label} 不在 e{label}·A·e{label} 中", location=f"components.{label}")
            clean[label] = poly
        missing = [s for s in algebra.idempotents if s not in clean]
        if missing:
            raise StructuralError(f"矩映射缺少分量: {missing}")
        self.components: Dict[str, NCPoly] = {s: clean[s] for s in algebra.idempotents}

    @classmethod
    def from_element(cls, algebra: AlgebraSpec, phi) -> "MomentMapSpec":
        """由单个 Φ 取 e_s Φ e_s 压缩得到各分量"""
        phi = algebra.element(phi)
        return cls(algebra, {s: phi.compress(s, s) for s in algebra.idempotents})

    def component(self, label) -> NCPoly:
        return self.components[str(label)]

    def total(self) -> NCPoly:
        return sum(self.components.values(), self.algebra.zero())

    def has_formal_inverse(self) -> bool:
        return any(p.has_formal_inverse() for p in self.components.values())

    def transported(self, word_map: WordMap) -> "MomentMapSpec":
        return MomentMapSpec(word_map.target, {word_map.idem_map.get(s, s): word_map(p)
                                               for s, p in self.components.items()})

    def __repr__(self):
        return "MomentMapSpec(" + ", ".join(f"{s}: {p}" for s, p in self.components.items()) + ")"


def moment_map_rhs(algebra: AlgebraSpec, label: str, phi: NCPoly, a: NCPoly) -> Tensor2:
    """½(a e_s⊗Φ_s - e_s⊗Φ_s a + aΦ_s⊗e_s - Φ_s⊗e_s a)"""
    e = algebra.idempotent(label)
    return (tensor2(a * e, phi) - tensor2(e, phi * a) + tensor2(a * phi, e) - tensor2(phi, e * a)).scale(HALF)


@log_check_operation('矩映射')
def check_moment_map(br: DoubleBracketSpec, mm: MomentMapSpec) -> CheckReport:
    """每个幂等元 s 和每个生成元 a 上 ⟪Φ_s, a⟫ 等于矩映射条件右端"""
    A = br.algebra
    if mm.has_formal_inverse():
        raise DeferToNumericError("矩映射含形式逆，需在表示空间上做数值检查")
    report = CheckReport(f"{br.name}: moment map")
    for label in A.idempotents:
        phi = mm.component(label)
        for name in A.bracket_generators():
            a = A.gen(name)
            residual = eval_double(br, phi, a) - moment_map_rhs(A, label, phi, a)
            report.record((f"Phi_{label}", name), residual)
    return report


# ----------------------------------------------------------------------
# 比较、直和与幂等元压缩
# ----------------------------------------------------------------------
@log_check_operation('括号比较')
def bracket_equal(first: DoubleBracketSpec, second: DoubleBracketSpec, name: Optional[str] = None) -> CheckReport:
    """逐生成元对比较两个双括号；代数只需标签与生成元名一致"""
    A = first.algebra
    if set(A.idempotents) != set(second.algebra.idempotents) \
            or set(A.generator_names) != set(second.algebra.generator_names):
        raise StructuralError("比较的两个双括号不在同构的代数上")
    bridge = WordMap(second.algebra, A)
    report = CheckReport(name or f"{first.name} == {second.name}")
    for g, h in first.generator_pairs():
        report.record((g, h), first.value(g, h) - bridge(second.value(g, h)))
    return report


def direct_sum_algebra(first: AlgebraSpec, second: AlgebraSpec):
    total = first.direct_sum(second)
    return total, WordMap(first, total), WordMap(second, total)


def direct_sum(first: DoubleBracketSpec, second: DoubleBracketSpec, name: Optional[str] = None) -> DoubleBracketSpec:
    """A1 ⊕ A2 上的双括号：混合生成元对为 0"""
    total, left, right = direct_sum_algebra(first.algebra, second.algebra)
    values = {}
    for source, bridge in ((first, left), (second, right)):
        for g, h in source.generator_pairs():
            if source.default_zero and not source.has_pair(g, h):
                continue
            values[(g, h)] = bridge(source.value(g, h))
    zero = Tensor2(total)
    for g in first.algebra.bracket_generators():
        for h in second.algebra.bracket_generators():
            values[(g, h)] = zero
            values[(h, g)] = zero
    return DoubleBracketSpec(total, values, default_zero=first.default_zero and second.default_zero,
                             name=name or f"{first.name}⊕{second.name}",
                             from_bivector=first.from_bivector and second.from_bivector)


def direct_sum_moment_map(first: MomentMapSpec, second: MomentMapSpec) -> MomentMapSpec:
    total, left, right = direct_sum_algebra(first.algebra, second.algebra)
    components = {s: left(p) for s, p in first.components.items()}
    components.update({s: right(p) for s, p in second.components.items()})
    return MomentMapSpec(total, components)


def _factor_word(word: Word, pieces: Sequence[Tuple[str, Tuple[str, ...]]]) -> Optional[List[str]]:
    """把字切分为角生成元字的拼接（动态规划）"""
    letters = word.letters
    n = len(letters)
    best: List[Optional[List[str]]] = [None] * (n + 1)
    best[0] = []
    for i in range(n):
        if best[i] is None:
            continue
        for name, piece in pieces:
            j = i + len(piece)
            if j <= n and best[j] is None and letters[i:j] == piece:
                best[j] = best[i] + [name]
    return best[n]


def restrict_to_corner(br: DoubleBracketSpec, labels: Sequence, generators: Optional[Mapping[str, object]] = None,
                       name: Optional[str] = None) -> DoubleBracketSpec:
    """
    e = Σ_{s∈labels} e_s 的角代数 eAe 上的诱导双括号

    Args:
        labels: 构成 e 的幂等元
        generators: 角生成元名 → A 中的字（表达式或 NCPoly，需为系数 1 的单项）；
            缺省时取首尾都落在 labels 内的原生成元
    """
    A = br.algebra
    labels = [A.require_idempotent(s) for s in labels]
    label_set = set(labels)
    if generators is None:
        generators = {g.name: g.name for g in A.generators
                      if g.tail in label_set and g.head in label_set}

    pieces: List[Tuple[str, Tuple[str, ...]]] = []
    decls: List[GeneratorDecl] = []
    for gen_name, expr in generators.items():
        poly = A.element(expr)
        items = poly.items()
        if len(items) != 1 or items[0][1] != 1 or not items[0][0].letters:
            raise StructuralError(f"角生成元 {gen_name} 必须是单个非平凡字", location=gen_name)
        word = items[0][0]
        tail, head = A.word_tail(word), A.word_head(word)
        if tail not in label_set or head not in label_set:
            raise StructuralError(f"角生成元 {gen_name} 的首尾不在所选幂等元中", location=gen_name)
        if word.length == 1 and A.letter(word.letters[0]).sign < 0:
            raise StructuralError(f"角生成元 {gen_name} 不能是逆字母", location=gen_name)
        pieces.append((gen_name, word.letters))
        source = A.generator(word.letters[0]) if word.length == 1 and word.letters[0] == gen_name else None
        if source is not None and source.kind != FORMAL_INVERSE:
            decls.append(source)
        else:
            decls.append(GeneratorDecl.plain(gen_name, tail, head))
    # 可逆生成元的逆字母作为长度 1 的片段参与切分
    for decl in decls:
        if decl.is_invertible:
            pieces.append((decl.name + "^-1", (decl.name + "^-1",)))
    corner = AlgebraSpec(labels, decls)

    def convert(word: Word) -> Word:
        if not word.letters:
            return word
        parts = _factor_word(word, pieces)
        if parts is None:
            raise StructuralError(f"字 {A.format_word(word)} 无法由角生成元表出")
        reduced = corner.reduce(tuple(parts))
        if reduced is None:
            raise StructuralError(f"字 {A.format_word(word)} 在角代数中为 0")
        return reduced

    gen_words = {gen_name: A.element(expr) for gen_name, expr in generators.items()}
    values = {}
    for g in corner.bracket_generators():
        for h in corner.bracket_generators():
            raw = eval_double(br, gen_words[g], gen_words[h])
            terms: Dict = {}
            for (w1, w2), c in raw.terms.items():
                if A.word_tail(w1) in label_set and A.word_head(w1) in label_set \
                        and A.word_tail(w2) in label_set and A.word_head(w2) in label_set:
                    _accumulate(terms, (convert(w1), convert(w2)), c)
            values[(g, h)] = Tensor2._raw(corner, terms)
    return DoubleBracketSpec(corner, values, name=name or f"{br.name}|corner", from_bivector=br.from_bivector)


@log_check_operation('矩映射比较')
def moment_map_equal(first: MomentMapSpec, second: MomentMapSpec, name: Optional[str] = None) -> CheckReport:
    """逐分量比较两个矩映射（代数只需标签与生成元名一致）"""
    A = first.algebra
    if set(A.idempotents) != set(second.algebra.idempotents) \
            or set(A.generator_names) != set(second.algebra.generator_names):
        raise StructuralError("比较的两个矩映射不在同构的代数上")
    bridge = WordMap(second.algebra, A)
    report = CheckReport(name or "moment map comparison")
    for label in A.idempotents:
        report.record((f"Phi_{label}",), first.component(label) - bridge(second.component(label)))
    return report


# ----------------------------------------------------------------------
# 数据包
# ----------------------------------------------------------------------
@dataclass
class Bundle:
    """代数 + 双括号 + 可选矩映射：目录构造、JSON 与命令行共用的数据单元"""
    bracket: DoubleBracketSpec
    moment_map: Optional[MomentMapSpec] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.moment_map is not None and self.moment_map.algebra != self.bracket.algebra:
            raise StructuralError("矩映射与双括号不在同一代数上")
        if self.name is None:
            self.name = self.bracket.name

    @property
    def algebra(self) -> AlgebraSpec:
        return self.bracket.algebra

    def transported(self, word_map: WordMap, name: Optional[str] = None) -> "Bundle":
        name = name or self.name
        return Bundle(self.bracket.transported(word_map, name=name),
                      None if self.moment_map is None else self.moment_map.transported(word_map),
                      name=name)
