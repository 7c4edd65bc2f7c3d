# -*- encoding: UTF-8 -*-
"""
路径代数核心

在 B = ⊕_s k·e_s 上的有限生成代数 A 中做精确运算：

- 生成元带尾 (tail) / 头 (head) 幂等元，路径从左往右读，a = e_{t(a)} a e_{h(a)}；
- 生成元种类：普通、可逆（可附带挠关系 γ^n = 1）、幂零（x^k = 0 的环）、
  形式逆（某个 e_s A e_s 元素的局部逆，作为不透明原子，从不展开）；
- NCPoly / Tensor2 / Tensor3 是规范化字（及其二元组、三元组）上的稀疏有理组合，
  分别表示 A、A⊗A、A⊗A⊗A 中的元素，零系数在每次运算后立即清除。

所有值构造后不可变；每个 AlgebraSpec 内部只维护一个字规范化缓存。
"""

from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from .exceptions import StructuralError

INVERSE_SUFFIX = "^-1"

PLAIN = "plain"
INVERTIBLE = "invertible"
NILPOTENT = "nilpotent"
FORMAL_INVERSE = "formal_inverse"

_NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_LABEL_PATTERN = re.compile(r"^[A-Za-z0-9_]+$")
_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?:\^(?P<power>-?\d+))?"
    r"|(?P<op>[-+*]))"
)

Scalar = Union[int, str, Fraction]


def to_fraction(value) -> Fraction:
    """把 int / 分数字符串 / Fraction 转为 Fraction；浮点数一律拒绝"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise StructuralError(f"系数不能是布尔值: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise StructuralError(f"无法解析系数: {value!r}") from exc
    if isinstance(value, float):
        raise StructuralError(f"系数必须是精确有理数，不接受浮点数: {value!r}")
    raise StructuralError(f"无法识别的系数类型: {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


class Word(NamedTuple):
    """规范化的路径：字母序列；长度为 0 时由 idem 标出它代表的 e_s"""
    letters: Tuple[str, ...]
    idem: Optional[str] = None

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def is_idempotent(self) -> bool:
        return not self.letters


class Letter(NamedTuple):
    name: str
    base: str
    sign: int
    tail: str
    head: str
    index: int


@dataclass(frozen=True)
class GeneratorDecl:
    """
    生成元声明

    Args:
        name: 生成元名称（标识符）
        tail / head: 尾、头幂等元标签
        kind: plain / invertible / nilpotent / formal_inverse
        order: 幂零阶数 k（x^k = 0）
        torsion: 可逆环的挠阶数 n（γ^n = 1）
        at: 形式逆所在的幂等元
        defining: 形式逆的定义元素 d，存为 (系数, 字) 元组
    """
    name: str
    tail: str
    head: str
    kind: str = PLAIN
    order: Optional[int] = None
    torsion: Optional[int] = None
    at: Optional[str] = None
    defining: Tuple[Tuple[Fraction, Word], ...] = ()

    @classmethod
    def plain(cls, name, tail, head):
        return cls(name, str(tail), str(head))

    @classmethod
    def invertible(cls, name, tail, head, torsion=None):
        return cls(name, str(tail), str(head), INVERTIBLE, torsion=torsion)

    @classmethod
    def nilpotent(cls, name, at, order):
        return cls(name, str(at), str(at), NILPOTENT, order=order)

    @classmethod
    def formal_inverse(cls, name, at, element):
        """element 可以是 NCPoly，也可以是 (系数, Word) 序列"""
        if isinstance(element, NCPoly):
            terms = tuple((coeff, word) for word, coeff in element.items())
        else:
            terms = tuple((to_fraction(c), w) for c, w in element)
        return cls(name, str(at), str(at), FORMAL_INVERSE, at=str(at), defining=terms)

    @property
    def is_invertible(self) -> bool:
        return self.kind == INVERTIBLE

    @property
    def is_formal_inverse(self) -> bool:
        return self.kind == FORMAL_INVERSE


class AlgebraSpec:
    """
    A 的完整描述：有序的幂等元标签加上有序的生成元声明。

    两个 AlgebraSpec 当且仅当标签与声明逐一相同时相等；它们可以作为字典键使用。
    """

    def __init__(self, idempotents: Sequence, generators: Sequence[GeneratorDecl] = ()):
        self.idempotents: Tuple[str, ...] = tuple(str(s) for s in idempotents)
        self.generators: Tuple[GeneratorDecl, ...] = tuple(generators)
        self._idem_index: Dict[str, int] = {}
        self._gen_index: Dict[str, int] = {}
        self._letters: Dict[str, Letter] = {}
        self._torsion: Dict[str, int] = {}
        self._nilpotent: Dict[str, int] = {}
        self._reduce_cache: Dict[Tuple[Tuple[str, ...], Optional[str]], Optional[Word]] = {}
        self._defining_cache: Dict[str, NCPoly] = {}
        self._reach = None
        self._build()
        self._hash = hash((self.idempotents, self.generators))

    # ------------------------------------------------------------------
    # 构造与校验
    # ------------------------------------------------------------------
    def _build(self):
        if not self.idempotents:
            raise StructuralError("幂等元集合不能为空")
        for position, label in enumerate(self.idempotents):
            if not _LABEL_PATTERN.match(label):
                raise StructuralError(f"非法的幂等元标签: {label!r}", location=f"idempotents[{position}]")
            if label in self._idem_index:
                raise StructuralError(f"幂等元标签重复: {label}", location=f"idempotents[{position}]")
            self._idem_index[label] = position

        idem_names = {f"e{label}" for label in self.idempotents}
        for index, decl in enumerate(self.generators):
            where = f"generators[{index}]"
            if not _NAME_PATTERN.match(decl.name):
                raise StructuralError(f"非法的生成元名称: {decl.name!r}", location=where)
            if decl.name in idem_names:
                raise StructuralError(f"生成元名称 {decl.name} 与幂等元记号冲突", location=where)
            if decl.name in self._gen_index:
                raise StructuralError(f"生成元名称重复: {decl.name}", location=where)
            for label in (decl.tail, decl.head):
                if label not in self._idem_index:
                    raise StructuralError(f"生成元 {decl.name} 引用了不存在的幂等元 {label}", location=where)
            if decl.kind not in (PLAIN, INVERTIBLE, NILPOTENT, FORMAL_INVERSE):
                raise StructuralError(f"未知的生成元种类: {decl.kind}", location=where)
            if decl.kind == NILPOTENT:
                if decl.tail != decl.head:
                    raise StructuralError(f"幂零生成元 {decl.name} 必须是环", location=where)
                if decl.order is None or decl.order < 2:
                    raise StructuralError(f"幂零生成元 {decl.name} 的阶数必须 ≥ 2", location=where)
                self._nilpotent[decl.name] = decl.order
            if decl.torsion is not None:
                if decl.kind != INVERTIBLE or decl.tail != decl.head:
                    raise StructuralError(f"挠关系只能加在可逆环上: {decl.name}", location=where)
                if decl.torsion < 1:
                    raise StructuralError(f"挠阶数必须 ≥ 1: {decl.name}", location=where)
                self._torsion[decl.name] = decl.torsion
            if decl.kind == FORMAL_INVERSE:
                if decl.at is None or decl.tail != decl.at or decl.head != decl.at:
                    raise StructuralError(f"形式逆 {decl.name} 必须是其幂等元处的环", location=where)
                if not decl.defining:
                    raise StructuralError(f"形式逆 {decl.name} 缺少定义元素", location=where)

            self._gen_index[decl.name] = index
            self._letters[decl.name] = Letter(decl.name, decl.name, 1, decl.tail, decl.head, index)
            if decl.kind == INVERTIBLE:
                inverse = decl.name + INVERSE_SUFFIX
                self._letters[inverse] = Letter(inverse, decl.name, -1, decl.head, decl.tail, index)

        outgoing: Dict[str, List[str]] = {label: [] for label in self.idempotents}
        for letter in self._letters.values():
            outgoing[letter.tail].append(letter.name)
        self._outgoing = {label: tuple(names) for label, names in outgoing.items()}
        self._letter_names = tuple(self._letters)

        for index, decl in enumerate(self.generators):
            if decl.kind != FORMAL_INVERSE:
                continue
            for coeff, word in decl.defining:
                if decl.name in word.letters:
                    raise StructuralError(f"形式逆 {decl.name} 的定义元素引用了自身",
                                          location=f"generators[{index}]")
                reduced = self.reduce(word.letters, word.idem)
                if reduced is None or self.word_tail(reduced) != decl.at or self.word_head(reduced) != decl.at:
                    raise StructuralError(
                        f"形式逆 {decl.name} 的定义元素不在 e_{decl.at} A e_{decl.at} 中",
                        location=f"generators[{index}]")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, AlgebraSpec):
            return NotImplemented
        return self._hash == other._hash and self.idempotents == other.idempotents \
            and self.generators == other.generators

    def __hash__(self):
        return self._hash

    def __repr__(self):
        names = ", ".join(f"{g.name}:{g.tail}->{g.head}" for g in self.generators)
        return f"AlgebraSpec(idempotents={list(self.idempotents)}, generators=[{names}])"

    # ------------------------------------------------------------------
    # 查询
    # ------------------------------------------------------------------
    def letter(self, name: str) -> Letter:
        try:
            return self._letters[name]
        except KeyError:
            raise StructuralError(f"未知的生成元: {name}") from None

    def generator(self, name: str) -> GeneratorDecl:
        try:
            return self.generators[self._gen_index[name]]
        except KeyError:
            raise StructuralError(f"未知的生成元: {name}") from None

    def has_idempotent(self, label) -> bool:
        return str(label) in self._idem_index

    def require_idempotent(self, label) -> str:
        label = str(label)
        if label not in self._idem_index:
            raise StructuralError(f"未知的幂等元: {label}")
        return label

    @property
    def letter_names(self) -> Tuple[str, ...]:
        return self._letter_names

    @property
    def generator_names(self) -> Tuple[str, ...]:
        return tuple(g.name for g in self.generators)

    def bracket_generators(self) -> Tuple[str, ...]:
        """双括号需要存值的生成元：除形式逆外的全部生成元（逆元由局部化规则导出）"""
        return tuple(g.name for g in self.generators if g.kind != FORMAL_INVERSE)

    @property
    def has_relations(self) -> bool:
        return any(g.kind != PLAIN for g in self.generators)

    @property
    def has_formal_inverses(self) -> bool:
        return any(g.kind == FORMAL_INVERSE for g in self.generators)

    def outgoing(self, label) -> Tuple[str, ...]:
        return self._outgoing[str(label)]

    def word_tail(self, word: Word) -> str:
        return self._letters[word.letters[0]].tail if word.letters else word.idem

    def word_head(self, word: Word) -> str:
        return self._letters[word.letters[-1]].head if word.letters else word.idem

    def word_key(self, word: Word):
        """规范排序键：(长度, 生成元下标序列, 符号序列, 幂等元下标)"""
        letters = [self._letters[name] for name in word.letters]
        return (
            len(letters),
            tuple(l.index for l in letters),
            tuple(0 if l.sign > 0 else 1 for l in letters),
            self._idem_index[word.idem] if word.idem is not None else -1,
        )

    def reachable(self, source, target) -> bool:
        """是否存在从 source 到 target 的路径（含长度为 0 的路径）"""
        if self._reach is None:
            reach = {}
            for label in self.idempotents:
                seen = {label}
                queue = deque([label])
                while queue:
                    current = queue.popleft()
                    for name in self._outgoing[current]:
                        nxt = self._letters[name].head
                        if nxt not in seen:
                            seen.add(nxt)
                            queue.append(nxt)
                reach[label] = frozenset(seen)
            self._reach = reach
        return str(target) in self._reach[str(source)]

    # ------------------------------------------------------------------
    # 规范化
    # ------------------------------------------------------------------
    def reduce(self, letters: Sequence[str], idem: Optional[str] = None) -> Optional[Word]:
        """
        把字母序列化为规范字；结果为 0 时返回 None

        - 相邻字母不可复合 → 0
        - g·g⁻¹、g⁻¹·g 消去为相应幂等元（栈式自由约化，到不动点）
        - 挠生成元：γ⁻¹ 改写为 γ^{n-1}，连续 n 个 γ 消去
        - 幂零生成元连续出现 k 次 → 0
        - 形式逆是原子，不做任何改写
        """
        key = (tuple(letters), idem)
        try:
            return self._reduce_cache[key]
        except KeyError:
            pass
        result = self._reduce(key[0], idem)
        self._reduce_cache[key] = result
        return result

    def _reduce(self, letters: Tuple[str, ...], idem: Optional[str]) -> Optional[Word]:
        if not letters:
            if idem is None or idem not in self._idem_index:
                raise StructuralError(f"空字必须带有合法的幂等元标签，得到 {idem!r}")
            return Word((), idem)
        first = self.letter(letters[0])
        stack: List[Letter] = []
        previous_head = None
        for name in letters:
            letter = self.letter(name)
            if previous_head is not None and previous_head != letter.tail:
                return None
            previous_head = letter.head
            torsion = self._torsion.get(letter.base)
            if torsion is not None and letter.sign < 0:
                base_letter = self._letters[letter.base]
                for _ in range(torsion - 1):
                    self._push(stack, base_letter, torsion)
            else:
                self._push(stack, letter, torsion)
        if not stack:
            return Word((), first.tail)
        if self._nilpotent and self._exceeds_nilpotency(stack):
            return None
        return Word(tuple(letter.name for letter in stack))

    @staticmethod
    def _push(stack: List[Letter], letter: Letter, torsion: Optional[int]):
        if stack and stack[-1].base == letter.base and stack[-1].sign == -letter.sign:
            stack.pop()
            return
        stack.append(letter)
        if torsion is not None and len(stack) >= torsion \
                and all(item.name == letter.name for item in stack[-torsion:]):
            del stack[-torsion:]

    def _exceeds_nilpotency(self, stack: List[Letter]) -> bool:
        run_name, run_length = None, 0
        for letter in stack:
            if letter.name == run_name:
                run_length += 1
            else:
                run_name, run_length = letter.name, 1
            order = self._nilpotent.get(letter.name)
            if order is not None and run_length >= order:
                return True
        return False

    def concat(self, first: Word, second: Word) -> Optional[Word]:
        """两个规范字的乘积（仍为规范字或 0）"""
        if not first.letters:
            if not second.letters:
                return first if first.idem == second.idem else None
            return second if self._letters[second.letters[0]].tail == first.idem else None
        if not second.letters:
            return first if self._letters[first.letters[-1]].head == second.idem else None
        return self.reduce(first.letters + second.letters)

    def subword(self, word: Word, start: int, stop: Optional[int] = None) -> Word:
        """规范字的连续片段仍是规范字，无需重新约化"""
        return Word(word.letters[start:stop])

    # ------------------------------------------------------------------
    # 元素构造
    # ------------------------------------------------------------------
    def zero(self) -> NCPoly:
        return NCPoly(self)

    def idempotent(self, label) -> NCPoly:
        return NCPoly._raw(self, {Word((), self.require_idempotent(label)): Fraction(1)})

    def unit(self) -> NCPoly:
        return NCPoly._raw(self, {Word((), label): Fraction(1) for label in self.idempotents})

    def scalar(self, value) -> NCPoly:
        return self.unit().scale(to_fraction(value))

    def gen(self, name: str) -> NCPoly:
        self.letter(name)
        return NCPoly._raw(self, {Word((name,)): Fraction(1)})

    def path(self, *letters: str) -> NCPoly:
        word = self.reduce(letters)
        return self.zero() if word is None else NCPoly._raw(self, {word: Fraction(1)})

    def word_element(self, word: Word, coeff=1) -> NCPoly:
        return NCPoly(self, {word: coeff})

    def defining_element(self, name: str) -> NCPoly:
        """形式逆生成元的定义元素 d（y = d⁻¹）"""
        cached = self._defining_cache.get(name)
        if cached is None:
            decl = self.generator(name)
            if decl.kind != FORMAL_INVERSE:
                raise StructuralError(f"{name} 不是形式逆生成元")
            terms: Dict[Word, Fraction] = {}
            for coeff, word in decl.defining:
                reduced = self.reduce(word.letters, word.idem)
                if reduced is not None:
                    _accumulate(terms, reduced, coeff)
            cached = NCPoly._raw(self, terms)
            self._defining_cache[name] = cached
        return cached

    def element(self, text) -> NCPoly:
        """
        解析形如 "1/2*s*t - e1 + t^-1 + 3" 的表达式

        因子：生成元名（可带 ^n 或 ^-n）、e<标签>、整数或分数；纯数字项乘以单位元。
        """
        if isinstance(text, NCPoly):
            return text
        if not isinstance(text, str):
            return self.scalar(text)
        result = self.zero()
        sign = 1
        factors: List[Union[Fraction, NCPoly]] = []
        pos = 0
        stripped = text.strip()
        if not stripped:
            raise StructuralError("空的元素表达式")
        while pos < len(stripped):
            match = _TOKEN.match(stripped, pos)
            if match is None or match.end() == pos:
                raise StructuralError(f"无法解析的表达式: {text!r}", location=f"offset {pos}")
            pos = match.end()
            if match.group("op") in ("+", "-"):
                if factors:
                    result = result + self._product(factors).scale(sign)
                    factors = []
                    sign = 1
                if match.group("op") == "-":
                    sign = -sign
            elif match.group("op") == "*":
                continue
            elif match.group("number") is not None:
                factors.append(to_fraction(match.group("number")))
            else:
                power = match.group("power")
                factors.append(self._factor(match.group("name"), None if power is None else int(power)))
        if not factors:
            raise StructuralError(f"表达式以运算符结尾: {text!r}")
        return result + self._product(factors).scale(sign)

    def _factor(self, name: str, power: Optional[int]) -> NCPoly:
        if name not in self._letters and name.startswith("e") and name[1:] in self._idem_index:
            return self.idempotent(name[1:])
        self.letter(name)
        if power is None:
            return self.gen(name)
        if power == 0:
            return self.idempotent(self._letters[name].tail)
        if power > 0:
            return self.path(*([name] * power))
        inverse = name + INVERSE_SUFFIX
        if inverse not in self._letters:
            raise StructuralError(f"生成元 {name} 不可逆，不能取负幂")
        return self.path(*([inverse] * (-power)))

    def _product(self, factors) -> NCPoly:
        coeff = Fraction(1)
        poly: Optional[NCPoly] = None
        for factor in factors:
            if isinstance(factor, Fraction):
                coeff *= factor
            else:
                poly = factor if poly is None else poly * factor
        if poly is None:
            poly = self.unit()
        return poly.scale(coeff)

    def pair(self, left, right, coeff=1) -> Tensor2:
        """left ⊗ right，两侧可以是表达式字符串或 NCPoly"""
        return tensor2(self.element(left), self.element(right)).scale(to_fraction(coeff))

    def triple(self, first, second, third, coeff=1) -> Tensor3:
        return tensor3(self.element(first), self.element(second), self.element(third)).scale(to_fraction(coeff))

    # ------------------------------------------------------------------
    # 字的文本形式
    # ------------------------------------------------------------------
    def format_word(self, word: Word) -> str:
        if not word.letters:
            return f"e{word.idem}"
        return "*".join(word.letters)

    def word_to_list(self, word: Word) -> List[str]:
        return [f"e{word.idem}"] if not word.letters else list(word.letters)

    def word_from_list(self, items: Sequence[str], location=None) -> Optional[Word]:
        """JSON 中的字：["t", "s^-1"] 或 ["e1"]；不可复合时返回 None"""
        if not isinstance(items, (list, tuple)) or not items:
            raise StructuralError("字必须是非空的字符串数组", location=location)
        if len(items) == 1 and items[0] not in self._letters and str(items[0]).startswith("e") \
                and str(items[0])[1:] in self._idem_index:
            return Word((), str(items[0])[1:])
        for item in items:
            if item not in self._letters:
                raise StructuralError(f"未知的生成元: {item}", location=location)
        return self.reduce(tuple(items))

    # ------------------------------------------------------------------
    # 随机抽样
    # ------------------------------------------------------------------
    def random_word(self, rng: random.Random, max_length: int) -> Optional[Word]:
        """沿箭头随机游走得到一个可复合的字；约化后可能变短或为 0"""
        length = rng.randint(0, max_length)
        if length == 0 or not self._letter_names:
            return Word((), rng.choice(self.idempotents))
        letters = [rng.choice(self._letter_names)]
        for _ in range(length - 1):
            options = self._outgoing[self._letters[letters[-1]].head]
            if not options:
                break
            letters.append(rng.choice(options))
        return self.reduce(letters)

    def random_element(self, rng: random.Random, max_length: int, terms: int = 2,
                       coefficient_range: int = 3) -> NCPoly:
        result: Dict[Word, Fraction] = {}
        for _ in range(terms):
            word = self.random_word(rng, max_length)
            if word is None:
                continue
            numerator = rng.choice([k for k in range(-coefficient_range, coefficient_range + 1) if k])
            _accumulate(result, word, Fraction(numerator, rng.randint(1, 2)))
        return NCPoly._raw(self, result)

    # ------------------------------------------------------------------
    # 改名与直和
    # ------------------------------------------------------------------
    def renamed(self, idempotents: Optional[Mapping] = None,
                generators: Optional[Mapping[str, str]] = None) -> Tuple["AlgebraSpec", "WordMap"]:
        """按映射改写幂等元标签和生成元名，返回新代数与对应的字映射"""
        idem_map = {str(k): str(v) for k, v in (idempotents or {}).items()}
        gen_map = dict(generators or {})
        for label in idem_map:
            self.require_idempotent(label)
        for name in gen_map:
            self.generator(name)
        decls = [_rename_decl(decl, gen_map, idem_map) for decl in self.generators]
        target = AlgebraSpec([idem_map.get(s, s) for s in self.idempotents], decls)
        return target, WordMap(self, target, gen_map, idem_map)

    def relabel_idempotents(self, mapping: Mapping) -> Tuple["AlgebraSpec", "WordMap"]:
        return self.renamed(idempotents=mapping)

    def rename_generators(self, mapping: Mapping[str, str]) -> Tuple["AlgebraSpec", "WordMap"]:
        return self.renamed(generators=mapping)

    def reordered(self, idempotents: Optional[Sequence] = None,
                  generators: Optional[Sequence[str]] = None) -> Tuple["AlgebraSpec", "WordMap"]:
        """只调整幂等元与生成元的声明顺序（恒等同构）"""
        labels = [str(s) for s in (idempotents or self.idempotents)]
        if sorted(labels) != sorted(self.idempotents):
            raise StructuralError(f"重排的幂等元集合不一致: {labels}")
        names = list(generators or self.generator_names)
        if sorted(names) != sorted(self.generator_names):
            raise StructuralError(f"重排的生成元集合不一致: {names}")
        target = AlgebraSpec(labels, [self.generator(name) for name in names])
        return target, WordMap(self, target)

    def direct_sum(self, other: "AlgebraSpec") -> "AlgebraSpec":
        """A ⊕ A'：幂等元与生成元不交并（名称冲突视为结构错误）"""
        return AlgebraSpec(self.idempotents + other.idempotents, self.generators + other.generators)


def _rename_letter(name: str, gen_map: Mapping[str, str]) -> str:
    if name in gen_map:
        return gen_map[name]
    if name.endswith(INVERSE_SUFFIX):
        base = name[:-len(INVERSE_SUFFIX)]
        return gen_map.get(base, base) + INVERSE_SUFFIX
    return name


def _rename_word(word: Word, gen_map: Mapping[str, str], idem_map: Mapping[str, str]) -> Word:
    if not word.letters:
        return Word((), idem_map.get(word.idem, word.idem))
    return Word(tuple(_rename_letter(name, gen_map) for name in word.letters))


def _rename_decl(decl: GeneratorDecl, gen_map, idem_map) -> GeneratorDecl:
    return GeneratorDecl(
        name=gen_map.get(decl.name, decl.name),
        tail=idem_map.get(decl.tail, decl.tail),
        head=idem_map.get(decl.head, decl.head),
        kind=decl.kind,
        order=decl.order,
        torsion=decl.torsion,
        at=None if decl.at is None else idem_map.get(decl.at, decl.at),
        defining=tuple((c, _rename_word(w, gen_map, idem_map)) for c, w in decl.defining),
    )


def _accumulate(target: dict, key, coeff: Fraction):
    value = target.get(key, 0) + coeff
    if value:
        target[key] = value
    else:
        target.pop(key, None)


class WordMap:
    """逐字母改名、逐标签改写的代数映射（改名同构与融合映射 φ 都用它）"""

    def __init__(self, source: AlgebraSpec, target: AlgebraSpec,
                 letter_map: Optional[Mapping[str, str]] = None,
                 idem_map: Optional[Mapping[str, str]] = None):
        self.source = source
        self.target = target
        self.letter_map = dict(letter_map or {})
        self.idem_map = {str(k): str(v) for k, v in (idem_map or {}).items()}

    def word(self, word: Word) -> Optional[Word]:
        renamed = _rename_word(word, self.letter_map, self.idem_map)
        return self.target.reduce(renamed.letters, renamed.idem)

    def letter(self, name: str) -> str:
        return _rename_letter(name, self.letter_map)

    def __call__(self, value):
        if isinstance(value, NCPoly):
            cls, mapper = NCPoly, lambda key: self.word(key)
        elif isinstance(value, Tensor2):
            cls, mapper = Tensor2, lambda key: _map_tuple(self.word, key)
        elif isinstance(value, Tensor3):
            cls, mapper = Tensor3, lambda key: _map_tuple(self.word, key)
        else:
            raise StructuralError(f"无法映射的对象: {type(value).__name__}")
        terms: Dict = {}
        for key, coeff in value.terms.items():
            image = mapper(key)
            if image is not None:
                _accumulate(terms, image, coeff)
        return cls._raw(self.target, terms)


def _map_tuple(word_fn, key):
    images = tuple(word_fn(w) for w in key)
    return None if any(w is None for w in images) else images


# ----------------------------------------------------------------------
# 线性组合
# ----------------------------------------------------------------------
class _Combination:
    """规范键上的稀疏有理线性组合，构造后不可变"""

    __slots__ = ("algebra", "_terms", "_hash")
    _arity = 1

    def __init__(self, algebra: AlgebraSpec, terms: Optional[Mapping] = None):
        self.algebra = algebra
        clean = {}
        for key, coeff in (terms or {}).items():
            value = to_fraction(coeff)
            if value:
                clean[key] = value
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, algebra, terms: dict):
        obj = cls.__new__(cls)
        obj.algebra = algebra
        obj._terms = terms
        obj._hash = None
        return obj

    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def _sort_key(self, key):
        raise NotImplementedError

    def items(self) -> List[Tuple]:
        """按规范顺序排列的 (键, 系数)"""
        return sorted(self._terms.items(), key=lambda item: self._sort_key(item[0]))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _check(self, other):
        if type(other) is not type(self):
            raise StructuralError(f"不能把 {type(other).__name__} 与 {type(self).__name__} 相加")
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise StructuralError("不同代数上的元素不能直接运算")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool) and other == 0:
            return not self._terms
        if type(other) is not type(self):
            return NotImplemented
        return (other.algebra is self.algebra or other.algebra == self.algebra) and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, frozenset(self._terms.items())))
        return self._hash

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            _accumulate(terms, key, coeff)
        return self._raw(self.algebra, terms)

    def __radd__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return self._raw(self.algebra, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        return self + (-other)

    def scale(self, value):
        value = to_fraction(value)
        if not value:
            return self._raw(self.algebra, {})
        if value == 1:
            return self
        return self._raw(self.algebra, {k: c * value for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, str)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, str)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def has_formal_inverse(self) -> bool:
        formal = {g.name for g in self.algebra.generators if g.kind == FORMAL_INVERSE}
        if not formal:
            return False
        return any(name in formal for key in self._terms for word in self._words(key) for name in word.letters)

    def has_inverse_letters(self) -> bool:
        return any(name.endswith(INVERSE_SUFFIX) for key in self._terms
                   for word in self._words(key) for name in word.letters)

    def _words(self, key) -> Tuple[Word, ...]:
        return key

    def _format_key(self, key) -> str:
        return " ⊗ ".join(self.algebra.format_word(w) for w in self._words(key))

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for key, coeff in self.items():
            body = self._format_key(key)
            if self._arity > 1:
                body = f"({body})"
            magnitude = abs(coeff)
            text = body if magnitude == 1 else f"{format_fraction(magnitude)}*{body}"
            parts.append(("- " if coeff < 0 else "+ ") + text)
        joined = " ".join(parts)
        return joined[2:] if joined.startswith("+ ") else "-" + joined[2:]

    def __repr__(self):
        return f"{type(self).__name__}({self})"


class NCPoly(_Combination):
    """A 中的元素：规范字 → 非零有理系数"""

    __slots__ = ()
    _arity = 1

    def _sort_key(self, key):
        return self.algebra.word_key(key)

    def _words(self, key):
        return (key,)

    def words(self) -> List[Word]:
        return [w for w, _ in self.items()]

    def __mul__(self, other):
        if isinstance(other, NCPoly):
            return mul(self, other)
        return super().__mul__(other)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise StructuralError("NCPoly 只支持非负整数次幂")
        result = self.algebra.unit()
        for _ in range(exponent):
            result = result * self
        return result

    def is_typed(self, tail: str, head: str) -> bool:
        return all(self.algebra.word_tail(w) == tail and self.algebra.word_head(w) == head for w in self._terms)

    def compress(self, left: Optional[str], right: Optional[str]) -> "NCPoly":
        """e_left · p · e_right（None 表示不做这一侧的压缩）"""
        A = self.algebra
        return NCPoly._raw(A, {w: c for w, c in self._terms.items()
                               if (left is None or A.word_tail(w) == left)
                               and (right is None or A.word_head(w) == right)})

    def tensor(self, other: "NCPoly") -> "Tensor2":
        return tensor2(self, other)


class Tensor2(_Combination):
    """A⊗A 中的元素：(字, 字) → 非零有理系数"""

    __slots__ = ()
    _arity = 2

    def _sort_key(self, key):
        return (self.algebra.word_key(key[0]), self.algebra.word_key(key[1]))

    def flip(self) -> "Tensor2":
        return Tensor2._raw(self.algebra, {(b, a): c for (a, b), c in self._terms.items()})

    def outer_act(self, left=None, right=None) -> "Tensor2":
        return outer_act(left, self, right)

    def inner_act(self, left=None, right=None) -> "Tensor2":
        return inner_act(left, self, right)

    def tensor(self, other: NCPoly) -> "Tensor3":
        """d ⊗ p"""
        self._check_poly(other)
        terms: Dict = {}
        for (a, b), c in self._terms.items():
            for w, k in other._terms.items():
                _accumulate(terms, (a, b, w), c * k)
        return Tensor3._raw(self.algebra, terms)

    def _check_poly(self, other):
        if not isinstance(other, NCPoly):
            raise StructuralError(f"期望 NCPoly，得到 {type(other).__name__}")
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise StructuralError("不同代数上的元素不能直接运算")

    def is_typed(self, tail1, head1, tail2, head2) -> bool:
        A = self.algebra
        return all(A.word_tail(a) == tail1 and A.word_head(a) == head1
                   and A.word_tail(b) == tail2 and A.word_head(b) == head2 for a, b in self._terms)

    def first_factors(self) -> List[Tuple[Word, Word, Fraction]]:
        return [(a, b, c) for (a, b), c in self.items()]


class Tensor3(_Combination):
    """A⊗A⊗A 中的元素：(字, 字, 字) → 非零有理系数"""

    __slots__ = ()
    _arity = 3

    def _sort_key(self, key):
        return tuple(self.algebra.word_key(w) for w in key)

    def tau(self, power: int = 1) -> "Tensor3":
        """τ(123)^power，τ(x⊗y⊗z) = z⊗x⊗y"""
        power %= 3
        if power == 0:
            return self
        terms = {}
        for key, c in self._terms.items():
            x, y, z = key
            terms[(z, x, y) if power == 1 else (y, z, x)] = c
        return Tensor3._raw(self.algebra, terms)


# ----------------------------------------------------------------------
# 模块级运算
# ----------------------------------------------------------------------
def normalize(word: Word, algebra: AlgebraSpec) -> NCPoly:
    """规范化一个（可能未约化的）字，结果是单项式或 0"""
    reduced = algebra.reduce(word.letters, word.idem)
    return algebra.zero() if reduced is None else NCPoly._raw(algebra, {reduced: Fraction(1)})


def mul(p: NCPoly, q: NCPoly) -> NCPoly:
    if p.algebra is not q.algebra and p.algebra != q.algebra:
        raise StructuralError("不同代数上的元素不能相乘")
    A = p.algebra
    terms: Dict[Word, Fraction] = {}
    for w1, c1 in p._terms.items():
        for w2, c2 in q._terms.items():
            w = A.concat(w1, w2)
            if w is not None:
                _accumulate(terms, w, c1 * c2)
    return NCPoly._raw(A, terms)


def tensor2(p: NCPoly, q: NCPoly) -> Tensor2:
    terms: Dict = {}
    for a, c1 in p._terms.items():
        for b, c2 in q._terms.items():
            _accumulate(terms, (a, b), c1 * c2)
    return Tensor2._raw(p.algebra, terms)


def tensor3(p: NCPoly, q: NCPoly, r: NCPoly) -> Tensor3:
    terms: Dict = {}
    for a, c1 in p._terms.items():
        for b, c2 in q._terms.items():
            for c, c3 in r._terms.items():
                _accumulate(terms, (a, b, c), c1 * c2 * c3)
    return Tensor3._raw(p.algebra, terms)


def _factor_terms(factor) -> Optional[Dict[Word, Fraction]]:
    """None 或 1 表示单位元（不作用）；数字视为单位元的倍数；NCPoly 直接取项"""
    if factor is None:
        return None
    if isinstance(factor, NCPoly):
        return factor._terms
    raise StructuralError(f"双模作用的因子必须是 NCPoly，得到 {type(factor).__name__}")


def _scalar_of(factor) -> Fraction:
    if factor is None or isinstance(factor, NCPoly):
        return Fraction(1)
    return to_fraction(factor)


def outer_act(left, d: Tensor2, right) -> Tensor2:
    """外双模作用 a·d·b = (a d′) ⊗ (d″ b)"""
    return _act(left, d, right, outer=True)


def inner_act(left, d: Tensor2, right) -> Tensor2:
    """内双模作用 a∗d∗b = (d′ b) ⊗ (a d″)"""
    return _act(left, d, right, outer=False)


def _act(left, d: Tensor2, right, outer: bool) -> Tensor2:
    A = d.algebra
    scale = Fraction(1)
    if not isinstance(left, NCPoly):
        scale *= _scalar_of(left)
        left = None
    if not isinstance(right, NCPoly):
        scale *= _scalar_of(right)
        right = None
    left_terms = _factor_terms(left)
    right_terms = _factor_terms(right)
    unit = {None: Fraction(1)}
    terms: Dict = {}
    for (a, b), c in d._terms.items():
        for lw, lc in (unit if left_terms is None else left_terms).items():
            for rw, rc in (unit if right_terms is None else right_terms).items():
                if outer:
                    x = a if lw is None else A.concat(lw, a)
                    y = b if rw is None else A.concat(b, rw)
                else:
                    x = a if rw is None else A.concat(a, rw)
                    y = b if lw is None else A.concat(lw, b)
                if x is None or y is None:
                    continue
                _accumulate(terms, (x, y), c * lc * rc * scale)
    return Tensor2._raw(A, terms)


def flip(d: Tensor2) -> Tensor2:
    return d.flip()


def tau(t: Tensor3, power: int = 1) -> Tensor3:
    return t.tau(power)


def tensor_eq(u, v) -> bool:
    """规范稀疏表示的精确相等；0 与任何零组合相等"""
    if isinstance(v, int) and v == 0:
        return u.is_zero()
    if isinstance(u, int) and u == 0:
        return v.is_zero()
    return u == v


def iter_terms(value) -> Iterator[Tuple[Tuple[Word, ...], Fraction]]:
    """以元组形式统一遍历 NCPoly / Tensor2 / Tensor3 的项（按规范顺序）"""
    for key, coeff in value.items():
        yield ((key,) if isinstance(value, NCPoly) else key), coeff
