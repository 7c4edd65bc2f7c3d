# -*- encoding: UTF-8 -*-
"""
表示空间 Rep(A, α)

坐标环 𝒪(Rep(A,α)) 用 sympy 的稀疏多项式环（系数域 QQ）表示：每个字母 ℓ
（含可逆生成元的逆字母和形式逆）对应一块 x(ℓ,i,j) 变量，i 取尾顶点的块、j 取头顶点的块。
这样诱导括号 {a_ij, b_kl} = ⟪a,b⟫′_{kj}⟪a,b⟫″_{il} 在字母上直接取值，并按双导子延拓到任意多项式。

恒等式先作为多项式检查；代数带关系（逆、幂零、挠、形式逆）而多项式残差非零时，
再在种子化的精确有理点上求值复查。点上的矩阵用 sympy Matrix，指标数组用 numpy object 数组。

下标一律从 0 开始。
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import Matrix, Rational, Symbol, zeros
from sympy.combinatorics.permutations import Permutation
from sympy.polys.domains import QQ
from sympy.polys.rings import ring as poly_ring

from .algebra import (
    FORMAL_INVERSE,
    INVERSE_SUFFIX,
    INVERTIBLE,
    NILPOTENT,
    AlgebraSpec,
    NCPoly,
    Tensor2,
    Tensor3,
    Word,
    to_fraction,
)
from .brackets import (
    CheckReport,
    DoubleBracketSpec,
    MomentMapSpec,
    differential_triple,
    eval_double,
    gauge_element,
    moment_map_rhs,
    qp_anomaly,
    triple_bracket,
    zero_bracket,
)
from .exceptions import DeferToNumericError, SingularPointError, StructuralError
from .logger_config import LoggerMixin, get_logger, log_check_operation

logger = get_logger('dqp_framework.representation')

IndexPair = Tuple[int, int]
Variable = Tuple[str, int, int]


def representation_defaults(trials=None, seed=None, entry_range=None, samples=None,
                            exhaustive_max_dim=None, max_resample=None) -> dict:
    """表示空间检查的参数：显式参数优先，其余取自 config.yaml"""
    import settings

    config = settings.get_config()
    section = config.get('representation', {})
    pick = lambda value, key, default: section.get(key, default) if value is None else value
    return {
        "trials": pick(trials, 'trials', 5),
        "seed": config.get('seed', 42) if seed is None else seed,
        "entry_range": pick(entry_range, 'entry_range', 3),
        "samples": pick(samples, 'sample_index_tuples', 200),
        "exhaustive_max_dim": pick(exhaustive_max_dim, 'exhaustive_max_dim', 3),
        "max_resample": pick(max_resample, 'max_resample', 50),
    }


# ----------------------------------------------------------------------
# 维数向量
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DimVector:
    """α：幂等元标签 → 正整数，按代数中幂等元的声明顺序排列"""
    entries: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        for label, size in self.entries:
            if not isinstance(size, int) or isinstance(size, bool) or size < 1:
                raise StructuralError(f"维数向量的分量必须是正整数: {label}={size!r}", location="dim")

    @classmethod
    def of(cls, algebra: AlgebraSpec, spec: Union["DimVector", Mapping, str, int]) -> "DimVector":
        """
        从映射、"1:2,2:1" 形式的字符串或整数（所有顶点同一维数）构造

        标签必须与代数的幂等元完全一致。
        """
        if isinstance(spec, DimVector):
            values = dict(spec.entries)
        elif isinstance(spec, int) and not isinstance(spec, bool):
            values = {label: spec for label in algebra.idempotents}
        elif isinstance(spec, str):
            values = {}
            for chunk in spec.split(","):
                label, sep, size = chunk.partition(":")
                if not sep:
                    raise StructuralError(f"无法解析的维数向量: {spec!r}", location="dim")
                try:
                    values[label.strip()] = int(size)
                except ValueError:
                    raise StructuralError(f"无法解析的维数向量: {spec!r}", location="dim") from None
        elif isinstance(spec, Mapping):
            values = {str(k): v for k, v in spec.items()}
        else:
            raise StructuralError(f"无法识别的维数向量: {spec!r}", location="dim")
        if set(values) != set(algebra.idempotents):
            raise StructuralError(
                f"维数向量的标签 {sorted(values)} 与幂等元 {list(algebra.idempotents)} 不一致", location="dim")
        return cls(tuple((label, values[label]) for label in algebra.idempotents))

    @property
    def N(self) -> int:
        return sum(size for _, size in self.entries)

    def __getitem__(self, label) -> int:
        return dict(self.entries)[str(label)]

    def block(self, label) -> range:
        offset = 0
        for name, size in self.entries:
            if name == str(label):
                return range(offset, offset + size)
            offset += size
        raise StructuralError(f"未知的幂等元: {label}", location="dim")

    def to_dict(self) -> Dict[str, int]:
        return dict(self.entries)

    def __str__(self):
        return ",".join(f"{label}:{size}" for label, size in self.entries)


# ----------------------------------------------------------------------
# 坐标环
# ----------------------------------------------------------------------
class CoordinateRing(LoggerMixin):
    """
    字母变量生成的多项式环

    Attributes:
        ring: sympy PolyRing（QQ 上）
        variables: 变量编号 → (字母, i, j)
    """

    def __init__(self, algebra: AlgebraSpec, dim: DimVector):
        self.algebra = algebra
        self.dim = dim
        self.N = dim.N
        self.variables: List[Variable] = []
        self._index: Dict[Variable, int] = {}
        for name in algebra.letter_names:
            letter = algebra.letter(name)
            for i in dim.block(letter.tail):
                for j in dim.block(letter.head):
                    self._index[(name, i, j)] = len(self.variables)
                    self.variables.append((name, i, j))
        symbols = [Symbol(f"{name}[{i},{j}]") for name, i, j in self.variables] or [Symbol("_unit")]
        created = poly_ring(symbols, QQ)
        self.ring, self.gens = created[0], created[1:]
        self._word_cache: Dict[Word, np.ndarray] = {}
        self.log_debug(f"坐标环: α = {dim}, 变量数 {len(self.variables)}")

    # 元素
    @property
    def zero(self):
        return self.ring.zero

    def constant(self, value):
        value = to_fraction(value)
        return self.ring.ground_new(QQ(value.numerator, value.denominator))

    def variable(self, name: str, i: int, j: int):
        index = self._index.get((name, i, j))
        return self.ring.zero if index is None else self.gens[index]

    def entries(self, name: str) -> List[IndexPair]:
        """字母 name 的非零坐标位置"""
        letter = self.algebra.letter(name)
        return [(i, j) for i in self.dim.block(letter.tail) for j in self.dim.block(letter.head)]

    def support(self, f) -> List[int]:
        """f 中出现的变量编号"""
        used = set()
        for monom in f.monoms():
            used.update(index for index, power in enumerate(monom) if power)
        return sorted(used)

    def derivative(self, f, index: int):
        return f.diff(self.gens[index])

    # 矩阵
    def _empty(self) -> np.ndarray:
        matrix = np.empty((self.N, self.N), dtype=object)
        for i in range(self.N):
            for j in range(self.N):
                matrix[i, j] = self.ring.zero
        return matrix

    def idempotent_matrix(self, label) -> np.ndarray:
        matrix = self._empty()
        for i in self.dim.block(label):
            matrix[i, i] = self.ring.one
        return matrix

    def letter_matrix(self, name: str) -> np.ndarray:
        matrix = self._empty()
        for i, j in self.entries(name):
            matrix[i, j] = self.variable(name, i, j)
        return matrix

    def word_matrix(self, word: Word) -> np.ndarray:
        cached = self._word_cache.get(word)
        if cached is None:
            if not word.letters:
                cached = self.idempotent_matrix(word.idem)
            else:
                cached = self.letter_matrix(word.letters[0])
                for name in word.letters[1:]:
                    cached = cached.dot(self.letter_matrix(name))
            self._word_cache[word] = cached
        return cached

    def matrix(self, a: NCPoly) -> np.ndarray:
        """𝒳(a)：逐字的矩阵乘积按系数求和"""
        result = self._empty()
        for word, coeff in a.items():
            result = result + self.word_matrix(word) * self.constant(coeff)
        return result

    def tensor_entry(self, t: Union[Tensor2, Tensor3], indices: Sequence[IndexPair]):
        """t_{(p₁q₁),(p₂q₂),…} = Σ c·𝒳(x₁)_{p₁q₁}𝒳(x₂)_{p₂q₂}…"""
        total = self.ring.zero
        for key, coeff in t.items():
            term = self.constant(coeff)
            for word, (p, q) in zip(key, indices):
                entry = self.word_matrix(word)[p, q]
                if not entry:
                    term = self.ring.zero
                    break
                term = term * entry
            total = total + term
        return total

    # 求值
    def evaluate(self, f, values: Sequence[Rational]) -> Rational:
        total = Rational(0)
        for monom, coeff in f.terms():
            term = QQ.to_sympy(coeff)
            for index, power in enumerate(monom):
                if power:
                    term *= values[index] ** power
            total += term
        return total


@lru_cache(maxsize=32)
def coordinate_ring(algebra: AlgebraSpec, dim: DimVector) -> CoordinateRing:
    return CoordinateRing(algebra, dim)


def _reject_formal_inverse(a: NCPoly):
    if a.has_formal_inverse():
        raise DeferToNumericError("元素含形式逆，不能写成坐标多项式")


def coord_matrix(a: NCPoly, dim) -> np.ndarray:
    """𝒳(a)，元素为坐标多项式的 N×N numpy object 数组"""
    _reject_formal_inverse(a)
    dim = DimVector.of(a.algebra, dim)
    return coordinate_ring(a.algebra, dim).matrix(a)


def trace_function(a: NCPoly, dim):
    """tr 𝒳(a)"""
    matrix = coord_matrix(a, dim)
    ring = coordinate_ring(a.algebra, DimVector.of(a.algebra, dim))
    total = ring.zero
    for i in range(ring.N):
        total = total + matrix[i, i]
    return total


# ----------------------------------------------------------------------
# 诱导括号
# ----------------------------------------------------------------------
class InducedBracket:
    """坐标环上的反对称双导子 {-,-}，由字母对上的值延拓"""

    def __init__(self, br: DoubleBracketSpec, coords: CoordinateRing):
        if coords.algebra != br.algebra:
            raise StructuralError("坐标环与双括号不在同一代数上")
        self.br = br
        self.coords = coords
        self._tensors: Dict[Tuple[str, str], Tensor2] = {}
        self._pairs: Dict[Tuple[int, int], object] = {}

    def letter_tensor(self, g: str, h: str) -> Tensor2:
        key = (g, h)
        if key not in self._tensors:
            A = self.br.algebra
            self._tensors[key] = eval_double(self.br, A.gen(g), A.gen(h))
        return self._tensors[key]

    def on_variables(self, first: int, second: int):
        """{x(g,i,j), x(h,k,l)} = ⟪g,h⟫′_{kj} ⟪g,h⟫″_{il}"""
        key = (first, second)
        if key not in self._pairs:
            g, i, j = self.coords.variables[first]
            h, k, l = self.coords.variables[second]
            self._pairs[key] = self.coords.tensor_entry(self.letter_tensor(g, h), [(k, j), (i, l)])
        return self._pairs[key]

    def __call__(self, f, g):
        """{f, g} = Σ ∂f/∂p · ∂g/∂q · {p, q}"""
        coords = self.coords
        total = coords.zero
        g_support = coords.support(g)
        if not g_support:
            return total
        g_parts = [(q, coords.derivative(g, q)) for q in g_support]
        for p in coords.support(f):
            df = coords.derivative(f, p)
            for q, dg in g_parts:
                value = self.on_variables(p, q)
                if value:
                    total = total + df * dg * value
        return total

    def variable(self, name: str, i: int, j: int):
        return self.coords.variable(name, i, j)

    def jacobiator(self, f, g, h):
        """Jac(f,g,h) = {f,{g,h}} + {g,{h,f}} + {h,{f,g}}"""
        return self(f, self(g, h)) + self(g, self(h, f)) + self(h, self(f, g))


def induced_bracket(br: DoubleBracketSpec, dim, first, second):
    """
    {f, g}：参数可以是 (字母, i, j) 三元组，也可以是坐标多项式

    例如 ⟪t,t⟫ = ½(t²⊗1 - 1⊗t²) 给出 {t_ij, t_kl} = ½(t²)_{kj}δ_{il} - ½δ_{kj}(t²)_{il}。
    """
    dim = DimVector.of(br.algebra, dim)
    bracket = InducedBracket(br, coordinate_ring(br.algebra, dim))

    def lift(value):
        if isinstance(value, tuple):
            name, i, j = value
            return bracket.variable(name, i, j)
        return value

    return bracket(lift(first), lift(second))


# ----------------------------------------------------------------------
# 表示空间中的点
# ----------------------------------------------------------------------
@dataclass
class RepPoint:
    """每个字母一个 N×N 有理矩阵；逆字母与形式逆取对应的逆矩阵"""
    algebra: AlgebraSpec
    dim: DimVector
    assignment: Dict[str, Matrix]
    seed: int

    def idempotent_matrix(self, label) -> Matrix:
        matrix = zeros(self.dim.N, self.dim.N)
        for i in self.dim.block(label):
            matrix[i, i] = 1
        return matrix

    def word_matrix(self, word: Word) -> Matrix:
        if not word.letters:
            return self.idempotent_matrix(word.idem)
        result = self.assignment[word.letters[0]]
        for name in word.letters[1:]:
            result = result * self.assignment[name]
        return result

    def element_matrix(self, a: NCPoly) -> Matrix:
        result = zeros(self.dim.N, self.dim.N)
        for word, coeff in a.items():
            result += self.word_matrix(word) * Rational(coeff.numerator, coeff.denominator)
        return result

    def variable_values(self, coords: CoordinateRing) -> List[Rational]:
        return [self.assignment[name][i, j] for name, i, j in coords.variables] or [Rational(0)]


def _embed(dim: DimVector, row_label, col_label, block: Matrix) -> Matrix:
    matrix = zeros(dim.N, dim.N)
    rows, cols = dim.block(row_label), dim.block(col_label)
    matrix[rows.start:rows.stop, cols.start:cols.stop] = block
    return matrix


def _extract(dim: DimVector, matrix: Matrix, row_label, col_label) -> Matrix:
    rows, cols = dim.block(row_label), dim.block(col_label)
    return matrix[rows.start:rows.stop, cols.start:cols.stop]


def _inverse(block: Matrix, what: str) -> Matrix:
    if block.det() == 0:
        raise SingularPointError(f"{what} 在采样点上不可逆")
    return block.inv()


def _random_block(rng: random.Random, rows: int, cols: int, entry_range: int) -> Matrix:
    return Matrix(rows, cols, lambda i, j: rng.randint(-entry_range, entry_range))


def _random_invertible(rng: random.Random, size: int, entry_range: int, attempts: int) -> Matrix:
    for _ in range(attempts):
        block = _random_block(rng, size, size, entry_range)
        if block.det() != 0:
            return block
    raise SingularPointError(f"{attempts} 次内未采到可逆的 {size}×{size} 矩阵")


def _nilpotent_block(rng: random.Random, size: int, order: int, entry_range: int, attempts: int) -> Matrix:
    """共轭后的分块严格上三角矩阵，每块不超过 order，因此 X^order = 0"""
    upper = zeros(size, size)
    start = 0
    while start < size:
        chunk = min(order, size - start)
        for i in range(start, start + chunk):
            for j in range(i + 1, start + chunk):
                upper[i, j] = rng.randint(-entry_range, entry_range)
        start += chunk
    conjugator = _random_invertible(rng, size, entry_range, attempts)
    return conjugator * upper * conjugator.inv()


def _torsion_block(rng: random.Random, size: int, order: int, entry_range: int, attempts: int) -> Matrix:
    """共轭后的置换矩阵，各轮换长度整除 order，因此 X^order = 1"""
    divisors = [d for d in range(1, order + 1) if order % d == 0]
    permutation = list(range(size))
    start = 0
    while start < size:
        length = rng.choice([d for d in divisors if d <= size - start])
        cycle = list(range(start, start + length))
        for position, value in enumerate(cycle):
            permutation[value] = cycle[(position + 1) % length]
        start += length
    shuffle = zeros(size, size)
    for i, j in enumerate(permutation):
        shuffle[j, i] = 1
    conjugator = _random_invertible(rng, size, entry_range, attempts)
    return conjugator * shuffle * conjugator.inv()


def _sample_point(A: AlgebraSpec, dim: DimVector, rng: random.Random, entry_range: int, attempts: int,
                  seed: int) -> RepPoint:
    assignment: Dict[str, Matrix] = {}
    formal = []
    for decl in A.generators:
        if decl.kind == FORMAL_INVERSE:
            formal.append(decl)
            continue
        rows, cols = dim[decl.tail], dim[decl.head]
        if decl.kind == INVERTIBLE:
            if rows != cols:
                raise StructuralError(f"可逆生成元 {decl.name} 要求尾、头顶点维数相同", location="dim")
            if decl.torsion is not None:
                block = _torsion_block(rng, rows, decl.torsion, entry_range, attempts)
            else:
                block = _random_block(rng, rows, cols, entry_range)
            assignment[decl.name] = _embed(dim, decl.tail, decl.head, block)
            inverse = _inverse(block, decl.name)
            assignment[decl.name + INVERSE_SUFFIX] = _embed(dim, decl.head, decl.tail, inverse)
        elif decl.kind == NILPOTENT:
            block = _nilpotent_block(rng, rows, decl.order, entry_range, attempts)
            assignment[decl.name] = _embed(dim, decl.tail, decl.head, block)
        else:
            assignment[decl.name] = _embed(dim, decl.tail, decl.head, _random_block(rng, rows, cols, entry_range))

    point = RepPoint(A, dim, assignment, seed)
    pending = list(formal)
    while pending:
        progressed = False
        for decl in list(pending):
            defining = A.defining_element(decl.name)
            if any(letter not in assignment for word in defining.words() for letter in word.letters):
                continue
            block = _extract(dim, point.element_matrix(defining), decl.at, decl.at)
            assignment[decl.name] = _embed(dim, decl.at, decl.at, _inverse(block, f"{decl.name} 的定义元素"))
            pending.remove(decl)
            progressed = True
        if not progressed:
            raise StructuralError(f"形式逆的定义元素存在循环依赖: {[d.name for d in pending]}")
    return point


def random_rep_point(A: AlgebraSpec, dim, seed: Optional[int] = None, entry_range: Optional[int] = None,
                     max_resample: Optional[int] = None) -> RepPoint:
    """
    种子化的随机点：普通字母取块内均匀整数，可逆字母取可逆块（挠生成元取共轭置换矩阵），
    幂零字母取共轭严格上三角块，形式逆取定义元素之逆；遇到奇异矩阵整体重采
    """
    defaults = representation_defaults(seed=seed, entry_range=entry_range, max_resample=max_resample)
    dim = DimVector.of(A, dim)
    rng = random.Random(defaults["seed"])
    last_error = None
    for _ in range(defaults["max_resample"]):
        try:
            return _sample_point(A, dim, rng, defaults["entry_range"], defaults["max_resample"], defaults["seed"])
        except SingularPointError as exc:
            last_error = exc
    raise SingularPointError(f"重采 {defaults['max_resample']} 次仍得到奇异点: {last_error}")


def _numeric_array(point: RepPoint, word: Word) -> np.ndarray:
    return np.array(point.word_matrix(word).tolist(), dtype=object)


def eval_tensor_at_point(t: Union[NCPoly, Tensor2, Tensor3], point: RepPoint) -> np.ndarray:
    """
    各张量因子的字在点上求值后取外积：Tensor2 得到形状 (N,N,N,N) 的数组，
    下标 [p,q,r,s] 对应 x′_{pq} x″_{rs}
    """
    arity = 1 if isinstance(t, NCPoly) else 2 if isinstance(t, Tensor2) else 3
    N = point.dim.N
    result = np.zeros((N,) * (2 * arity), dtype=object)
    cache: Dict[Word, np.ndarray] = {}

    def value(word):
        if word not in cache:
            cache[word] = _numeric_array(point, word)
        return cache[word]

    for key, coeff in t.items():
        words = (key,) if isinstance(t, NCPoly) else key
        term = value(words[0])
        for word in words[1:]:
            term = np.multiply.outer(term, value(word))
        result = result + term * Rational(coeff.numerator, coeff.denominator)
    return result


def _array_residual(array: np.ndarray) -> Optional[str]:
    """数组全为 0 时返回 None，否则给出第一个非零位置"""
    for index, entry in np.ndenumerate(array):
        if entry != 0:
            return f"{index}: {entry}"
    return None


# ----------------------------------------------------------------------
# 检查器
# ----------------------------------------------------------------------
class RepresentationChecker(LoggerMixin):
    """
    给定双括号与维数向量，在坐标环上检查雅可比反常恒等式、拟泊松恒等式、等变性和三向量公式

    Args:
        br: 双括号
        dim: 维数向量（DimVector、映射、"1:2,2:1" 或整数）
        samples: 超过 exhaustive_max_dim 时抽取的指标组数
        seed / trials / entry_range: 点上复查所用的种子、点数、矩阵元范围
    """

    def __init__(self, br: DoubleBracketSpec, dim, samples: Optional[int] = None, seed: Optional[int] = None,
                 trials: Optional[int] = None, entry_range: Optional[int] = None,
                 exhaustive_max_dim: Optional[int] = None):
        self.br = br
        self.algebra = br.algebra
        self.dim = DimVector.of(br.algebra, dim)
        self.options = representation_defaults(trials=trials, seed=seed, entry_range=entry_range,
                                               samples=samples, exhaustive_max_dim=exhaustive_max_dim)
        self.coords = coordinate_ring(self.algebra, self.dim)
        self.bracket = InducedBracket(br, self.coords)
        self._points: Optional[List[Tuple[RepPoint, List[Rational]]]] = None

    # 指标组
    def _exhaustive(self) -> bool:
        return self.dim.N <= self.options["exhaustive_max_dim"]

    def index_tuples(self, names: Sequence[str], rng: random.Random) -> List[Tuple[IndexPair, ...]]:
        """各生成元块内的指标组合；维数较大时抽样"""
        pools = [self.coords.entries(name) for name in names]
        total = 1
        for pool in pools:
            total *= len(pool)
        if self._exhaustive() or total <= self.options["samples"]:
            return list(itertools.product(*pools))
        return [tuple(rng.choice(pool) for pool in pools) for _ in range(self.options["samples"])]

    def default_triples(self) -> List[Tuple[str, str, str]]:
        return list(itertools.combinations_with_replacement(self.algebra.bracket_generators(), 3))

    # 点上复查
    def points(self) -> List[Tuple[RepPoint, List[Rational]]]:
        if self._points is None:
            self._points = []
            for trial in range(self.options["trials"]):
                point = random_rep_point(self.algebra, self.dim, seed=self.options["seed"] + trial,
                                         entry_range=self.options["entry_range"])
                self._points.append((point, point.variable_values(self.coords)))
        return self._points

    def settle(self, report: CheckReport, inputs: Sequence, residual) -> bool:
        """
        登记一个多项式残差

        残差为零直接通过；代数带关系时在各采样点上求值，全为零也算通过。
        """
        if not residual or not self.algebra.has_relations:
            return report.record(inputs, residual)
        for point, values in self.points():
            value = self.coords.evaluate(residual, values)
            if value != 0:
                return report.record(tuple(inputs) + (f"seed={point.seed}",), value)
        note = f"多项式残差非零，在 {len(self.points())} 个采样点上为零"
        if note not in report.notes:
            report.notes.append(note)
        return report.record(inputs, 0)

    # 雅可比反常
    def _contracted_rhs(self, triple: Tensor3, swapped: Tensor3, ij, kl, uv):
        """t_{uj,il,kv} - t′_{kj,iv,ul}"""
        (i, j), (k, l), (u, v) = ij, kl, uv
        coords = self.coords
        return coords.tensor_entry(triple, [(u, j), (i, l), (k, v)]) \
            - coords.tensor_entry(swapped, [(k, j), (i, v), (u, l)])

    def _jacobi(self, report: CheckReport, triples, rhs_tensor) -> CheckReport:
        rng = random.Random(self.options["seed"])
        for a, b, c in triples or self.default_triples():
            first, second = rhs_tensor(a, b, c), rhs_tensor(a, c, b)
            for ij, kl, uv in self.index_tuples((a, b, c), rng):
                f = self.coords.variable(a, *ij)
                g = self.coords.variable(b, *kl)
                h = self.coords.variable(c, *uv)
                residual = self.bracket.jacobiator(f, g, h) - self._contracted_rhs(first, second, ij, kl, uv)
                self.settle(report, (a, b, c, f"{ij},{kl},{uv}"), residual)
        return report

    def jacobiator_check(self, triples: Optional[Sequence[Tuple[str, str, str]]] = None) -> CheckReport:
        """Jac(a_ij, b_kl, c_uv) = ⟪a,b,c⟫_{uj,il,kv} - ⟪a,c,b⟫_{kj,iv,ul}，三重括号由双括号给出"""
        report = CheckReport(f"{self.br.name}: Jacobi identity at α = {self.dim}")
        return self._jacobi(report, triples, lambda a, b, c: triple_bracket(self.br, a, b, c))

    def qp_rep_check(self, triples: Optional[Sequence[Tuple[str, str, str]]] = None) -> CheckReport:
        """同一恒等式，右端换成拟泊松反常项：Jac = ½φ_R"""
        report = CheckReport(f"{self.br.name}: quasi-Poisson identity at α = {self.dim}")
        return self._jacobi(report, triples, lambda a, b, c: qp_anomaly(self.algebra, a, b, c))

    # 等变性
    def _eta_action(self, f, p: int, q: int):
        """η = E_pq 作用 η_R(𝒳(ℓ)) = [𝒳(ℓ), η] 延拓成导子"""
        coords = self.coords
        total = coords.zero
        for index in coords.support(f):
            name, i, j = coords.variables[index]
            image = coords.zero
            if q == j:
                image = image + coords.variable(name, i, p)
            if i == p:
                image = image - coords.variable(name, q, j)
            if image:
                total = total + coords.derivative(f, index) * image
        return total

    def equivariance_check(self) -> CheckReport:
        """η_R{f,g} = {η_R f, g} + {f, η_R g}，η 取各块内的初等矩阵，f、g 取生成元坐标"""
        report = CheckReport(f"{self.br.name}: equivariance at α = {self.dim}")
        rng = random.Random(self.options["seed"])
        etas = [(p, q) for label in self.algebra.idempotents
                for p in self.dim.block(label) for q in self.dim.block(label)]
        names = self.algebra.bracket_generators()
        for a, b in itertools.combinations_with_replacement(names, 2):
            for ij, kl in self.index_tuples((a, b), rng):
                f, g = self.coords.variable(a, *ij), self.coords.variable(b, *kl)
                fg = self.bracket(f, g)
                for p, q in etas:
                    residual = self._eta_action(fg, p, q) \
                        - self.bracket(self._eta_action(f, p, q), g) - self.bracket(f, self._eta_action(g, p, q))
                    report.record((a, b, f"{ij},{kl}", f"E_{p}{q}"), residual)
        return report

    # 三向量
    def _vector_field(self, value: Tensor2, p: int, q: int, ij: IndexPair):
        """δ_{pq}(a_ij) = δ(a)′_{iq} δ(a)″_{pj}"""
        i, j = ij
        return self.coords.tensor_entry(value, [(i, q), (p, j)])

    def trivector_check(self) -> CheckReport:
        """tr𝒳(E_s³)(a_ij,b_kl,c_uv) 与 E_s³ 微分三重括号的指标收缩一致"""
        report = CheckReport(f"trace trivector of E_s^3 at α = {self.dim}")
        rng = random.Random(self.options["seed"])
        N = self.dim.N
        signs = [(perm, Permutation(list(perm)).signature()) for perm in itertools.permutations(range(3))]
        for label in self.algebra.idempotents:
            E = gauge_element(self.algebra, label)
            values = {name: E.apply(self.algebra.gen(name)) for name in self.algebra.bracket_generators()}
            for a, b, c in self.default_triples():
                first = differential_triple(E, E, E, a, b, c)
                second = differential_triple(E, E, E, a, c, b)
                for indices in self.index_tuples((a, b, c), rng):
                    args = list(zip((a, b, c), indices))
                    lhs = self.coords.zero
                    for i1, i2, i3 in itertools.product(range(N), repeat=3):
                        chain = ((i1, i2), (i2, i3), (i3, i1))
                        for perm, sign in signs:
                            term = self.coords.constant(sign)
                            for (p, q), slot in zip(chain, perm):
                                name, ij = args[slot]
                                factor = self._vector_field(values[name], p, q, ij)
                                if not factor:
                                    term = self.coords.zero
                                    break
                                term = term * factor
                            lhs = lhs + term
                    residual = lhs - self._contracted_rhs(first, second, *indices)
                    self.settle(report, (f"E_{label}", a, b, c, str(indices)), residual)
        return report


# ----------------------------------------------------------------------
# 模块级入口
# ----------------------------------------------------------------------
@log_check_operation('表示空间雅可比恒等式')
def jacobiator_check(br: DoubleBracketSpec, dim, triples=None, samples=None, seed=None) -> CheckReport:
    return RepresentationChecker(br, dim, samples=samples, seed=seed).jacobiator_check(triples)


@log_check_operation('表示空间拟泊松恒等式')
def qp_rep_check(br: DoubleBracketSpec, dim, triples=None, samples=None, seed=None) -> CheckReport:
    return RepresentationChecker(br, dim, samples=samples, seed=seed).qp_rep_check(triples)


@log_check_operation('表示空间等变性')
def equivariance_check(br: DoubleBracketSpec, dim, samples=None, seed=None) -> CheckReport:
    return RepresentationChecker(br, dim, samples=samples, seed=seed).equivariance_check()


@log_check_operation('迹三向量')
def trivector_check(algebra: AlgebraSpec, dim, samples=None, seed=None) -> CheckReport:
    return RepresentationChecker(zero_bracket(algebra), dim, samples=samples, seed=seed).trivector_check()


@log_check_operation('矩映射数值检查')
def moment_map_numeric_check(br: DoubleBracketSpec, mm: MomentMapSpec, dim, trials: Optional[int] = None,
                             seed: Optional[int] = None) -> CheckReport:
    """在 trials 个种子化的点上逐生成元比较 ⟪Φ_s, a⟫ 与矩映射条件右端（精确有理运算）"""
    A = br.algebra
    if mm.algebra != A:
        raise StructuralError("矩映射与双括号不在同一代数上")
    options = representation_defaults(trials=trials, seed=seed)
    dim = DimVector.of(A, dim)
    report = CheckReport(f"{br.name}: moment map at {options['trials']} points, α = {dim}")
    tensors = []
    for label in A.idempotents:
        phi = mm.component(label)
        for name in A.bracket_generators():
            a = A.gen(name)
            tensors.append((label, name, eval_double(br, phi, a) - moment_map_rhs(A, label, phi, a)))
    for trial in range(options["trials"]):
        point = random_rep_point(A, dim, seed=options["seed"] + trial)
        for label, name, difference in tensors:
            residual = _array_residual(eval_tensor_at_point(difference, point))
            report.record((f"seed={point.seed}", f"Phi_{label}", name), residual)
    return report


def moment_ideal_generators(mm: MomentMapSpec, dim, q: Optional[Mapping[str, object]] = None) -> list:
    """𝒳(Φ) - 𝒳(q) 的非零矩阵元，q = Σ q_s e_s（缺省 q_s = 1）"""
    if mm.has_formal_inverse():
        raise DeferToNumericError("矩映射含形式逆，理想生成元不是多项式")
    A = mm.algebra
    dim = DimVector.of(A, dim)
    coords = coordinate_ring(A, dim)
    q = {str(k): to_fraction(v) for k, v in (q or {}).items()}
    target = A.zero()
    for label in A.idempotents:
        target = target + A.idempotent(label).scale(q.get(label, Fraction(1)))
    difference = coords.matrix(mm.total()) - coords.matrix(target)
    return [entry for entry in difference.flat if entry]
