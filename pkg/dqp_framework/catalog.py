# -*- encoding: UTF-8 -*-
"""
双拟泊松括号目录

每个构造函数返回一个 Bundle（代数、双括号、可选矩映射），既是各检查器的输入，
也是回归测试的固定样例：

- 单生成元：free1、nilpotent_free1
- 双顶点箭图 Q̄₁：q1（情形 1a/1b/2/3，可选局部化矩映射）
- 两个生成元的自由代数：free2（情形 1–7，可选 s↔t 对换）
- 由融合得到的族：q1_pair_fusion、q1_fusion、kronecker_fusion、loop_arrow_fusion、
  free_pair_fusion、nilpotent_sum
- 箭图的闭式括号与分离箭图融合：vdb_quiver、vdb_sep_fusion
- 曲面基本群：surface、surface_fusion

catalog_families() 给出名称 → 构造器、参数模式、说明的注册表，供命令行与验收套件使用。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .algebra import AlgebraSpec, GeneratorDecl, NCPoly, Tensor2, WordMap, tensor2, to_fraction
from .brackets import (
    Bundle,
    DoubleBracketSpec,
    MomentMapSpec,
    direct_sum,
    direct_sum_moment_map,
)
from .exceptions import ParameterError, StructuralError
from .fusion import fuse_sequence
from .logger_config import get_logger

logger = get_logger('dqp_framework.catalog')

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
STAR_SUFFIX = "_star"


# ----------------------------------------------------------------------
# 公共小工具
# ----------------------------------------------------------------------
def _require(condition: bool, message: str, validate: bool = True, location: Optional[str] = None):
    if validate and not condition:
        raise ParameterError(message, location=location)


def _half_sign(value, name: str, validate: bool) -> Fraction:
    value = to_fraction(value)
    _require(abs(value) == HALF, f"{name} 必须为 ±1/2，得到 {value}", validate, name)
    return value


def _unit_sign(value, name: str, validate: bool) -> Fraction:
    value = to_fraction(value)
    _require(abs(value) == 1, f"{name} 必须为 ±1，得到 {value}", validate, name)
    return value


def _nonzero(value, name: str, validate: bool) -> Fraction:
    value = to_fraction(value)
    _require(value != 0, f"{name} 必须非零", validate, name)
    return value


def loop_bracket(algebra: AlgebraSpec, name: str, lam=0, mu=0, nu=0) -> Tensor2:
    """环 x 上的 λ(x⊗e - e⊗x) + μ(x²⊗e - e⊗x²) + ν(x²⊗x - x⊗x²)，e 为 x 所在的幂等元"""
    x = algebra.gen(name)
    e = algebra.idempotent(algebra.generator(name).tail)
    x2 = x * x
    return (tensor2(x, e) - tensor2(e, x)).scale(lam) \
        + (tensor2(x2, e) - tensor2(e, x2)).scale(mu) \
        + (tensor2(x2, x) - tensor2(x, x2)).scale(nu)


def cross_bracket(algebra: AlgebraSpec, first: str, second: str, coeff=HALF) -> Tensor2:
    """c(yx⊗1 + 1⊗xy - y⊗x - x⊗y)：先后融合的两个单顶点因子之间的括号"""
    x, y = algebra.gen(first), algebra.gen(second)
    one = algebra.unit()
    return (tensor2(y * x, one) + tensor2(one, x * y) - tensor2(y, x) - tensor2(x, y)).scale(coeff)


def _with_formal_inverses(base: AlgebraSpec, inverses: Sequence[Tuple[str, str, NCPoly]]) -> AlgebraSpec:
    """在 base 上追加形式逆生成元 (名称, 幂等元, 定义元素)"""
    if not inverses:
        return base
    decls = [GeneratorDecl.formal_inverse(name, at, element) for name, at, element in inverses]
    return AlgebraSpec(base.idempotents, base.generators + tuple(decls))


def _format_params(**params) -> str:
    return ",".join(f"{key}={value}" for key, value in params.items())


def relabel(bundle: Bundle, mapping: Mapping, name: Optional[str] = None) -> Bundle:
    _, word_map = bundle.algebra.relabel_idempotents(mapping)
    return bundle.transported(word_map, name=name)


def rename(bundle: Bundle, mapping: Mapping[str, str], name: Optional[str] = None) -> Bundle:
    _, word_map = bundle.algebra.rename_generators(mapping)
    return bundle.transported(word_map, name=name)


def reorder(bundle: Bundle, idempotents=None, generators=None) -> Bundle:
    _, word_map = bundle.algebra.reordered(idempotents, generators)
    return bundle.transported(word_map)


def sum_bundles(bundles: Sequence[Bundle], name: Optional[str] = None) -> Bundle:
    """逐个直和；只有全部带矩映射时结果才带矩映射"""
    result = bundles[0]
    for other in bundles[1:]:
        bracket = direct_sum(result.bracket, other.bracket)
        moment_map = None
        if result.moment_map is not None and other.moment_map is not None:
            moment_map = direct_sum_moment_map(result.moment_map, other.moment_map)
        result = Bundle(bracket, moment_map)
    if name:
        result.bracket.name = name
        result.name = name
    return result


def fuse(bundle: Bundle, kept, absorbed, name: Optional[str] = None) -> Bundle:
    """把 absorbed 融合到 kept 上"""
    pipeline = fuse_sequence(bundle.bracket, [(str(kept), str(absorbed))], bundle.moment_map)
    result = Bundle(pipeline.bracket, pipeline.moment_map)
    if name:
        result.bracket.name = name
        result.name = name
    return result


def fuse_directed(bundle: Bundle, target, other, forward: bool = True) -> Bundle:
    """
    在 target 处合并两个幂等元

    forward=True 时把 other 融合到 target 上；否则把 target 融合到 other 上，
    再把 other 改名为 target，所有融合项因此变号。
    """
    target, other = str(target), str(other)
    if forward:
        return fuse(bundle, target, other)
    return relabel(fuse(bundle, other, target), {other: target})


# ----------------------------------------------------------------------
# 单生成元
# ----------------------------------------------------------------------
def free1(lam=0, mu=HALF, nu=0, localize: bool = False, validate: bool = True) -> Bundle:
    """
    𝕜[t] 上的 ⟪t,t⟫ = λ(t⊗1-1⊗t) + μ(t²⊗1-1⊗t²) + ν(t²⊗t-t⊗t²)，要求 4(μ²-λν) = 1

    localize=True 时附带矩映射 Φ = (t+δλ)^δ（要求 ν = 0、μ = δ/2）：
    λ = 0 时 t 可逆；δ = +1 时 Φ = t+λ 无需局部化；δ = -1 时 Φ 是 t-λ 的形式逆。
    """
    lam, mu, nu = to_fraction(lam), to_fraction(mu), to_fraction(nu)
    _require(4 * (mu * mu - lam * nu) == 1, f"free1 要求 4(μ²-λν) = 1，得到 λ={lam}, μ={mu}, ν={nu}", validate)
    name = f"free1({_format_params(lam=lam, mu=mu, nu=nu)})"

    if not localize:
        A = AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1")])
        return Bundle(DoubleBracketSpec(A, {("t", "t"): loop_bracket(A, "t", lam, mu, nu)}, name=name))

    if nu != 0 or abs(mu) != HALF:
        raise ParameterError("free1 的矩映射要求 ν = 0 且 μ = ±1/2", location="localize")
    delta = int(2 * mu)
    if lam == 0:
        A = AlgebraSpec(["1"], [GeneratorDecl.invertible("t", "1", "1")])
        phi = A.element("t" if delta == 1 else "t^-1")
    elif delta == 1:
        A = AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1")])
        phi = A.gen("t") + A.scalar(lam)
    else:
        base = AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1")])
        A = _with_formal_inverses(base, [("inv_t", "1", base.gen("t") - base.scalar(lam))])
        phi = A.gen("inv_t")
    bracket = DoubleBracketSpec(A, {("t", "t"): loop_bracket(A, "t", lam, mu, nu)}, name=name)
    return Bundle(bracket, MomentMapSpec(A, {"1": phi}))


def nilpotent_free1(order: int = 3, mu=HALF, generator: str = "x", label="1", validate: bool = True) -> Bundle:
    """𝕜[x]/(x^k) 上的 ⟪x,x⟫ = μ(x²⊗1-1⊗x²)，k ≥ 3"""
    order = int(order)
    if order < 3:
        raise ParameterError(f"幂零阶数必须 ≥ 3，得到 {order}", location="order")
    mu = _half_sign(mu, "mu", validate)
    A = AlgebraSpec([str(label)], [GeneratorDecl.nilpotent(generator, label, order)])
    bracket = DoubleBracketSpec(A, {(generator, generator): loop_bracket(A, generator, mu=mu)},
                                name=f"nilpotent_free1({_format_params(k=order, mu=mu)})")
    return Bundle(bracket)


# ----------------------------------------------------------------------
# 双顶点箭图 Q̄₁：t: 1→2, s: 2→1
# ----------------------------------------------------------------------
Q1_CASES = ("1a", "1b", "2", "3")


def _q1_base(invertible: bool) -> AlgebraSpec:
    make = GeneratorDecl.invertible if invertible else GeneratorDecl.plain
    return AlgebraSpec(["1", "2"], [make("t", "1", "2"), make("s", "2", "1")])


def _q1_values(A: AlgebraSpec, case: str, delta, gamma, phi, alpha, lam) -> Dict[Tuple[str, str], Tensor2]:
    t, s = A.gen("t"), A.gen("s")
    e1, e2 = A.idempotent("1"), A.idempotent("2")
    st, ts = s * t, t * s
    zero = Tensor2(A)
    if case == "1b":
        ts_value = tensor2(e2, e1).scale(gamma) + tensor2(st, ts).scale(phi) \
            + (tensor2(st, e1) + tensor2(e2, ts)).scale(alpha)
    else:
        ts_value = (tensor2(st, e1) - tensor2(e2, ts)).scale(delta / 2)
    tt_value, ss_value = zero, zero
    if case == "2":
        tst = t * s * t
        tt_value = (tensor2(tst, t) - tensor2(t, tst)).scale(lam)
    elif case == "3":
        sts = s * t * s
        ss_value = (tensor2(sts, s) - tensor2(s, sts)).scale(lam)
    return {("t", "t"): tt_value, ("s", "s"): ss_value, ("t", "s"): ts_value}


def q1(case: str = "1a", delta=1, gamma=0, phi=0, alpha=HALF, lam=1, localize: bool = False,
       validate: bool = True) -> Bundle:
    """
    Q̄₁ 路径代数上的拟泊松括号

    Args:
        case: "1a" / "1b" / "2" / "3"
        delta: 情形 1a、2、3 中的 δ = ±1
        gamma, phi, alpha: 情形 1b 的系数，要求 α² = 1/4 + γφ
        lam: 情形 2、3 中的 λ ≠ 0
        localize: 情形 1b 且 γφ = 0 时附带局部化后的矩映射
    """
    case = str(case)
    if case not in Q1_CASES:
        raise ParameterError(f"未知的 q1 情形: {case}", location="case")
    delta, gamma, phi, alpha, lam = (to_fraction(v) for v in (delta, gamma, phi, alpha, lam))
    if case == "1b":
        _require(alpha * alpha == QUARTER + gamma * phi, f"q1 情形 1b 要求 α² = 1/4 + γφ，得到 α={alpha}", validate)
        params = _format_params(gamma=gamma, phi=phi, alpha=alpha)
    else:
        delta = _unit_sign(delta, "delta", validate)
        params = _format_params(delta=delta)
        if case in ("2", "3"):
            lam = _nonzero(lam, "lambda", validate)
            params += f",lambda={lam}"
    name = f"q1[{case}]({params})"

    if not localize:
        A = _q1_base(invertible=False)
        return Bundle(DoubleBracketSpec(A, _q1_values(A, case, delta, gamma, phi, alpha, lam), name=name))

    if case != "1b" or abs(alpha) != HALF:
        raise ParameterError("q1 的矩映射只适用于情形 1b 且 α = ±1/2", location="localize")
    sign = int(2 * alpha)
    if gamma != 0 and phi != 0:
        raise ParameterError("q1 的矩映射要求 γφ = 0", location="localize")

    inverses = []
    if phi == 0 and gamma != 0:
        # Φ₁ = (δγe₁ + ts)^δ，Φ₂ = (δγe₂ + st)^{-δ}
        base = _q1_base(invertible=False)
        a = base.idempotent("1").scale(sign * gamma) + base.path("t", "s")
        b = base.idempotent("2").scale(sign * gamma) + base.path("s", "t")
        inverses = [("inv_b", "2", b)] if sign == 1 else [("inv_a", "1", a)]
        A = _with_formal_inverses(base, inverses)
        lift = WordMap(base, A)
        components = {"1": lift(a), "2": A.gen("inv_b")} if sign == 1 else {"1": A.gen("inv_a"), "2": lift(b)}
    elif phi == 0:
        A = _q1_base(invertible=True)
        components = {"1": A.element("t*s"), "2": A.element("t^-1*s^-1")} if sign == 1 \
            else {"1": A.element("s^-1*t^-1"), "2": A.element("s*t")}
    else:
        # Φ₁ = (δφe₁ + (ts)⁻¹)^{-δ}，Φ₂ = (δφe₂ + (st)⁻¹)^δ
        base = _q1_base(invertible=True)
        c = base.idempotent("1").scale(sign * phi) + base.element("s^-1*t^-1")
        d = base.idempotent("2").scale(sign * phi) + base.element("t^-1*s^-1")
        inverses = [("inv_c", "1", c)] if sign == 1 else [("inv_d", "2", d)]
        A = _with_formal_inverses(base, inverses)
        lift = WordMap(base, A)
        components = {"1": A.gen("inv_c"), "2": lift(d)} if sign == 1 else {"1": lift(c), "2": A.gen("inv_d")}
    bracket = DoubleBracketSpec(A, _q1_values(A, case, delta, gamma, phi, alpha, lam), name=name)
    return Bundle(bracket, MomentMapSpec(A, components))


def q1_pair_fusion(delta=1, delta_prime=1) -> Bundle:
    """
    两个单箭头箭图 t: 1→2、s: 4→3（零括号）粘合 1,3 与 2,4 得到 Q̄₁ 上的
    ⟪t,s⟫ = δ/2·st⊗e₁ + δ'/2·e₂⊗ts；δ 与 δ' 的符号由融合方向决定
    """
    delta = _unit_sign(delta, "delta", True)
    delta_prime = _unit_sign(delta_prime, "delta_prime", True)
    A = AlgebraSpec(["1", "2", "3", "4"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "4", "3")])
    zero = Tensor2(A)
    bundle = Bundle(DoubleBracketSpec(A, {("t", "t"): zero, ("s", "s"): zero, ("t", "s"): zero}, name="kQ1+kQ1'"))
    bundle = fuse_directed(bundle, "1", "3", forward=delta == 1)
    bundle = fuse_directed(bundle, "2", "4", forward=delta_prime == 1)
    bundle = reorder(bundle, ["1", "2"], ["t", "s"])
    bundle.name = bundle.bracket.name = f"q1_pair_fusion({_format_params(delta=delta, delta_prime=delta_prime)})"
    return bundle


def q1_fusion(gamma=0, delta=1, forward: bool = True) -> Bundle:
    """局部化的 Q̄₁（情形 1b，φ = 0，α = δ/2）融合两个顶点，得到 free2 情形 2 及其矩映射"""
    delta = _unit_sign(delta, "delta", True)
    source = q1("1b", gamma=gamma, phi=0, alpha=delta / 2, localize=True)
    bundle = fuse_directed(source, "1", "2", forward=forward)
    bundle.name = bundle.bracket.name = \
        f"q1_fusion({_format_params(gamma=to_fraction(gamma), delta=delta, forward=forward)})"
    return bundle


# ----------------------------------------------------------------------
# 两个生成元的自由代数 𝕜⟨t, s⟩
# ----------------------------------------------------------------------
FREE2_CASES = ("1", "2", "3", "4", "5", "6", "7")


def _free2_algebra(invertible: bool = False) -> AlgebraSpec:
    make = GeneratorDecl.invertible if invertible else GeneratorDecl.plain
    return AlgebraSpec(["1"], [make("t", "1", "1"), make("s", "1", "1")])


def _free2_values(A: AlgebraSpec, case: str, mu, alpha, gamma, gamma0, gamma1, m, n, nu):
    t, s, one = A.gen("t"), A.gen("s"), A.unit()
    st, ts = s * t, t * s
    # 情形 3、6 与情形 4、5、7 共用的两种 ⟪t,s⟫
    antisym = lambda c: (tensor2(st, one) - tensor2(t, s) + tensor2(s, t) - tensor2(one, ts)).scale(c)
    sym = lambda c: (tensor2(st, one) - tensor2(t, s) - tensor2(s, t) + tensor2(one, ts)).scale(c)
    cubic = lambda c: (-1 / (4 * c), 0, c)

    if case == "1":
        tt, ss = (0, mu, 0), (0, mu, 0)
        ts_value = tensor2(t, t).scale(gamma0) + tensor2(s, s).scale(gamma1) \
            + (tensor2(st, one) - tensor2(one, ts)).scale(mu) + (tensor2(t, s) + tensor2(s, t)).scale(alpha)
    elif case == "2":
        tt, ss = (0, mu, 0), (0, -mu, 0)
        ts_value = (tensor2(st, one) + tensor2(one, ts)).scale(alpha) \
            + (tensor2(s, t) - tensor2(t, s)).scale(mu) + tensor2(one, one).scale(gamma)
    elif case == "3":
        tt, ss = (0, mu, 0), (0, m, 0)
        ts_value = antisym(mu)
    elif case == "4":
        tt, ss = (0, mu, 0), (0, m, 0)
        ts_value = sym(alpha)
    elif case == "5":
        tt, ss = (0, mu, 0), cubic(n)
        ts_value = sym(alpha)
    elif case == "6":
        tt, ss = (0, mu, 0), cubic(n)
        ts_value = antisym(mu)
    else:
        tt, ss = cubic(nu), cubic(n)
        ts_value = sym(alpha)
    return {
        ("t", "t"): loop_bracket(A, "t", *tt),
        ("s", "s"): loop_bracket(A, "s", *ss),
        ("t", "s"): ts_value,
    }


def free2(case="1", mu=HALF, alpha=HALF, gamma=0, gamma0=0, gamma1=0, m=HALF, n=1, nu=1,
          swap: bool = False, localize: bool = False, validate: bool = True) -> Bundle:
    """
    𝕜⟨t,s⟩ 上的七类约化拟泊松括号

    每种情形只读取它用到的参数：
      1: γ₀, γ₁, μ = ±1/2, α² = 1/4 + γ₀γ₁      2: γ, α = ±1/2, μ = ±1/2
      3: m, μ = ±1/2                           4: α, m, μ = ±1/2
      5: n ≠ 0, α, μ = ±1/2                    6: n ≠ 0, μ = ±1/2
      7: n, ν ≠ 0, α = ±1/2
    swap=True 时再作用自同构 s ↔ t；localize=True（仅情形 2）附带矩映射。
    """
    case = str(case)
    if case not in FREE2_CASES:
        raise ParameterError(f"未知的 free2 情形: {case}", location="case")
    mu, alpha, gamma, gamma0, gamma1, m, n, nu = (
        to_fraction(v) for v in (mu, alpha, gamma, gamma0, gamma1, m, n, nu))

    used: Dict[str, Fraction] = {}
    if case in ("1", "2", "3", "4", "5", "6"):
        used["mu"] = _half_sign(mu, "mu", validate)
    if case == "1":
        _require(alpha * alpha == QUARTER + gamma0 * gamma1,
                 f"free2 情形 1 要求 α² = 1/4 + γ₀γ₁，得到 α={alpha}", validate, "alpha")
        used.update(gamma0=gamma0, gamma1=gamma1, alpha=alpha)
    if case in ("2", "4", "5", "7"):
        used["alpha"] = _half_sign(alpha, "alpha", validate)
    if case == "2":
        used["gamma"] = gamma
    if case in ("3", "4"):
        used["m"] = _half_sign(m, "m", validate)
    if case in ("5", "6", "7"):
        # n 出现在分母中，即使关闭校验也不能为 0
        used["n"] = _nonzero(n, "n", True)
    if case == "7":
        used["nu"] = _nonzero(nu, "nu", True)
    name = f"free2[{case}]({_format_params(**used)})" + ("~swap" if swap else "")

    moment_components = None
    if localize:
        if case != "2" or abs(alpha) != HALF or abs(mu) != HALF:
            raise ParameterError("free2 的矩映射只适用于情形 2（α, μ = ±1/2）", location="localize")
        A, phi = free2_case2_moment_map(gamma, int(2 * alpha), int(2 * mu))
        moment_components = {"1": phi}
    else:
        A = _free2_algebra()

    values = _free2_values(A, case, mu, alpha, gamma, gamma0, gamma1, m, n, nu)
    bundle = Bundle(DoubleBracketSpec(A, values, name=name),
                    None if moment_components is None else MomentMapSpec(A, moment_components))
    if swap:
        bundle = reorder(rename(bundle, {"t": "s", "s": "t"}), generators=list(A.generator_names))
    return bundle


def free2_case2_moment_map(gamma=0, delta: int = 1, mu_sign: int = 1) -> Tuple[AlgebraSpec, NCPoly]:
    """
    free2 情形 2 的代数与矩映射 Φ：a = δγ+ts，b = δγ+st

    μ = +1/2 时 Φ = a^δ b^{-δ}，μ = -1/2 时 Φ = b^{-δ} a^δ；
    γ = 0 时 s、t 可逆，否则用 a 或 b 的形式逆。
    """
    gamma = to_fraction(gamma)
    if gamma == 0:
        A = _free2_algebra(invertible=True)
        a_power = A.element("t*s" if delta == 1 else "s^-1*t^-1")
        b_power = A.element("t^-1*s^-1" if delta == 1 else "s*t")
    else:
        base = _free2_algebra()
        a = base.scalar(delta * gamma) + base.path("t", "s")
        b = base.scalar(delta * gamma) + base.path("s", "t")
        A = _with_formal_inverses(base, [("inv_b", "1", b)] if delta == 1 else [("inv_a", "1", a)])
        lift = WordMap(base, A)
        a_power = lift(a) if delta == 1 else A.gen("inv_a")
        b_power = A.gen("inv_b") if delta == 1 else lift(b)
    phi = a_power * b_power if mu_sign == 1 else b_power * a_power
    return A, phi


def kronecker_pair(gamma0=0, gamma1=0, alpha=HALF, validate: bool = True) -> Bundle:
    """两条平行箭头 t, s: 1→2，⟪t,s⟫ = γ₀t⊗t + γ₁s⊗s + α(t⊗s + s⊗t)，α² = 1/4 + γ₀γ₁"""
    gamma0, gamma1, alpha = (to_fraction(v) for v in (gamma0, gamma1, alpha))
    _require(alpha * alpha == QUARTER + gamma0 * gamma1,
             f"kronecker_pair 要求 α² = 1/4 + γ₀γ₁，得到 α={alpha}", validate, "alpha")
    A = AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "1", "2")])
    t, s = A.gen("t"), A.gen("s")
    zero = Tensor2(A)
    values = {
        ("t", "t"): zero,
        ("s", "s"): zero,
        ("t", "s"): tensor2(t, t).scale(gamma0) + tensor2(s, s).scale(gamma1)
        + (tensor2(t, s) + tensor2(s, t)).scale(alpha),
    }
    name = f"kronecker_pair({_format_params(gamma0=gamma0, gamma1=gamma1, alpha=alpha)})"
    return Bundle(DoubleBracketSpec(A, values, name=name))


def kronecker_fusion(gamma0=0, gamma1=0, alpha=HALF, forward: bool = True) -> Bundle:
    """融合 kronecker_pair 的两个顶点：得到 free2 情形 1，μ = +1/2（正向）或 -1/2（反向）"""
    bundle = fuse_directed(kronecker_pair(gamma0, gamma1, alpha), "1", "2", forward=forward)
    bundle.name = bundle.bracket.name = f"kronecker_fusion({_format_params(alpha=to_fraction(alpha), forward=forward)})"
    return bundle


def loop_arrow_fusion(l=0, m=HALF, n=0, first_forward: bool = True, second_forward: bool = True,
                      validate: bool = True) -> Bundle:
    """
    𝕜Q₁（t: 1→2，零括号）⊕ 𝕜⟨s⟩（顶点 3）先粘合 2、3，再粘合 1、2

    结果中 ⟪t,s⟫ = α(1⊗ts - s⊗t) + μ(st⊗1 - t⊗s)，⟪t,t⟫ = μ(t²⊗1 - 1⊗t²)，
    α、μ 的符号分别由两次融合的方向决定。
    """
    l, m, n = to_fraction(l), to_fraction(m), to_fraction(n)
    _require(4 * (m * m - l * n) == 1, f"⟪s,s⟫ 要求 4(m²-ln) = 1，得到 l={l}, m={m}, n={n}", validate)
    A = AlgebraSpec(["1", "2", "3"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "3", "3")])
    zero = Tensor2(A)
    values = {("t", "t"): zero, ("t", "s"): zero, ("s", "s"): loop_bracket(A, "s", l, m, n)}
    bundle = Bundle(DoubleBracketSpec(A, values, name="kQ1+k<s>"))
    bundle = fuse_directed(bundle, "2", "3", forward=first_forward)
    bundle = fuse_directed(bundle, "1", "2", forward=second_forward)
    bundle.name = bundle.bracket.name = f"loop_arrow_fusion({_format_params(l=l, m=m, n=n)}," \
        f"{'+' if first_forward else '-'}{'+' if second_forward else '-'})"
    return bundle


def free_pair_fusion(t_params: Sequence = (0, HALF, 0), s_params: Sequence = (0, HALF, 0),
                     forward: bool = True, validate: bool = True) -> Bundle:
    """
    𝕜⟨t⟩ ⊕ 𝕜⟨s⟩ 融合为 𝕜⟨t,s⟩：两个因子各带 free1 型括号，
    ⟪t,s⟫ = α(st⊗1 + 1⊗ts - s⊗t - t⊗s)，正向 α = 1/2，反向 α = -1/2
    """
    lam, mu, nu = (to_fraction(v) for v in t_params)
    l, m, n = (to_fraction(v) for v in s_params)
    _require(4 * (mu * mu - lam * nu) == 1, "t 的括号要求 4(μ²-λν) = 1", validate, "t_params")
    _require(4 * (m * m - l * n) == 1, "s 的括号要求 4(m²-ln) = 1", validate, "s_params")
    A = AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "1"), GeneratorDecl.plain("s", "2", "2")])
    values = {
        ("t", "t"): loop_bracket(A, "t", lam, mu, nu),
        ("s", "s"): loop_bracket(A, "s", l, m, n),
        ("t", "s"): Tensor2(A),
    }
    bundle = fuse_directed(Bundle(DoubleBracketSpec(A, values, name="k<t>+k<s>")), "1", "2", forward=forward)
    bundle.name = bundle.bracket.name = \
        f"free_pair_fusion(t=({lam},{mu},{nu}),s=({l},{m},{n}),{'+' if forward else '-'})"
    return bundle


# ----------------------------------------------------------------------
# 幂零因子的自由积
# ----------------------------------------------------------------------
def nilpotent_sum(orders: Sequence[int], mu=HALF) -> Bundle:
    """⊕ 𝕜[x_m]/(x_m^{k_m}) 依次把 e_2, …, e_M 融合到 e_1 上"""
    orders = [int(k) for k in orders]
    if not orders:
        raise ParameterError("orders 不能为空", location="orders")
    parts = [nilpotent_free1(k, mu, generator=f"x{index}", label=str(index))
             for index, k in enumerate(orders, start=1)]
    bundle = sum_bundles(parts)
    for index in range(2, len(orders) + 1):
        bundle = fuse(bundle, "1", str(index))
    bundle.name = bundle.bracket.name = f"nilpotent_sum({','.join(map(str, orders))})"
    return bundle


def nilpotent_sum_formula(orders: Sequence[int], mu=HALF) -> Bundle:
    """nilpotent_sum 的闭式括号：⟪x_r,x_r⟫ = μ(x_r²⊗1-1⊗x_r²)，r < s 时为 cross_bracket(x_r, x_s)"""
    orders = [int(k) for k in orders]
    mu = to_fraction(mu)
    names = [f"x{index}" for index in range(1, len(orders) + 1)]
    A = AlgebraSpec(["1"], [GeneratorDecl.nilpotent(name, "1", k) for name, k in zip(names, orders)])
    values = {}
    for r, first in enumerate(names):
        values[(first, first)] = loop_bracket(A, first, mu=mu)
        for second in names[r + 1:]:
            values[(first, second)] = cross_bracket(A, first, second)
    return Bundle(DoubleBracketSpec(A, values, name=f"nilpotent_sum_formula({','.join(map(str, orders))})"))


def trivial_vertex(label="1") -> Bundle:
    """只有一个幂等元、没有生成元的代数，Φ = e"""
    A = AlgebraSpec([str(label)])
    return Bundle(DoubleBracketSpec(A, {}, name=f"trivial({label})"),
                  MomentMapSpec(A, {str(label): A.idempotent(label)}))


# ----------------------------------------------------------------------
# 箭图
# ----------------------------------------------------------------------
@dataclass
class QuiverSpec:
    """
    箭图 Q 及其双箭图 Q̄ 上的数据

    Args:
        vertices: 顶点（幂等元）标签
        arrows: (名称, 尾, 头)；双箭图为每个 a 添加 a_star: h(a) → t(a)
        weights: γ_a，缺省为 1；γ_{a*} = γ_a
        orderings: 顶点 s → T_s = {a ∈ Q̄ : t(a) = s} 上的全序；缺省按声明顺序（a 在 a_star 之前）
    """
    vertices: Tuple[str, ...]
    arrows: Tuple[Tuple[str, str, str], ...]
    weights: Dict[str, Fraction] = field(default_factory=dict)
    orderings: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = tuple(str(v) for v in self.vertices)
        self.arrows = tuple((str(a), str(t), str(h)) for a, t, h in self.arrows)
        if not self.vertices:
            raise StructuralError("箭图至少需要一个顶点", location="vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise StructuralError("箭图顶点重复", location="vertices")
        names = [a for a, _, _ in self.arrows]
        doubled = names + [self.star(a) for a in names]
        if len(set(doubled)) != len(doubled):
            raise StructuralError("箭头名称重复（含 _star 后缀）", location="arrows")
        for index, (name, tail, head) in enumerate(self.arrows):
            for label in (tail, head):
                if label not in self.vertices:
                    raise StructuralError(f"箭头 {name} 引用了不存在的顶点 {label}", location=f"arrows[{index}]")
        unknown = set(self.weights) - set(names)
        if unknown:
            raise StructuralError(f"权重引用了未知箭头: {sorted(unknown)}", location="weights")
        self.weights = {a: to_fraction(self.weights.get(a, 1)) for a in names}

        orders = {}
        for vertex in self.vertices:
            default = tuple(x for x in self.double_arrows() if self.tail(x) == vertex)
            given = self.orderings.get(vertex)
            if given is None:
                orders[vertex] = default
                continue
            given = tuple(str(x) for x in given)
            if sorted(given) != sorted(default):
                raise StructuralError(f"顶点 {vertex} 的排序必须是 T_s = {list(default)} 的一个排列",
                                      location=f"orderings.{vertex}")
            orders[vertex] = given
        extra = set(self.orderings) - set(self.vertices)
        if extra:
            raise StructuralError(f"排序引用了未知顶点: {sorted(extra)}", location="orderings")
        self.orderings = orders

    @staticmethod
    def star(name: str) -> str:
        return name + STAR_SUFFIX

    def double_arrows(self) -> List[str]:
        """Q̄ 的箭头：依次为每个 a 与 a_star"""
        result = []
        for name, _, _ in self.arrows:
            result.extend([name, self.star(name)])
        return result

    def _arrow(self, name: str) -> Tuple[str, str, str]:
        for arrow in self.arrows:
            if arrow[0] == name:
                return arrow
        raise StructuralError(f"未知箭头: {name}")

    def base(self, name: str) -> str:
        return name[:-len(STAR_SUFFIX)] if self.is_starred(name) else name

    def is_starred(self, name: str) -> bool:
        return name.endswith(STAR_SUFFIX) and any(a == name[:-len(STAR_SUFFIX)] for a, _, _ in self.arrows)

    def involution(self, name: str) -> str:
        return self.base(name) if self.is_starred(name) else self.star(name)

    def epsilon(self, name: str) -> int:
        return -1 if self.is_starred(name) else 1

    def tail(self, name: str) -> str:
        _, tail, head = self._arrow(self.base(name))
        return head if self.is_starred(name) else tail

    def head(self, name: str) -> str:
        _, tail, head = self._arrow(self.base(name))
        return tail if self.is_starred(name) else head

    def gamma(self, name: str) -> Fraction:
        return self.weights[self.base(name)]

    def o(self, vertex: str, first: str, second: str) -> int:
        """顶点 s 处的排序函数 o_s"""
        order = self.orderings[vertex]
        if first == second or first not in order or second not in order:
            return 0
        return 1 if order.index(first) < order.index(second) else -1

    @property
    def localized_by_inverses(self) -> bool:
        """全部 γ_a = 0 时箭头可逆，矩映射是可约化的字"""
        return all(g == 0 for g in self.weights.values())

    @classmethod
    def from_dict(cls, data: Mapping) -> "QuiverSpec":
        if not isinstance(data, Mapping):
            raise StructuralError("quiver 必须是 JSON 对象", location="quiver")
        try:
            arrows = [tuple(item) for item in data["arrows"]]
        except (KeyError, TypeError):
            raise StructuralError("quiver.arrows 必须是 [名称, 尾, 头] 数组", location="quiver.arrows") from None
        if any(len(item) != 3 for item in arrows):
            raise StructuralError("quiver.arrows 的每一项必须是 [名称, 尾, 头]", location="quiver.arrows")
        return cls(
            vertices=tuple(data.get("vertices", ())),
            arrows=tuple(arrows),
            weights=dict(data.get("weights") or {}),
            orderings={str(k): tuple(v) for k, v in (data.get("orderings") or {}).items()},
        )

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "arrows": [list(a) for a in self.arrows],
            "weights": {a: str(g) for a, g in self.weights.items()},
            "orderings": {s: list(order) for s, order in self.orderings.items()},
        }


def _quiver_generators(q: QuiverSpec) -> List[GeneratorDecl]:
    """γ_a = 0 的箭头（及其对偶）声明为可逆，其余为普通生成元"""
    decls = []
    for name, tail, head in q.arrows:
        make = GeneratorDecl.invertible if q.gamma(name) == 0 else GeneratorDecl.plain
        decls.append(make(name, tail, head))
        decls.append(make(q.star(name), head, tail))
    return decls


def _quiver_factor(A: AlgebraSpec, q: QuiverSpec, x: str) -> Tuple[Optional[NCPoly], Optional[Tuple[str, str, NCPoly]]]:
    """
    Φ_s 中箭头 x 的因子 (γ_x e_s + x x*)^{ε(x)}

    返回 (因子, None)，或在需要形式逆时返回 (None, (名称, 幂等元, 定义元素))；
    γ_x = 0 时用可逆字母直接写出逆元 x*⁻¹x⁻¹。
    """
    s, partner, gamma = q.tail(x), q.involution(x), q.gamma(x)
    if q.epsilon(x) == 1:
        return A.idempotent(s).scale(gamma) + A.path(x, partner), None
    if gamma == 0:
        return A.element(f"{partner}^-1*{x}^-1"), None
    return None, (f"inv_{x}", s, A.idempotent(s).scale(gamma) + A.path(x, partner))


def vdb_algebra(q: QuiverSpec) -> AlgebraSpec:
    """双箭图的路径代数，按 γ 添加可逆字母或形式逆 (γ e + x x*)⁻¹（只对带星号的因子）"""
    base = AlgebraSpec(q.vertices, _quiver_generators(q))
    inverses = []
    for name, _, _ in q.arrows:
        x = q.star(name)
        _, inverse = _quiver_factor(base, q, x)
        if inverse is not None:
            inverses.append(inverse)
    if not inverses:
        return base
    # 形式逆紧跟在它的箭头对之后，与分离箭图融合得到的声明顺序一致
    decls = []
    inverse_decls = {name: GeneratorDecl.formal_inverse(name, at, element) for name, at, element in inverses}
    for decl in base.generators:
        decls.append(decl)
        inverse_name = f"inv_{decl.name}"
        if inverse_name in inverse_decls:
            decls.append(inverse_decls[inverse_name])
    return AlgebraSpec(base.idempotents, decls)


def vdb_moment_map(A: AlgebraSpec, q: QuiverSpec) -> MomentMapSpec:
    """Φ_s = ∏_{x∈T_s}（按 <_s 顺序）(γ_x e_s + x x*)^{ε(x)}"""
    components = {}
    for s in q.vertices:
        phi = A.idempotent(s)
        for x in q.orderings[s]:
            factor, inverse = _quiver_factor(A, q, x)
            phi = phi * (A.gen(inverse[0]) if inverse is not None else factor)
        components[s] = phi
    return MomentMapSpec(A, components)


def _vdb_pair(A: AlgebraSpec, q: QuiverSpec, b: str, c: str) -> Tensor2:
    """闭式括号 ⟪b, c⟫（b, c ∈ Q̄）"""
    half = HALF
    gb, gc = A.gen(b), A.gen(c)
    tb, hb = q.tail(b), q.head(b)
    et, eh = A.idempotent(tb), A.idempotent(hb)
    if b == c:
        square = gb * gb
        return (tensor2(square, et) - tensor2(eh, square)).scale(half * q.o(tb, b, q.involution(b)))
    if c == q.involution(b) and not q.is_starred(b):
        value = tensor2(eh, et).scale(q.gamma(b)) + tensor2(gc * gb, et).scale(half) \
            + tensor2(eh, gb * gc).scale(half)
        return value + (tensor2(gc, gb) - tensor2(gb, gc)).scale(half * q.o(tb, b, c))
    if c == q.involution(b):
        return -_vdb_pair(A, q, c, b).flip()
    b_star, c_star = q.involution(b), q.involution(c)
    return tensor2(gb, gc).scale(-half * q.o(tb, b, c)) \
        + tensor2(gc, gb).scale(-half * q.o(hb, b_star, c_star)) \
        + tensor2(gc * gb, et).scale(half * q.o(tb, b, c_star)) \
        + tensor2(eh, gb * gc).scale(half * q.o(hb, b_star, c))


def vdb_quiver(q: QuiverSpec) -> Bundle:
    """
    箭图 Q̄ 的闭式双拟泊松括号与矩映射

    ⟪a,a⟫ = ½o_{t(a)}(a,a*)(a²⊗e_{t(a)} - e_{h(a)}⊗a²)
    ⟪a,a*⟫ = γ_a e_{h(a)}⊗e_{t(a)} + ½a*a⊗e_{t(a)} + ½e_{h(a)}⊗aa* + ½o_{t(a)}(a,a*)(a*⊗a - a⊗a*)
    ⟪b,c⟫ = -½o_{t(b)}(b,c) b⊗c - ½o_{h(b)}(b*,c*) c⊗b
            + ½o_{t(b)}(b,c*) cb⊗e_{t(b)} + ½o_{h(b)}(b*,c) e_{h(b)}⊗bc   （c ≠ b, b*）
    """
    A = vdb_algebra(q)
    arrows = q.double_arrows()
    values = {}
    for i, b in enumerate(arrows):
        for c in arrows[i:]:
            values[(b, c)] = _vdb_pair(A, q, b, c)
    bracket = DoubleBracketSpec(A, values, name="vdb_quiver")
    return Bundle(bracket, vdb_moment_map(A, q), name="vdb_quiver")


def _sep_vertex(x: str) -> str:
    return f"v_{x}"


def vdb_sep_fusion(q: QuiverSpec) -> Bundle:
    """
    分离箭图构造：每条箭头 b ∈ Q 单独成为 v_b ⇄ v_{b*} 上的 Q̄₁ 块（q1 情形 1b，γ = γ_b，φ = 0），
    直和之后按顶点顺序、按 <_s 顺序依次把 v_{a_{s,k}} (k ≥ 2) 融合到 v_{a_{s,1}} 上，
    最后把 v_{a_{s,1}} 改名为 s
    """
    blocks = []
    for name, _, _ in q.arrows:
        block = q1("1b", gamma=q.gamma(name), phi=0, alpha=HALF, localize=True)
        generator_map = {"t": name, "s": q.star(name)}
        if "inv_b" in block.algebra.generator_names:
            generator_map["inv_b"] = f"inv_{q.star(name)}"
        block = rename(block, generator_map)
        blocks.append(relabel(block, {"1": _sep_vertex(name), "2": _sep_vertex(q.star(name))}))
    for vertex in q.vertices:
        if not q.orderings[vertex]:
            blocks.append(trivial_vertex(f"w_{vertex}"))
    if not blocks:
        raise StructuralError("箭图没有顶点")
    bundle = sum_bundles(blocks)

    final_labels = {}
    for vertex in q.vertices:
        order = q.orderings[vertex]
        if not order:
            final_labels[f"w_{vertex}"] = vertex
            continue
        kept = _sep_vertex(order[0])
        for x in order[1:]:
            bundle = fuse(bundle, kept, _sep_vertex(x))
        final_labels[kept] = vertex
    bundle = relabel(bundle, final_labels)
    bundle = reorder(bundle, list(q.vertices), list(vdb_algebra(q).generator_names))
    bundle.name = bundle.bracket.name = "vdb_sep_fusion"
    logger.debug(f"分离箭图融合完成: {len(q.arrows)} 条箭头, {len(q.vertices)} 个顶点")
    return bundle


# ----------------------------------------------------------------------
# 曲面基本群
# ----------------------------------------------------------------------
@dataclass
class SurfaceSpec:
    """亏格 g、额外边界数 r 的曲面；weights 给出 γ_k^{n_k} = 1 的阶数（可省略）"""
    genus: int
    boundaries: int
    weights: Optional[Tuple[Optional[int], ...]] = None

    def __post_init__(self):
        self.genus, self.boundaries = int(self.genus), int(self.boundaries)
        if self.genus < 0 or self.boundaries < 0:
            raise ParameterError("亏格与边界数必须非负", location="surface")
        if self.genus + self.boundaries < 1:
            raise ParameterError("曲面要求 g + r ≥ 1", location="surface")
        if self.weights is not None:
            self.weights = tuple(None if w is None else int(w) for w in self.weights)
            if len(self.weights) != self.boundaries:
                raise ParameterError(f"weights 的长度必须等于 r = {self.boundaries}", location="weights")
            if any(w is not None and w < 1 for w in self.weights):
                raise ParameterError("weights 中的阶数必须 ≥ 1", location="weights")

    def torsion(self, k: int) -> Optional[int]:
        return None if self.weights is None else self.weights[k - 1]

    def generator_names(self) -> List[str]:
        names = []
        for i in range(1, self.genus + 1):
            names.extend([f"alpha{i}", f"beta{i}"])
        names.extend(f"gamma{k}" for k in range(1, self.boundaries + 1))
        return names


def surface_algebra(spec: SurfaceSpec) -> AlgebraSpec:
    decls = []
    for i in range(1, spec.genus + 1):
        decls.append(GeneratorDecl.invertible(f"alpha{i}", "1", "1"))
        decls.append(GeneratorDecl.invertible(f"beta{i}", "1", "1"))
    for k in range(1, spec.boundaries + 1):
        decls.append(GeneratorDecl.invertible(f"gamma{k}", "1", "1", torsion=spec.torsion(k)))
    return AlgebraSpec(["1"], decls)


def surface(spec: SurfaceSpec) -> Bundle:
    """
    π₁(Σ) 群代数上的双拟泊松括号，Φ = ∏[α_i, β_i] ∏γ_k

    同一柄内：⟪α,α⟫ = ½(α²⊗1-1⊗α²)，⟪β,β⟫ = -½(β²⊗1-1⊗β²)，
    ⟪α,β⟫ = ½(βα⊗1 + 1⊗αβ - α⊗β + β⊗α)；⟪γ_k,γ_k⟫ = ½(γ²⊗1-1⊗γ²)；
    排在前面的生成元 φ 与后面的 ψ 之间是 cross_bracket(φ, ψ)。
    """
    A = surface_algebra(spec)
    one = A.unit()
    values = {}
    for i in range(1, spec.genus + 1):
        a, b = f"alpha{i}", f"beta{i}"
        ga, gb = A.gen(a), A.gen(b)
        values[(a, a)] = loop_bracket(A, a, mu=HALF)
        values[(b, b)] = loop_bracket(A, b, mu=-HALF)
        values[(a, b)] = (tensor2(gb * ga, one) + tensor2(one, ga * gb) - tensor2(ga, gb)
                          + tensor2(gb, ga)).scale(HALF)
    for k in range(1, spec.boundaries + 1):
        c = f"gamma{k}"
        values[(c, c)] = loop_bracket(A, c, mu=HALF)
    # 不同柄、柄与边界、不同边界之间
    blocks = [[f"alpha{i}", f"beta{i}"] for i in range(1, spec.genus + 1)] + \
        [[f"gamma{k}"] for k in range(1, spec.boundaries + 1)]
    for p, block in enumerate(blocks):
        for later in blocks[p + 1:]:
            for first in block:
                for second in later:
                    values[(first, second)] = cross_bracket(A, first, second)

    phi = A.unit()
    for i in range(1, spec.genus + 1):
        phi = phi * A.element(f"alpha{i}*beta{i}*alpha{i}^-1*beta{i}^-1")
    for k in range(1, spec.boundaries + 1):
        phi = phi * A.gen(f"gamma{k}")
    name = f"surface(g={spec.genus},r={spec.boundaries})"
    return Bundle(DoubleBracketSpec(A, values, name=name), MomentMapSpec(A, {"1": phi}), name=name)


def surface_fusion(spec: SurfaceSpec) -> Bundle:
    """
    g 个 A₁ = free2 情形 2（γ = 0，α = μ = 1/2，Φ = [α,β]）与 r 个 A₀ = 𝕜[γ^{±1}]（Φ = γ）
    放在顶点 1, …, g+r 上，依次融合到顶点 1
    """
    parts = []
    label = 0
    for i in range(1, spec.genus + 1):
        label += 1
        handle = free2("2", gamma=0, alpha=HALF, mu=HALF, localize=True)
        handle = rename(handle, {"t": f"alpha{i}", "s": f"beta{i}"})
        parts.append(relabel(handle, {"1": str(label)}))
    for k in range(1, spec.boundaries + 1):
        label += 1
        A = AlgebraSpec([str(label)], [GeneratorDecl.invertible(f"gamma{k}", label, label, torsion=spec.torsion(k))])
        c = f"gamma{k}"
        parts.append(Bundle(DoubleBracketSpec(A, {(c, c): loop_bracket(A, c, mu=HALF)}, name=f"A0[{k}]"),
                            MomentMapSpec(A, {str(label): A.gen(c)})))
    bundle = sum_bundles(parts)
    for other in range(2, label + 1):
        bundle = fuse(bundle, "1", str(other))
    bundle = reorder(bundle, generators=spec.generator_names())
    bundle.name = bundle.bracket.name = f"surface_fusion(g={spec.genus},r={spec.boundaries})"
    return bundle


# ----------------------------------------------------------------------
# 参数与注册表
# ----------------------------------------------------------------------
RATIONAL = "rational"
INTEGER = "int"
BOOLEAN = "bool"
CHOICE = "choice"
INT_LIST = "int_list"
RATIONAL_LIST = "rational_list"
OPTIONAL_INT_LIST = "optional_int_list"
QUIVER = "quiver"
LABEL = "label"

_REQUIRED = object()


@dataclass(frozen=True)
class ParamField:
    name: str
    kind: str
    default: object = _REQUIRED
    choices: Tuple[str, ...] = ()
    help: str = ""

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED

    def describe(self) -> dict:
        info = {"name": self.name, "kind": self.kind}
        if not self.required:
            info["default"] = _describe_default(self.default)
        if self.choices:
            info["choices"] = list(self.choices)
        if self.help:
            info["help"] = self.help
        return info

    def convert(self, value, family: str):
        location = f"{family}.params.{self.name}"
        try:
            if self.kind == RATIONAL:
                return to_fraction(value)
            if self.kind == INTEGER:
                if isinstance(value, bool) or not isinstance(value, (int, str)):
                    raise ValueError(value)
                return int(value)
            if self.kind == BOOLEAN:
                if not isinstance(value, bool):
                    raise ValueError(value)
                return value
            if self.kind == CHOICE:
                text = str(value)
                if text not in self.choices:
                    raise ParameterError(f"{self.name} 必须取 {list(self.choices)} 之一，得到 {text}",
                                         location=location)
                return text
            if self.kind in (INT_LIST, OPTIONAL_INT_LIST):
                if value is None and self.kind == OPTIONAL_INT_LIST:
                    return None
                if not isinstance(value, (list, tuple)):
                    raise ValueError(value)
                return [None if (v is None and self.kind == OPTIONAL_INT_LIST) else int(v) for v in value]
            if self.kind == RATIONAL_LIST:
                if not isinstance(value, (list, tuple)) or len(value) != 3:
                    raise ValueError(value)
                return tuple(to_fraction(v) for v in value)
            if self.kind == QUIVER:
                return QuiverSpec.from_dict(value)
            if self.kind == LABEL:
                return str(value)
        except (ValueError, TypeError):
            raise StructuralError(f"参数 {self.name} 的值不合法: {value!r}", location=location) from None
        raise StructuralError(f"未知的参数类型: {self.kind}", location=location)


def _describe_default(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, tuple):
        return [_describe_default(v) for v in value]
    return value


class FamilyParams(Mapping):
    """某个族的已解析参数；未给出的参数取默认值"""

    def __init__(self, family: str, values: Mapping[str, object]):
        self.family = family
        self._values = dict(values)

    @classmethod
    def parse(cls, family: "CatalogFamily", raw: Optional[Mapping] = None) -> "FamilyParams":
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise StructuralError("params 必须是 JSON 对象", location=f"{family.name}.params")
        raw = dict(raw)
        known = {f.name: f for f in family.fields}
        unknown = sorted(set(raw) - set(known))
        if unknown:
            raise StructuralError(f"{family.name} 不接受参数 {unknown}", location=f"{family.name}.params")
        values = {}
        for name, spec in known.items():
            if name in raw:
                values[name] = spec.convert(raw[name], family.name)
            elif spec.required:
                raise StructuralError(f"{family.name} 缺少必需参数 {name}", location=f"{family.name}.params")
            else:
                values[name] = spec.default
        return cls(family.name, values)

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def to_dict(self) -> dict:
        return {k: _describe_default(v) if not isinstance(v, QuiverSpec) else v.to_dict()
                for k, v in self._values.items()}


@dataclass(frozen=True)
class CatalogFamily:
    name: str
    builder: Callable[[FamilyParams], Bundle]
    fields: Tuple[ParamField, ...]
    description: str

    def build(self, raw: Optional[Mapping] = None) -> Bundle:
        params = FamilyParams.parse(self, raw)
        logger.debug(f"构造目录族 {self.name}: {params.to_dict()}")
        return self.builder(params)

    def schema(self) -> dict:
        return {"name": self.name, "description": self.description,
                "params": [f.describe() for f in self.fields]}


_VALIDATE = ParamField("validate", BOOLEAN, True, help="关闭后允许违反约束（用于扰动测试）")


def _rat(name, default=_REQUIRED, help=""):
    return ParamField(name, RATIONAL, default if default is _REQUIRED else to_fraction(default), help=help)


def _flag(name, default, help=""):
    return ParamField(name, BOOLEAN, default, help=help)


def _families() -> List[CatalogFamily]:
    surface_fields = (
        ParamField("genus", INTEGER, 1),
        ParamField("boundaries", INTEGER, 0),
        ParamField("weights", OPTIONAL_INT_LIST, None, help="γ_k^{n_k} = 1 的阶数"),
    )
    surface_spec = lambda p: SurfaceSpec(p["genus"], p["boundaries"], p["weights"])
    return [
        CatalogFamily(
            "free1",
            lambda p: free1(p["lambda"], p["mu"], p["nu"], p["localize"], p["validate"]),
            (_rat("lambda", 0), _rat("mu", HALF), _rat("nu", 0), _flag("localize", False), _VALIDATE),
            "𝕜[t]: λ(t⊗1-1⊗t)+μ(t²⊗1-1⊗t²)+ν(t²⊗t-t⊗t²), 4(μ²-λν)=1",
        ),
        CatalogFamily(
            "nilpotent_free1",
            lambda p: nilpotent_free1(p["order"], p["mu"], validate=p["validate"]),
            (ParamField("order", INTEGER, 3), _rat("mu", HALF), _VALIDATE),
            "𝕜[x]/(x^k), ⟪x,x⟫ = μ(x²⊗1-1⊗x²), k ≥ 3",
        ),
        CatalogFamily(
            "q1",
            lambda p: q1(p["case"], p["delta"], p["gamma"], p["phi"], p["alpha"], p["lambda"],
                         p["localize"], p["validate"]),
            (ParamField("case", CHOICE, "1a", Q1_CASES), _rat("delta", 1), _rat("gamma", 0), _rat("phi", 0),
             _rat("alpha", HALF), _rat("lambda", 1), _flag("localize", False), _VALIDATE),
            "Q̄₁ (t: 1→2, s: 2→1), cases 1a/1b/2/3",
        ),
        CatalogFamily(
            "q1_pair_fusion",
            lambda p: q1_pair_fusion(p["delta"], p["delta_prime"]),
            (_rat("delta", 1), _rat("delta_prime", 1)),
            "kQ1 ⊕ kQ1' fused twice: δ/2·st⊗e1 + δ'/2·e2⊗ts",
        ),
        CatalogFamily(
            "q1_fusion",
            lambda p: q1_fusion(p["gamma"], p["delta"], p["forward"]),
            (_rat("gamma", 0), _rat("delta", 1), _flag("forward", True)),
            "localized Q̄₁ case 1b fused to one vertex (free2 case 2 with moment map)",
        ),
        CatalogFamily(
            "free2",
            lambda p: free2(p["case"], p["mu"], p["alpha"], p["gamma"], p["gamma0"], p["gamma1"], p["m"],
                            p["n"], p["nu"], p["swap"], p["localize"], p["validate"]),
            (ParamField("case", CHOICE, "1", FREE2_CASES), _rat("mu", HALF), _rat("alpha", HALF),
             _rat("gamma", 0), _rat("gamma0", 0), _rat("gamma1", 0), _rat("m", HALF), _rat("n", 1),
             _rat("nu", 1), _flag("swap", False), _flag("localize", False), _VALIDATE),
            "𝕜⟨t,s⟩, reduced cases 1-7",
        ),
        CatalogFamily(
            "kronecker_pair",
            lambda p: kronecker_pair(p["gamma0"], p["gamma1"], p["alpha"], p["validate"]),
            (_rat("gamma0", 0), _rat("gamma1", 0), _rat("alpha", HALF), _VALIDATE),
            "parallel arrows t, s: 1→2, α² = 1/4 + γ₀γ₁",
        ),
        CatalogFamily(
            "kronecker_fusion",
            lambda p: kronecker_fusion(p["gamma0"], p["gamma1"], p["alpha"], p["forward"]),
            (_rat("gamma0", 0), _rat("gamma1", 0), _rat("alpha", HALF), _flag("forward", True)),
            "kronecker_pair fused to one vertex (free2 case 1)",
        ),
        CatalogFamily(
            "loop_arrow_fusion",
            lambda p: loop_arrow_fusion(p["l"], p["m"], p["n"], p["first_forward"], p["second_forward"],
                                        p["validate"]),
            (_rat("l", 0), _rat("m", HALF), _rat("n", 0), _flag("first_forward", True),
             _flag("second_forward", True), _VALIDATE),
            "kQ1 ⊕ k⟨s⟩ fused twice (free2 cases 3-6)",
        ),
        CatalogFamily(
            "free_pair_fusion",
            lambda p: free_pair_fusion(p["t_params"], p["s_params"], p["forward"], p["validate"]),
            (ParamField("t_params", RATIONAL_LIST, (0, HALF, 0), help="[λ, μ, ν]"),
             ParamField("s_params", RATIONAL_LIST, (0, HALF, 0), help="[l, m, n]"),
             _flag("forward", True), _VALIDATE),
            "k⟨t⟩ ⊕ k⟨s⟩ fused (free2 cases 4, 5, 7)",
        ),
        CatalogFamily(
            "nilpotent_sum",
            lambda p: nilpotent_sum(p["orders"], p["mu"]),
            (ParamField("orders", INT_LIST, [3, 3]), _rat("mu", HALF)),
            "⊕ 𝕜[x_m]/(x_m^k_m) fused onto the first unit",
        ),
        CatalogFamily(
            "vdb_quiver",
            lambda p: vdb_quiver(p["quiver"]),
            (ParamField("quiver", QUIVER, help="{vertices, arrows, weights?, orderings?}"),),
            "closed-form bracket and moment map of a double quiver",
        ),
        CatalogFamily(
            "vdb_sep_fusion",
            lambda p: vdb_sep_fusion(p["quiver"]),
            (ParamField("quiver", QUIVER, help="{vertices, arrows, weights?, orderings?}"),),
            "separated-quiver blocks fused vertex by vertex",
        ),
        CatalogFamily("surface", lambda p: surface(surface_spec(p)), surface_fields,
                      "fundamental group algebra of a surface with boundary"),
        CatalogFamily("surface_fusion", lambda p: surface_fusion(surface_spec(p)), surface_fields,
                      "g copies of A1 and r copies of A0 fused onto one vertex"),
        CatalogFamily(
            "trivial_vertex",
            lambda p: trivial_vertex(p["label"]),
            (ParamField("label", LABEL, "1"),),
            "one idempotent, no generators, Φ = e",
        ),
    ]


_REGISTRY: Optional[Dict[str, CatalogFamily]] = None


def catalog_families() -> Dict[str, CatalogFamily]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = {family.name: family for family in _families()}
    return _REGISTRY


def build_family(name: str, params: Optional[Mapping] = None) -> Bundle:
    families = catalog_families()
    if name not in families:
        raise StructuralError(f"未知的目录族: {name}（可选: {', '.join(families)}）", location="catalog")
    return families[name].build(params)
