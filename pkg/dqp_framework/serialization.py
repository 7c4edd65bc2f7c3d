# -*- encoding: UTF-8 -*-
"""
JSON 格式

- 代数：{"idempotents": [...], "generators": [{"name","tail","head","kind"}, ...]}
- 元素：[{"coeff": "1/2", "word": ["s", "t"]}, ...]；长度为 0 的字写作 ["e1"]
- 双括号：{"pairs": [{"left","right","value": [{"coeff","w1","w2"}]}], "default": "zero"?}
- 矩映射：{"components": {"1": [{coeff, word}], ...}}
- 数据包：{"name"?, "algebra", "bracket", "moment_map"?}

系数一律是精确的分数字符串，浮点数被拒绝。
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .algebra import (
    INVERTIBLE,
    NILPOTENT,
    PLAIN,
    AlgebraSpec,
    GeneratorDecl,
    NCPoly,
    Tensor2,
    Tensor3,
    Word,
    _accumulate,
    format_fraction,
    to_fraction,
)
from .brackets import Bundle, CheckReport, DoubleBracketSpec, MomentMapSpec
from .exceptions import StructuralError


def _require_mapping(data, location: str) -> Mapping:
    if not isinstance(data, Mapping):
        raise StructuralError("期望 JSON 对象", location=location)
    return data


def _require_list(data, location: str) -> list:
    if not isinstance(data, list):
        raise StructuralError("期望 JSON 数组", location=location)
    return data


def _coeff(value, location: str) -> Fraction:
    try:
        return to_fraction(value)
    except StructuralError as exc:
        raise StructuralError(exc.message, location=location) from None


def _order(value, location: str) -> int:
    if isinstance(value, (bool, float)):
        raise StructuralError(f"阶必须是整数，得到 {value!r}", location=location)
    try:
        return int(value)
    except (TypeError, ValueError):
        raise StructuralError(f"阶必须是整数，得到 {value!r}", location=location) from None


# ----------------------------------------------------------------------
# 代数
# ----------------------------------------------------------------------
def _kind_to_json(decl: GeneratorDecl, algebra: AlgebraSpec):
    if decl.kind == PLAIN:
        return "plain"
    if decl.kind == INVERTIBLE:
        return "invertible" if decl.torsion is None else {"invertible": {"torsion": decl.torsion}}
    if decl.kind == NILPOTENT:
        return {"nilpotent": decl.order}
    element = algebra.defining_element(decl.name)
    return {"formal_inverse": {"at": decl.at, "element": poly_to_json(element)}}


def algebra_to_json(algebra: AlgebraSpec) -> dict:
    return {
        "idempotents": list(algebra.idempotents),
        "generators": [
            {"name": g.name, "tail": g.tail, "head": g.head, "kind": _kind_to_json(g, algebra)}
            for g in algebra.generators
        ],
    }


def _raw_word(items, idempotents: Sequence[str], names: Sequence[str], location: str) -> Word:
    """未约化的字，供形式逆的定义元素使用（约化与校验在 AlgebraSpec 中完成）"""
    if not isinstance(items, list) or not items or not all(isinstance(x, str) for x in items):
        raise StructuralError("字必须是非空的字符串数组", location=location)
    if len(items) == 1 and items[0] not in names and items[0].startswith("e") and items[0][1:] in idempotents:
        return Word((), items[0][1:])
    return Word(tuple(items))


def algebra_from_json(data) -> AlgebraSpec:
    data = _require_mapping(data, "algebra")
    idempotents = [str(s) for s in _require_list(data.get("idempotents"), "algebra.idempotents")]
    raw = _require_list(data.get("generators", []), "algebra.generators")
    names = [str(_require_mapping(g, f"algebra.generators[{i}]").get("name")) for i, g in enumerate(raw)]
    decls = []
    for index, item in enumerate(raw):
        location = f"algebra.generators[{index}]"
        for key in ("name", "tail", "head"):
            if key not in item:
                raise StructuralError(f"生成元缺少字段 {key}", location=location)
        name, tail, head = str(item["name"]), str(item["tail"]), str(item["head"])
        kind = item.get("kind", "plain")
        if kind == "plain":
            decls.append(GeneratorDecl.plain(name, tail, head))
        elif kind == "invertible":
            decls.append(GeneratorDecl.invertible(name, tail, head))
        elif isinstance(kind, Mapping) and len(kind) == 1:
            (label, payload), = kind.items()
            if label == "invertible":
                torsion = _require_mapping(payload, f"{location}.kind").get("torsion")
                if torsion is not None:
                    torsion = _order(torsion, f"{location}.kind.torsion")
                decls.append(GeneratorDecl.invertible(name, tail, head, torsion=torsion))
            elif label == "nilpotent":
                if tail != head:
                    raise StructuralError(f"幂零生成元 {name} 必须是环 (tail = head)", location=location)
                decls.append(GeneratorDecl.nilpotent(name, tail, _order(payload, f"{location}.kind")))
            elif label == "formal_inverse":
                payload = _require_mapping(payload, f"{location}.kind")
                at = str(payload.get("at", tail))
                terms = []
                for k, term in enumerate(_require_list(payload.get("element"), f"{location}.kind.element")):
                    where = f"{location}.kind.element[{k}]"
                    term = _require_mapping(term, where)
                    terms.append((_coeff(term.get("coeff"), where),
                                  _raw_word(term.get("word"), idempotents, names, where)))
                decls.append(GeneratorDecl.formal_inverse(name, at, terms))
            else:
                raise StructuralError(f"未知的生成元种类: {label}", location=f"{location}.kind")
        else:
            raise StructuralError(f"未知的生成元种类: {kind!r}", location=f"{location}.kind")
    return AlgebraSpec(idempotents, decls)


# ----------------------------------------------------------------------
# 元素与张量
# ----------------------------------------------------------------------
def poly_to_json(p: NCPoly) -> List[dict]:
    A = p.algebra
    return [{"coeff": format_fraction(c), "word": A.word_to_list(w)} for w, c in p.items()]


def _word(algebra: AlgebraSpec, items, location: str) -> Optional[Word]:
    return algebra.word_from_list(items, location=location)


def poly_from_json(algebra: AlgebraSpec, data, location: str = "element") -> NCPoly:
    """
    元素；不可复合（或因幂零关系为 0）的字直接略去

    也接受 "1/2*s*t - e1" 形式的字符串。
    """
    if isinstance(data, str):
        return algebra.element(data)
    terms: Dict[Word, Fraction] = {}
    for index, term in enumerate(_require_list(data, location)):
        where = f"{location}[{index}]"
        term = _require_mapping(term, where)
        word = _word(algebra, term.get("word"), f"{where}.word")
        if word is not None:
            _accumulate(terms, word, _coeff(term.get("coeff"), f"{where}.coeff"))
    return NCPoly._raw(algebra, terms)


def tensor2_to_json(t: Tensor2) -> List[dict]:
    A = t.algebra
    return [{"coeff": format_fraction(c), "w1": A.word_to_list(a), "w2": A.word_to_list(b)}
            for (a, b), c in t.items()]


def tensor3_to_json(t: Tensor3) -> List[dict]:
    A = t.algebra
    return [{"coeff": format_fraction(c), "w1": A.word_to_list(a), "w2": A.word_to_list(b),
             "w3": A.word_to_list(z)} for (a, b, z), c in t.items()]


def tensor2_from_json(algebra: AlgebraSpec, data, location: str = "value") -> Tensor2:
    terms: Dict[Tuple[Word, Word], Fraction] = {}
    for index, term in enumerate(_require_list(data, location)):
        where = f"{location}[{index}]"
        term = _require_mapping(term, where)
        first = _word(algebra, term.get("w1"), f"{where}.w1")
        second = _word(algebra, term.get("w2"), f"{where}.w2")
        if first is not None and second is not None:
            _accumulate(terms, (first, second), _coeff(term.get("coeff"), f"{where}.coeff"))
    return Tensor2._raw(algebra, terms)


# ----------------------------------------------------------------------
# 双括号、矩映射、数据包
# ----------------------------------------------------------------------
def bracket_to_json(br: DoubleBracketSpec) -> dict:
    """只写出声明顺序下 g ≤ h 的生成元对，另一方向由循环反对称补齐"""
    names = list(br.algebra.bracket_generators())
    pairs = []
    for i, g in enumerate(names):
        for h in names[i:]:
            if br.has_pair(g, h):
                pairs.append({"left": g, "right": h, "value": tensor2_to_json(br.value(g, h))})
    data = {"name": br.name, "pairs": pairs}
    if br.default_zero:
        data["default"] = "zero"
    return data


def bracket_from_json(algebra: AlgebraSpec, data) -> DoubleBracketSpec:
    data = _require_mapping(data, "bracket")
    default = data.get("default")
    if default not in (None, "zero"):
        raise StructuralError(f"未知的 default: {default!r}", location="bracket.default")
    values = {}
    for index, item in enumerate(_require_list(data.get("pairs", []), "bracket.pairs")):
        where = f"bracket.pairs[{index}]"
        item = _require_mapping(item, where)
        if "left" not in item or "right" not in item:
            raise StructuralError("括号值缺少 left/right", location=where)
        key = (str(item["left"]), str(item["right"]))
        if key in values:
            raise StructuralError(f"生成元对 {key} 重复", location=where)
        values[key] = tensor2_from_json(algebra, item.get("value", []), f"{where}.value")
    return DoubleBracketSpec(algebra, values, default_zero=default == "zero", name=data.get("name"))


def moment_map_to_json(mm: MomentMapSpec) -> dict:
    return {"components": {label: poly_to_json(mm.component(label)) for label in mm.algebra.idempotents}}


def moment_map_from_json(algebra: AlgebraSpec, data) -> MomentMapSpec:
    data = _require_mapping(data, "moment_map")
    components = _require_mapping(data.get("components"), "moment_map.components")
    return MomentMapSpec(algebra, {
        str(label): poly_from_json(algebra, value, f"moment_map.components.{label}")
        for label, value in components.items()
    })


def bundle_to_json(bundle: Bundle) -> dict:
    data = {
        "name": bundle.name,
        "algebra": algebra_to_json(bundle.algebra),
        "bracket": bracket_to_json(bundle.bracket),
    }
    if bundle.moment_map is not None:
        data["moment_map"] = moment_map_to_json(bundle.moment_map)
    return data


def bundle_from_json(data) -> Bundle:
    data = _require_mapping(data, "bundle")
    if "algebra" not in data or "bracket" not in data:
        raise StructuralError("数据包必须包含 algebra 与 bracket", location="bundle")
    algebra = algebra_from_json(data["algebra"])
    bracket = bracket_from_json(algebra, data["bracket"])
    moment_map = None
    if data.get("moment_map") is not None:
        moment_map = moment_map_from_json(algebra, data["moment_map"])
    return Bundle(bracket, moment_map, name=data.get("name") or bracket.name)


def report_to_json(report: CheckReport) -> dict:
    return report.to_dict()


# ----------------------------------------------------------------------
# 文件
# ----------------------------------------------------------------------
def load_json(source: Union[str, Path]) -> Any:
    """读取 UTF-8 JSON 文件；"-" 表示标准输入"""
    if str(source) == "-":
        return json.load(sys.stdin)
    with open(source, 'r', encoding='utf-8') as file:
        return json.load(file)


def dumps(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2)


def write_json(data, target: Optional[Union[str, Path]] = None):
    """写到文件，target 为空时写到标准输出"""
    text = dumps(data)
    if target is None or str(target) == "-":
        sys.stdout.write(text + "\n")
        return
    path = Path(target)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding='utf-8')


def load_bundle(source: Union[str, Path]) -> Bundle:
    return bundle_from_json(load_json(source))
