# -*- coding: utf-8 -*-
"""
JSON 数据包的读写与结构错误的定位
"""

import json

import pytest

from dqp_framework.brackets import bracket_equal, moment_map_equal
from dqp_framework.catalog import free1, nilpotent_free1, surface, SurfaceSpec
from dqp_framework.exceptions import StructuralError
from dqp_framework.serialization import (
    algebra_from_json,
    algebra_to_json,
    bundle_from_json,
    bundle_to_json,
    load_bundle,
    poly_from_json,
    poly_to_json,
    write_json,
)

LOOP_BUNDLE = {
    "name": "loop",
    "algebra": {"idempotents": ["1"], "generators": [{"name": "t", "tail": "1", "head": "1"}]},
    "bracket": {"pairs": [{"left": "t", "right": "t", "value": [
        {"coeff": "1/2", "w1": ["t", "t"], "w2": ["e1"]},
        {"coeff": "-1/2", "w1": ["e1"], "w2": ["t", "t"]},
    ]}]},
}


class TestBundles:
    def test_load_document(self):
        bundle = bundle_from_json(LOOP_BUNDLE)
        assert bundle.name == "loop"
        assert bracket_equal(bundle.bracket, free1().bracket).passed

    @pytest.mark.parametrize("bundle", [
        free1(lam=1, mu="-1/2", localize=True),
        nilpotent_free1(4, mu="-1/2"),
        surface(SurfaceSpec(0, 1, weights=(3,))),
    ])
    def test_dump_and_load(self, bundle):
        restored = bundle_from_json(json.loads(json.dumps(bundle_to_json(bundle))))
        assert restored.algebra == bundle.algebra
        assert bracket_equal(restored.bracket, bundle.bracket).passed
        if bundle.moment_map is not None:
            assert moment_map_equal(restored.moment_map, bundle.moment_map).passed

    def test_formal_inverse_kind(self):
        data = algebra_to_json(free1(lam=1, mu="-1/2", localize=True).algebra)
        kind = data["generators"][1]["kind"]
        assert kind["formal_inverse"]["at"] == "1"
        assert {"coeff": "-1", "word": ["e1"]} in kind["formal_inverse"]["element"]

    def test_file_round_trip(self, tmp_path):
        target = tmp_path / "out" / "bundle.json"
        write_json(bundle_to_json(free1()), target)
        assert bracket_equal(load_bundle(target).bracket, free1().bracket).passed


class TestErrors:
    def test_duplicate_pair(self):
        data = json.loads(json.dumps(LOOP_BUNDLE))
        data["bracket"]["pairs"].append(data["bracket"]["pairs"][0])
        with pytest.raises(StructuralError) as info:
            bundle_from_json(data)
        assert info.value.location == "bracket.pairs[1]"

    def test_float_coefficient(self):
        data = json.loads(json.dumps(LOOP_BUNDLE))
        data["bracket"]["pairs"][0]["value"][0]["coeff"] = 0.5
        with pytest.raises(StructuralError) as info:
            bundle_from_json(data)
        assert info.value.location == "bracket.pairs[0].value[0].coeff"

    def test_unknown_letter(self):
        data = json.loads(json.dumps(LOOP_BUNDLE))
        data["bracket"]["pairs"][0]["value"][0]["w1"] = ["u"]
        with pytest.raises(StructuralError):
            bundle_from_json(data)

    def test_unknown_kind(self):
        with pytest.raises(StructuralError) as info:
            algebra_from_json({"idempotents": ["1"], "generators": [
                {"name": "t", "tail": "1", "head": "1", "kind": {"unipotent": 2}}]})
        assert info.value.location == "algebra.generators[0].kind"

    @pytest.mark.parametrize("kind, location", [
        ({"nilpotent": "three"}, "algebra.generators[0].kind"),
        ({"nilpotent": 2.0}, "algebra.generators[0].kind"),
        ({"invertible": {"torsion": "x"}}, "algebra.generators[0].kind.torsion"),
    ])
    def test_malformed_order(self, kind, location):
        with pytest.raises(StructuralError) as info:
            algebra_from_json({"idempotents": ["1"], "generators": [
                {"name": "t", "tail": "1", "head": "1", "kind": kind}]})
        assert info.value.location == location

    def test_nilpotent_must_be_a_loop(self):
        with pytest.raises(StructuralError) as info:
            algebra_from_json({"idempotents": ["1", "2"], "generators": [
                {"name": "t", "tail": "1", "head": "2", "kind": {"nilpotent": 3}}]})
        assert info.value.location == "algebra.generators[0]"

    def test_missing_bracket(self):
        with pytest.raises(StructuralError):
            bundle_from_json({"algebra": LOOP_BUNDLE["algebra"]})

    def test_unknown_default(self):
        data = dict(LOOP_BUNDLE, bracket={"pairs": [], "default": "one"})
        with pytest.raises(StructuralError):
            bundle_from_json(data)


class TestElements:
    def test_string_element(self):
        A = free1().algebra
        assert poly_from_json(A, "1/2*t*t - e1") == A.element("1/2*t^2 - 1")

    def test_non_composable_words_drop_out(self):
        A = nilpotent_free1(3).algebra
        p = poly_from_json(A, [{"coeff": "1", "word": ["x", "x", "x"]}, {"coeff": "2", "word": ["x"]}])
        assert poly_to_json(p) == [{"coeff": "2", "word": ["x"]}]
