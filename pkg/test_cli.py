# -*- coding: utf-8 -*-
"""
命令行：退出码与 JSON 输出
"""

import json

import pytest

from dqp_framework.cli import EXIT_ERROR, EXIT_FAILED, EXIT_PASS, main

BROKEN_BUNDLE = {
    "algebra": {"idempotents": ["1"], "generators": [{"name": "t", "tail": "1", "head": "1"}]},
    "bracket": {"pairs": [{"left": "t", "right": "t", "value": [{"coeff": "1", "w1": ["t"], "w2": ["e1"]}]}]},
}


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def bundle_file(tmp_path):
    def write(data, name="bundle.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write


class TestCheck:
    def test_free1_passes(self, capsys):
        code, out = run(capsys, "check", "--catalog", "free1", "--params", '{"mu": "1/2"}', "--random-words", "5")
        assert code == EXIT_PASS
        document = json.loads(out)
        assert document["passed"]
        assert [r["passed"] for r in document["reports"]] == [True, True]

    def test_parameter_error(self, capsys):
        code, out = run(capsys, "check", "--catalog", "free1", "--params", '{"mu": "1"}')
        assert code == EXIT_ERROR
        assert json.loads(out)["error"] == "ParameterError"

    def test_broken_antisymmetry(self, capsys, bundle_file):
        code, out = run(capsys, "check", "--bundle", bundle_file(BROKEN_BUNDLE), "--random-words", "3")
        assert code == EXIT_FAILED
        antisymmetry = json.loads(out)["reports"][0]
        assert not antisymmetry["passed"]
        assert antisymmetry["witnesses"][0]["input"][:2] == ["t", "t"]

    def test_moment_map_with_formal_inverse(self, capsys):
        params = '{"lambda": "1", "mu": "-1/2", "localize": true}'
        code, out = run(capsys, "check", "--catalog", "free1", "--params", params, "--dim", "2", "--trials", "1")
        assert code == EXIT_PASS
        assert len(json.loads(out)["reports"]) == 3

    def test_bad_params_json(self, capsys):
        code, out = run(capsys, "check", "--catalog", "free1", "--params", "{mu")
        assert code == EXIT_ERROR
        assert json.loads(out)["error"] == "StructuralError"

    def test_malformed_generator_kind(self, capsys, bundle_file):
        data = json.loads(json.dumps(BROKEN_BUNDLE))
        data["algebra"]["generators"][0]["kind"] = {"nilpotent": "three"}
        code, out = run(capsys, "check", "--bundle", bundle_file(data))
        assert code == EXIT_ERROR
        document = json.loads(out)
        assert document["error"] == "StructuralError"
        assert document["location"] == "algebra.generators[0].kind"

    def test_bundle_and_catalog_are_exclusive(self, capsys, bundle_file):
        code, _ = run(capsys, "check", "--catalog", "free1", "--bundle", bundle_file(BROKEN_BUNDLE))
        assert code == EXIT_ERROR


class TestFuse:
    def test_unknown_idempotent(self, capsys):
        code, out = run(capsys, "fuse", "--catalog", "q1", "--steps", "1<-9")
        assert code == EXIT_ERROR
        assert json.loads(out)["error"] == "StructuralError"

    def test_fuse_with_recheck(self, capsys):
        code, out = run(capsys, "fuse", "--catalog", "kronecker_pair", "--steps", "1<-2", "--recheck")
        assert code == EXIT_PASS
        document = json.loads(out)
        assert document["algebra"]["idempotents"] == ["1"]
        assert all(r["passed"] for r in document["reports"])


class TestOtherCommands:
    def test_catalog_build(self, capsys):
        code, out = run(capsys, "catalog", "build", "q1", "--params", '{"case": "2"}')
        assert code == EXIT_PASS
        assert json.loads(out)["algebra"]["idempotents"] == ["1", "2"]

    def test_catalog_list_to_file(self, capsys, tmp_path):
        target = tmp_path / "families.json"
        code, _ = run(capsys, "catalog", "list", "--output", str(target))
        assert code == EXIT_PASS
        names = [family["name"] for family in json.loads(target.read_text(encoding="utf-8"))]
        assert "surface" in names

    def test_rep(self, capsys):
        code, out = run(capsys, "rep", "--catalog", "free1", "--mode", "qp", "--dim", "2")
        assert code == EXIT_PASS
        assert json.loads(out)["passed"]

    def test_triple(self, capsys):
        code, out = run(capsys, "triple", "--catalog", "free1", "--a", "t", "--b", "t", "--c", "t")
        assert code == EXIT_PASS
        assert json.loads(out)["equal"]

    def test_emit(self, capsys):
        code, out = run(capsys, "emit", "--catalog", "free1", "--params", '{"localize": true}')
        assert code == EXIT_PASS
        assert "⟪t,t⟫ = " in out
        assert "Φ_1 = t" in out
