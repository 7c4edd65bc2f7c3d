# -*- coding: utf-8 -*-
"""
路径代数核心测试
不依赖任何括号，只检查字的规范化、线性组合运算与结构校验
"""

import random
from fractions import Fraction

import pytest

from dqp_framework.algebra import (
    AlgebraSpec,
    GeneratorDecl,
    Word,
    inner_act,
    normalize,
    outer_act,
    tensor2,
    to_fraction,
)
from dqp_framework.exceptions import StructuralError


@pytest.fixture
def q1_algebra():
    """t: 1→2, s: 2→1"""
    return AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "2", "1")])


@pytest.fixture
def free2_algebra():
    return AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1"), GeneratorDecl.plain("s", "1", "1")])


class TestCoefficients:
    def test_fraction_strings(self):
        assert to_fraction("3/4") == Fraction(3, 4)
        assert to_fraction(-2) == Fraction(-2)
        assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)

    @pytest.mark.parametrize("value", [0.5, True, None, "x/2"])
    def test_rejects_inexact(self, value):
        with pytest.raises(StructuralError):
            to_fraction(value)


class TestStructure:
    def test_duplicate_idempotent(self):
        with pytest.raises(StructuralError):
            AlgebraSpec(["1", "1"])

    def test_unknown_idempotent(self):
        with pytest.raises(StructuralError) as info:
            AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "2")])
        assert info.value.location == "generators[0]"

    def test_name_clash_with_idempotent_symbol(self):
        with pytest.raises(StructuralError):
            AlgebraSpec(["1"], [GeneratorDecl.plain("e1", "1", "1")])

    def test_nilpotent_must_be_loop(self):
        with pytest.raises(StructuralError):
            AlgebraSpec(["1", "2"], [GeneratorDecl("x", "1", "2", "nilpotent", order=3)])

    def test_formal_inverse_cannot_reference_itself(self):
        decl = GeneratorDecl.formal_inverse("y", "1", [(1, Word(("y",)))])
        with pytest.raises(StructuralError):
            AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1"), decl])

    def test_equality_and_hash(self, q1_algebra):
        twin = AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "2", "1")])
        assert twin == q1_algebra
        assert len({twin, q1_algebra}) == 1


class TestWords:
    def test_non_composable_is_zero(self, q1_algebra):
        assert q1_algebra.path("t", "t") == 0
        assert q1_algebra.reduce(["t", "t"]) is None

    def test_composable_path(self, q1_algebra):
        word = q1_algebra.reduce(["t", "s", "t"])
        assert word == Word(("t", "s", "t"))
        assert q1_algebra.word_tail(word) == "1"
        assert q1_algebra.word_head(word) == "2"

    def test_idempotents_act_as_units(self, q1_algebra):
        A = q1_algebra
        assert A.idempotent("1") * A.gen("t") == A.gen("t")
        assert A.gen("t") * A.idempotent("1") == 0
        assert A.unit() * A.gen("s") == A.gen("s")

    def test_free_cancellation(self):
        A = AlgebraSpec(["1", "2"], [GeneratorDecl.invertible("g", "1", "2")])
        assert A.element("g*g^-1") == A.idempotent("1")
        assert A.element("g^-1*g") == A.idempotent("2")
        assert A.reduce(["g", "g^-1", "g"]) == Word(("g",))

    def test_torsion(self):
        A = AlgebraSpec(["1"], [GeneratorDecl.invertible("c", "1", "1", torsion=3)])
        assert A.element("c^-1") == A.element("c^2")
        assert A.element("c^3") == A.unit()
        assert A.element("c^4") == A.gen("c")

    def test_nilpotent(self):
        A = AlgebraSpec(["1"], [GeneratorDecl.nilpotent("x", "1", 3)])
        assert A.element("x^2") != 0
        assert A.element("x^3") == 0
        assert A.gen("x") * A.element("x^2") == 0

    def test_formal_inverse_is_opaque(self, free2_algebra):
        base = free2_algebra
        decl = GeneratorDecl.formal_inverse("y", "1", base.gen("t") + base.scalar(1))
        A = AlgebraSpec(["1"], list(base.generators) + [decl])
        product = A.element("y*t")
        assert len(product) == 1
        assert product.has_formal_inverse()
        assert A.defining_element("y") == A.element("t + 1")
        assert "y" not in A.bracket_generators()

    def test_normalize(self, q1_algebra):
        assert normalize(Word(("t", "s")), q1_algebra) == q1_algebra.path("t", "s")
        assert normalize(Word(("s", "s")), q1_algebra) == 0

    def test_word_lists(self, q1_algebra):
        A = q1_algebra
        assert A.word_from_list(["e2"]) == Word((), "2")
        assert A.word_from_list(["t", "s"]) == Word(("t", "s"))
        assert A.word_from_list(["t", "t"]) is None
        assert A.word_to_list(Word((), "1")) == ["e1"]
        with pytest.raises(StructuralError):
            A.word_from_list(["u"], location="here")

    def test_random_words_are_composable(self, q1_algebra):
        rng = random.Random(7)
        for _ in range(100):
            word = q1_algebra.random_word(rng, 5)
            assert word is not None
            assert q1_algebra.reduce(word.letters, word.idem) == word


class TestCombinations:
    def test_element_parser(self, free2_algebra):
        A = free2_algebra
        p = A.element("1/2*s*t - e1 + 3")
        assert p.terms[Word(("s", "t"))] == Fraction(1, 2)
        assert p.terms[Word((), "1")] == Fraction(2)

    def test_zero_coefficients_vanish(self, free2_algebra):
        A = free2_algebra
        assert A.element("t - t") == 0
        assert len(A.element("t + s - t")) == 1

    def test_str(self, free2_algebra):
        assert str(free2_algebra.element("-1/2*t")) == "-1/2*t"
        assert str(free2_algebra.zero()) == "0"

    def test_bimodule_actions(self, free2_algebra):
        A = free2_algebra
        t, s = A.gen("t"), A.gen("s")
        d = tensor2(t, t)
        assert outer_act(s, d, s) == tensor2(s * t, t * s)
        assert inner_act(s, d, s) == tensor2(t * s, s * t)

    def test_zero_factor_annihilates(self, free2_algebra):
        A = free2_algebra
        t = A.gen("t")
        d = tensor2(t, t)
        assert outer_act(None, d, A.zero()) == 0
        assert outer_act(A.zero(), d, None) == 0
        assert inner_act(A.zero(), d, None) == 0
        assert inner_act(t, d, A.zero()) == 0
        assert outer_act(None, d, None) == d

    def test_flip_and_tau(self, free2_algebra):
        A = free2_algebra
        assert A.pair("t", "s").flip() == A.pair("s", "t")
        assert A.triple("t", "s", "e1").tau() == A.triple("e1", "t", "s")
        assert A.triple("t", "s", "e1").tau(3) == A.triple("t", "s", "e1")

    def test_mixing_algebras_is_an_error(self, free2_algebra, q1_algebra):
        with pytest.raises(StructuralError):
            free2_algebra.gen("t") + q1_algebra.gen("t")


class TestRenaming:
    def test_relabel_idempotents(self, q1_algebra):
        target, word_map = q1_algebra.relabel_idempotents({"1": "a", "2": "b"})
        assert target.idempotents == ("a", "b")
        assert word_map(q1_algebra.path("t", "s")) == target.path("t", "s")
        assert word_map(q1_algebra.idempotent("2")) == target.idempotent("b")

    def test_rename_generators(self, free2_algebra):
        target, word_map = free2_algebra.rename_generators({"t": "s", "s": "t"})
        assert word_map(free2_algebra.element("t*s")) == target.element("s*t")

    def test_direct_sum(self, q1_algebra):
        other = AlgebraSpec(["3"], [GeneratorDecl.plain("u", "3", "3")])
        total = q1_algebra.direct_sum(other)
        assert total.idempotents == ("1", "2", "3")
        assert total.path("t", "u") == 0
        with pytest.raises(StructuralError):
            q1_algebra.direct_sum(q1_algebra)
