# -*- coding: utf-8 -*-
"""
双括号求值与各检查器的测试
"""

import pytest

from dqp_framework.algebra import AlgebraSpec, GeneratorDecl, Tensor2, tensor2
from dqp_framework.brackets import (
    Bundle,
    CheckReport,
    DoubleBracketSpec,
    MomentMapSpec,
    bracket_equal,
    check_cyclic_antisymmetry,
    check_double_poisson,
    check_gauge_consistency,
    check_leibniz,
    check_moment_map,
    check_quasi_poisson,
    check_triple_sampled,
    differential_double,
    eval_double,
    partial_derivation,
    qp_anomaly,
    restrict_to_corner,
    triple_bracket,
    zero_bracket,
)
from dqp_framework.catalog import free1, nilpotent_free1, q1, sum_bundles
from dqp_framework.exceptions import DeferToNumericError, SpecIncompleteError, StructuralError


@pytest.fixture
def loop_algebra():
    return AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1")])


@pytest.fixture
def free2_algebra():
    return AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1"), GeneratorDecl.plain("s", "1", "1")])


class TestCheckReport:
    def test_record_and_merge(self, loop_algebra):
        report = CheckReport("demo")
        assert report.record(("t",), loop_algebra.zero())
        assert not report.record(("t",), loop_algebra.gen("t"))
        other = CheckReport("other", checked=3)
        report.merge(other)
        assert report.checked == 5
        assert not report.passed
        data = report.to_dict()
        assert data["witnesses"][0] == {"input": ["t"], "residual": "t"}


class TestBracketSpec:
    def test_reverse_pair_is_filled(self, free2_algebra):
        A = free2_algebra
        value = A.pair("s*t", "e1") - A.pair("t", "s")
        br = DoubleBracketSpec(A, {("t", "s"): value}, default_zero=True)
        assert br.value("s", "t") == -value.flip()
        assert br.value("t", "t") == 0

    def test_missing_pair(self, free2_algebra):
        br = DoubleBracketSpec(free2_algebra, {("t", "t"): Tensor2(free2_algebra)})
        with pytest.raises(SpecIncompleteError) as info:
            eval_double(br, "t", "s*t")
        assert info.value.pair == ("t", "s")

    def test_unknown_generator(self, free2_algebra):
        with pytest.raises(StructuralError):
            DoubleBracketSpec(free2_algebra, {("t", "u"): Tensor2(free2_algebra)})

    def test_idempotent_typing(self):
        A = AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "2", "1")])
        with pytest.raises(StructuralError) as info:
            DoubleBracketSpec(A, {("t", "t"): A.pair("e1", "e1")})
        assert info.value.location == "pair(t,t)"
        # e2·A·e1 ⊗ e1·A·e2 的合法值
        DoubleBracketSpec(A, {("t", "s"): A.pair("s*t", "e1")}, default_zero=True)

    def test_idempotents_bracket_to_zero(self):
        br = free1().bracket
        assert eval_double(br, "e1", "t*t") == 0
        assert eval_double(br, "t", "3") == 0

    def test_leibniz_on_words(self):
        br = free1().bracket
        A = br.algebra
        # ⟪t, t²⟫ = ⟪t,t⟫·t + t·⟪t,t⟫（外作用）
        tt = br.value("t", "t")
        expected = Tensor2(A)
        for (w1, w2), c in tt.terms.items():
            expected = expected + tensor2(A.word_element(w1), A.word_element(w2) * A.gen("t")).scale(c) \
                + tensor2(A.gen("t") * A.word_element(w1), A.word_element(w2)).scale(c)
        assert eval_double(br, "t", "t^2") == expected

    def test_add_and_scale(self):
        br = free1().bracket
        double = br + br
        assert double.value("t", "t") == br.scale(2).value("t", "t")


class TestQuasiPoisson:
    def test_free1_passes(self):
        report = check_quasi_poisson(free1().bracket)
        assert report.passed
        assert report.checked == 1

    @pytest.mark.parametrize("lam, mu, nu", [(0, "-1/2", 0), (1, "1/2", 0), (1, 0, "-1/4")])
    def test_free1_family(self, lam, mu, nu):
        assert check_quasi_poisson(free1(lam, mu, nu).bracket).passed

    def test_wrong_normalisation_fails(self):
        report = check_quasi_poisson(free1(mu=1, validate=False).bracket)
        assert not report.passed
        assert report.witnesses[0].input == ("t", "t", "t")

    def test_zero_bracket_fails(self, loop_algebra):
        assert not check_quasi_poisson(zero_bracket(loop_algebra)).passed

    def test_anomaly_of_one_loop(self, loop_algebra):
        A = loop_algebra
        expected = (A.triple("t^2", "t", "e1") - A.triple("t^2", "e1", "t") - A.triple("t", "t^2", "e1")
                    + A.triple("t", "e1", "t^2") + A.triple("e1", "t^2", "t") - A.triple("e1", "t", "t^2")).scale("1/4")
        assert qp_anomaly(A, "t", "t", "t") == expected

    def test_triple_bracket_is_tau_invariant(self):
        br = q1("1a").bracket
        A = br.algebra
        a, b, c = A.gen("t"), A.gen("s"), A.path("t", "s", "t")
        assert triple_bracket(br, a, b, c) == triple_bracket(br, b, c, a).tau()

    @pytest.mark.parametrize("case", ["1a", "2", "3"])
    def test_q1_cases(self, case):
        assert check_quasi_poisson(q1(case, delta=-1).bracket).passed

    def test_sampled_words(self):
        assert check_triple_sampled(free1().bracket, samples=20, seed=3, max_length=3).passed


class TestSampledChecks:
    def test_cyclic_antisymmetry(self):
        report = check_cyclic_antisymmetry(q1("2").bracket, samples=40, seed=1)
        assert report.passed
        assert report.checked == 4 + 40

    def test_leibniz(self):
        report = check_leibniz(q1("1b", gamma=1, phi=0, alpha="1/2").bracket, samples=30, seed=5)
        assert report.passed


class TestDerivations:
    def test_partial_derivation_on_word(self, free2_algebra):
        A = free2_algebra
        d_t = partial_derivation(A, "t")
        assert d_t(A.path("t", "s", "t")) == A.pair("e1", "s*t") + A.pair("t*s", "e1")
        assert d_t(A.gen("s")) == 0

    def test_symplectic_bivector_is_double_poisson(self, free2_algebra):
        A = free2_algebra
        br = differential_double(partial_derivation(A, "t"), partial_derivation(A, "s"))
        assert br.value("t", "s") == A.pair("e1", "e1")
        assert br.value("s", "t") == -A.pair("e1", "e1")
        assert check_double_poisson(br).passed
        assert check_cyclic_antisymmetry(br, samples=10).passed

    @pytest.mark.parametrize("algebra", [
        AlgebraSpec(["1"], [GeneratorDecl.plain("t", "1", "1")]),
        AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "2", "1")]),
    ])
    def test_gauge_trivector_matches_anomaly(self, algebra):
        assert check_gauge_consistency(algebra).passed


class TestMomentMap:
    @pytest.mark.parametrize("lam", [0, 1, "-2/3"])
    def test_free1_moment_map(self, lam):
        bundle = free1(lam=lam, localize=True)
        assert check_moment_map(bundle.bracket, bundle.moment_map).passed

    def test_wrong_moment_map_fails(self):
        bundle = free1(localize=True)
        A = bundle.algebra
        wrong = MomentMapSpec(A, {"1": A.element("t^2")})
        assert not check_moment_map(bundle.bracket, wrong).passed

    def test_formal_inverse_defers(self):
        bundle = free1(lam=1, mu="-1/2", localize=True)
        with pytest.raises(DeferToNumericError):
            check_moment_map(bundle.bracket, bundle.moment_map)

    def test_component_typing(self):
        A = AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "2", "1")])
        with pytest.raises(StructuralError):
            MomentMapSpec(A, {"1": A.gen("t"), "2": A.idempotent("2")})
        with pytest.raises(StructuralError):
            MomentMapSpec(A, {"1": A.idempotent("1")})

    def test_bundle_rejects_foreign_moment_map(self, loop_algebra):
        other = AlgebraSpec(["2"])
        with pytest.raises(StructuralError):
            Bundle(zero_bracket(loop_algebra), MomentMapSpec(other, {"2": other.idempotent("2")}))


class TestCorner:
    def test_direct_sum_is_quasi_poisson(self):
        bundle = sum_bundles([free1(), nilpotent_free1(3, label="2")])
        assert bundle.bracket.value("t", "x") == 0
        assert check_quasi_poisson(bundle.bracket).passed

    def test_restrict_to_summand(self):
        bundle = sum_bundles([free1(), nilpotent_free1(3, label="2")])
        corner = restrict_to_corner(bundle.bracket, ["1"])
        assert corner.algebra.generator_names == ("t",)
        assert bracket_equal(corner, free1().bracket).passed
