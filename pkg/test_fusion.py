# -*- coding: utf-8 -*-
"""
融合：生成元类型、融合项闭式表、κ 消失、逐步融合
"""

import pytest

from dqp_framework.algebra import AlgebraSpec, GeneratorDecl
from dqp_framework.brackets import (
    bracket_equal,
    check_moment_map,
    check_quasi_poisson,
    moment_map_equal,
)
from dqp_framework.catalog import QuiverSpec, free2, kronecker_pair, q1, q1_fusion, vdb_quiver
from dqp_framework.exceptions import StructuralError
from dqp_framework.fusion import (
    FIRST,
    FOURTH,
    SECOND,
    THIRD,
    check_fusion_table,
    check_kappa,
    fuse_algebra,
    fuse_sequence,
    fused_bracket,
    fused_moment_map,
    parse_steps,
    trE,
    trE_sum_check,
)


@pytest.fixture
def four_type_bundle():
    """融合 1 ← 2 时 l、l_star 为 first，a_star 为 second，a 为 third，m、m_star 为 fourth"""
    return vdb_quiver(QuiverSpec(
        vertices=("1", "2"),
        arrows=(("a", "1", "2"), ("l", "1", "1"), ("m", "2", "2")),
        weights={"a": 0, "l": 0, "m": 0},
    ))


class TestFusionContext:
    def test_types_and_result(self, four_type_bundle):
        ctx = fuse_algebra(four_type_bundle.algebra, "1", "2")
        assert ctx.types == {"a": THIRD, "a_star": SECOND, "l": FIRST, "l_star": FIRST,
                             "m": FOURTH, "m_star": FOURTH}
        assert ctx.result.idempotents == ("1",)
        assert all(g.tail == "1" and g.head == "1" for g in ctx.result.generators)

    def test_word_map_glues_paths(self):
        A = AlgebraSpec(["1", "2"], [GeneratorDecl.plain("t", "1", "2"), GeneratorDecl.plain("s", "1", "2")])
        ctx = fuse_algebra(A, "1", "2")
        assert A.path("t", "s") == 0
        assert ctx.word_map(A.idempotent("2")) == ctx.result.idempotent("1")
        assert ctx.result.path("t", "s") != 0

    def test_same_idempotent(self):
        with pytest.raises(StructuralError):
            fuse_algebra(q1().algebra, "1", "1")

    def test_unknown_idempotent(self):
        with pytest.raises(StructuralError):
            fuse_algebra(q1().algebra, "1", "9")


class TestFusionTerm:
    def test_table_matches_bivector(self, four_type_bundle):
        for kept, absorbed in (("1", "2"), ("2", "1")):
            ctx = fuse_algebra(four_type_bundle.algebra, kept, absorbed)
            report = check_fusion_table(ctx)
            assert report.passed
            assert report.checked == 36

    def test_trace_sum_is_gauge_element(self, four_type_bundle):
        ctx = fuse_algebra(four_type_bundle.algebra, "1", "2")
        assert trE_sum_check(ctx).passed

    def test_trace_on_first_type(self, four_type_bundle):
        ctx = fuse_algebra(four_type_bundle.algebra, "1", "2")
        A = ctx.result
        assert trE(ctx, "absorbed").on_generator("l") == 0
        assert trE(ctx, "kept").on_generator("m") == 0
        assert trE(ctx, "kept").on_generator("l") == A.pair("l", "e1") - A.pair("e1", "l")

    def test_bad_trace_selector(self, four_type_bundle):
        ctx = fuse_algebra(four_type_bundle.algebra, "1", "2")
        with pytest.raises(StructuralError):
            trE(ctx, "both")


class TestFusedBrackets:
    def test_kronecker_gives_free2_case1(self):
        ctx = fuse_algebra(kronecker_pair().algebra, "1", "2")
        fused = fused_bracket(ctx, kronecker_pair().bracket)
        assert bracket_equal(fused, free2("1").bracket).passed
        assert check_quasi_poisson(fused).passed

    def test_reverse_direction_flips_mu(self):
        ctx = fuse_algebra(kronecker_pair().algebra, "2", "1")
        fused = fused_bracket(ctx, kronecker_pair().bracket)
        relabelled = fused.transported(fused.algebra.relabel_idempotents({"2": "1"})[1])
        assert bracket_equal(relabelled, free2("1", mu="-1/2").bracket).passed

    def test_localized_q1_gives_free2_case2(self):
        fused = q1_fusion(gamma=0, delta=1)
        closed = free2("2", gamma=0, alpha="1/2", mu="1/2", localize=True)
        assert bracket_equal(fused.bracket, closed.bracket).passed
        assert moment_map_equal(fused.moment_map, closed.moment_map).passed

    def test_fused_moment_map(self):
        source = q1("1b", gamma=0, phi=0, alpha="1/2", localize=True)
        ctx = fuse_algebra(source.algebra, "1", "2")
        bracket = fused_bracket(ctx, source.bracket)
        moment_map = fused_moment_map(ctx, source.moment_map)
        assert moment_map.component("1") == ctx.result.element("t*s*t^-1*s^-1")
        assert check_moment_map(bracket, moment_map).passed

    @pytest.mark.parametrize("case", ["1a", "2", "3"])
    def test_kappa_vanishes_on_q1(self, case):
        bundle = q1(case)
        for kept, absorbed in (("1", "2"), ("2", "1")):
            report = check_kappa(fuse_algebra(bundle.algebra, kept, absorbed), bundle.bracket)
            assert report.passed
            assert report.checked == 8

    @pytest.mark.slow
    def test_kappa_vanishes_on_all_types(self, four_type_bundle):
        ctx = fuse_algebra(four_type_bundle.algebra, "1", "2")
        report = check_kappa(ctx, four_type_bundle.bracket)
        assert report.passed
        assert "types=first,fourth,second" in report.notes


class TestPipeline:
    def test_parse_steps(self):
        assert parse_steps("1<-2, 1<-3") == [("1", "2"), ("1", "3")]
        with pytest.raises(StructuralError):
            parse_steps("1,2")
        with pytest.raises(StructuralError):
            parse_steps(" , ")

    def test_recheck(self):
        bundle = q1("1a", delta=-1)
        pipeline = fuse_sequence(bundle.bracket, "1<-2", recheck=True)
        assert pipeline.passed
        assert pipeline.algebra.idempotents == ("1",)
        assert len(pipeline.reports) == 2

    def test_missing_idempotent_in_later_step(self):
        bundle = q1("1a")
        with pytest.raises(StructuralError):
            fuse_sequence(bundle.bracket, "1<-2,1<-2")
