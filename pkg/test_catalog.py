# -*- coding: utf-8 -*-
"""
目录：各族的参数约束、分类结果的拟泊松性与闭式/融合构造的一致性
"""

from fractions import Fraction

import pytest

from dqp_framework.brackets import (
    bracket_equal,
    check_moment_map,
    check_quasi_poisson,
    moment_map_equal,
)
from dqp_framework.catalog import (
    QuiverSpec,
    SurfaceSpec,
    build_family,
    catalog_families,
    free1,
    free2,
    kronecker_fusion,
    loop_bracket,
    nilpotent_free1,
    nilpotent_sum,
    nilpotent_sum_formula,
    q1,
    q1_pair_fusion,
    surface,
    surface_fusion,
    trivial_vertex,
    vdb_quiver,
    vdb_sep_fusion,
)
from dqp_framework.exceptions import ParameterError, StructuralError

HALF = Fraction(1, 2)


class TestParameterConstraints:
    def test_free1_normalisation(self):
        with pytest.raises(ParameterError):
            free1(mu=1)
        assert free1(mu=1, validate=False).bracket.value("t", "t") != 0

    def test_free1_moment_map_needs_half(self):
        with pytest.raises(ParameterError) as info:
            free1(lam=1, mu=0, nu="-1/4", localize=True)
        assert info.value.location == "localize"

    def test_q1_case_and_alpha(self):
        with pytest.raises(ParameterError):
            q1("4")
        with pytest.raises(ParameterError):
            q1("1b", gamma=1, phi=1, alpha=HALF)
        with pytest.raises(ParameterError):
            q1("2", lam=0)

    def test_free2_sign_constraints(self):
        with pytest.raises(ParameterError):
            free2("3", m=1)
        with pytest.raises(ParameterError):
            free2("5", n=0, validate=False)

    def test_nilpotent_order(self):
        with pytest.raises(ParameterError):
            nilpotent_free1(2)

    def test_surface_needs_topology(self):
        with pytest.raises(ParameterError):
            SurfaceSpec(0, 0)
        with pytest.raises(ParameterError):
            SurfaceSpec(1, 1, weights=(2, 3))


class TestClassification:
    @pytest.mark.parametrize("case", ["1", "2", "3", "4", "5", "6", "7"])
    def test_free2_cases(self, case):
        assert check_quasi_poisson(free2(case).bracket).passed

    def test_free2_swap(self):
        swapped = free2("5", swap=True)
        A = swapped.algebra
        assert A.generator_names == ("t", "s")
        assert swapped.bracket.value("s", "s") == loop_bracket(A, "s", mu=HALF)
        assert swapped.bracket.value("t", "t") == loop_bracket(A, "t", lam="-1/4", nu=1)
        assert check_quasi_poisson(swapped.bracket).passed

    def test_q1_1b_with_both_weights(self):
        bundle = q1("1b", gamma=2, phi=1, alpha=Fraction(3, 2))
        assert check_quasi_poisson(bundle.bracket).passed

    def test_broken_free2_fails(self):
        assert not check_quasi_poisson(free2("2", alpha=1, validate=False).bracket).passed

    @pytest.mark.parametrize("sign", [1, -1])
    def test_nilpotent(self, sign):
        assert check_quasi_poisson(nilpotent_free1(4, mu=Fraction(sign, 2)).bracket).passed


class TestFusionFamilies:
    def test_q1_pair_fusion_signs(self):
        for delta in (1, -1):
            for delta_prime in (1, -1):
                bundle = q1_pair_fusion(delta, delta_prime)
                A = bundle.algebra
                expected = A.pair("s*t", "e1").scale(Fraction(delta, 2)) \
                    + A.pair("e2", "t*s").scale(Fraction(delta_prime, 2))
                assert bundle.bracket.value("t", "s") == expected
                assert check_quasi_poisson(bundle.bracket).passed

    @pytest.mark.parametrize("forward, mu", [(True, HALF), (False, -HALF)])
    def test_kronecker_fusion(self, forward, mu):
        assert bracket_equal(kronecker_fusion(forward=forward).bracket, free2("1", mu=mu).bracket).passed

    def test_nilpotent_sum_matches_formula(self):
        fused = nilpotent_sum([3, 4])
        closed = nilpotent_sum_formula([3, 4])
        assert bracket_equal(fused.bracket, closed.bracket).passed
        assert check_quasi_poisson(closed.bracket).passed

    def test_trivial_vertex(self):
        bundle = trivial_vertex("5")
        assert bundle.moment_map.component("5") == bundle.algebra.idempotent("5")
        assert check_quasi_poisson(bundle.bracket).checked == 0


class TestQuivers:
    @pytest.mark.parametrize("weight", [0, 1, 2])
    def test_one_arrow(self, weight):
        q = QuiverSpec(("1", "2"), (("a", "1", "2"),), weights={"a": weight})
        closed, fused = vdb_quiver(q), vdb_sep_fusion(q)
        assert fused.algebra.generator_names == closed.algebra.generator_names
        assert bracket_equal(fused.bracket, closed.bracket).passed
        assert moment_map_equal(fused.moment_map, closed.moment_map).passed
        assert check_quasi_poisson(closed.bracket).passed

    def test_star_quiver(self):
        q = QuiverSpec(("0", "1", "2"), (("a", "1", "0"), ("b", "2", "0")), weights={"a": 0, "b": 0})
        closed, fused = vdb_quiver(q), vdb_sep_fusion(q)
        assert bracket_equal(fused.bracket, closed.bracket).passed
        assert moment_map_equal(fused.moment_map, closed.moment_map).passed
        assert check_moment_map(closed.bracket, closed.moment_map).passed

    def test_ordering_validation(self):
        with pytest.raises(StructuralError):
            QuiverSpec(("1", "2"), (("a", "1", "2"),), orderings={"1": ("a", "a_star")})
        with pytest.raises(StructuralError):
            QuiverSpec(("1",), (("a", "1", "2"),))
        with pytest.raises(StructuralError):
            QuiverSpec(("1",), (("a", "1", "1"),), weights={"b": 1})

    def test_default_ordering_and_dict(self):
        q = QuiverSpec(("1",), (("l", "1", "1"),))
        assert q.orderings == {"1": ("l", "l_star")}
        assert q.weights == {"l": 1}
        assert QuiverSpec.from_dict(q.to_dict()) == q

    def test_loop_moment_map_order(self):
        q = QuiverSpec(("1",), (("l", "1", "1"),), weights={"l": 0}, orderings={"1": ("l_star", "l")})
        A = vdb_quiver(q).algebra
        assert vdb_quiver(q).moment_map.component("1") == A.element("l^-1*l_star^-1*l*l_star")


class TestSurfaces:
    @pytest.mark.parametrize("genus, boundaries", [(0, 1), (1, 0), (1, 1)])
    def test_fusion_matches_closed_form(self, genus, boundaries):
        spec = SurfaceSpec(genus, boundaries)
        closed, fused = surface(spec), surface_fusion(spec)
        assert bracket_equal(fused.bracket, closed.bracket).passed
        assert moment_map_equal(fused.moment_map, closed.moment_map).passed

    def test_torus_with_hole(self):
        bundle = surface(SurfaceSpec(1, 1))
        assert check_quasi_poisson(bundle.bracket).passed
        assert check_moment_map(bundle.bracket, bundle.moment_map).passed

    def test_torsion_boundary(self):
        bundle = surface(SurfaceSpec(0, 1, weights=(2,)))
        A = bundle.algebra
        assert A.element("gamma1^2") == A.unit()
        assert check_quasi_poisson(bundle.bracket).passed


class TestRegistry:
    def test_families_have_schemas(self):
        families = catalog_families()
        assert {"free1", "q1", "free2", "vdb_quiver", "surface", "nilpotent_sum"} <= set(families)
        schema = families["free1"].schema()
        assert [p["name"] for p in schema["params"]][:3] == ["lambda", "mu", "nu"]
        assert schema["params"][1]["default"] == "1/2"

    def test_build_family(self):
        bundle = build_family("free1", {"lambda": "1", "mu": "1/2", "localize": True})
        assert bundle.moment_map.component("1") == bundle.algebra.element("t + 1")

    def test_build_quiver_from_dict(self):
        bundle = build_family("vdb_quiver", {"quiver": {"vertices": ["1", "2"], "arrows": [["a", "1", "2"]]}})
        assert bundle.algebra.generator_names == ("a", "a_star", "inv_a_star")

    @pytest.mark.parametrize("name, params", [
        ("nope", {}),
        ("free1", {"kappa": 1}),
        ("free1", {"mu": 0.5}),
        ("q1", {"case": 7}),
        ("vdb_quiver", {}),
        ("nilpotent_sum", {"orders": "3,3"}),
    ])
    def test_bad_params(self, name, params):
        with pytest.raises((StructuralError, ParameterError)):
            build_family(name, params)
