# -*- coding: utf-8 -*-
"""
表示空间：坐标矩阵、诱导括号、雅可比/拟泊松恒等式、采样点
"""

import pytest
from sympy import eye, zeros

from dqp_framework.catalog import free1, free2, nilpotent_free1, q1
from dqp_framework.exceptions import DeferToNumericError, StructuralError
from dqp_framework.representation import (
    DimVector,
    RepresentationChecker,
    coord_matrix,
    coordinate_ring,
    equivariance_check,
    induced_bracket,
    jacobiator_check,
    moment_ideal_generators,
    moment_map_numeric_check,
    qp_rep_check,
    random_rep_point,
    trace_function,
    trivector_check,
)


class TestDimVector:
    def test_forms(self):
        A = q1().algebra
        assert DimVector.of(A, 2).to_dict() == {"1": 2, "2": 2}
        assert DimVector.of(A, "1:1,2:2").N == 3
        assert DimVector.of(A, {"2": 1, "1": 3}).entries == (("1", 3), ("2", 1))
        assert DimVector.of(A, "1:1,2:2").block("2") == range(1, 3)

    @pytest.mark.parametrize("spec", ["1:1", "1=2", {"1": 0, "2": 1}, 1.5])
    def test_invalid(self, spec):
        with pytest.raises(StructuralError):
            DimVector.of(q1().algebra, spec)


class TestCoordinates:
    def test_letter_blocks(self):
        A = q1().algebra
        dim = DimVector.of(A, "1:1,2:2")
        ring = coordinate_ring(A, dim)
        assert len(ring.variables) == 4
        matrix = coord_matrix(A.gen("t"), dim)
        assert matrix[0, 1] == ring.variable("t", 0, 1)
        assert not matrix[1, 0]
        assert not matrix[0, 0]

    def test_trace(self):
        A = free2().algebra
        ring = coordinate_ring(A, DimVector.of(A, 1))
        t, s = ring.variable("t", 0, 0), ring.variable("s", 0, 0)
        assert trace_function(A.element("t*s + 2*t"), 1) == t * s + 2 * t

    def test_formal_inverse_is_rejected(self):
        bundle = free1(lam=1, mu="-1/2", localize=True)
        with pytest.raises(DeferToNumericError):
            coord_matrix(bundle.moment_map.component("1"), 1)


class TestInducedBracket:
    def test_entry_formula(self):
        br = free1().bracket
        A = br.algebra
        square = coord_matrix(A.element("t^2"), 2)
        value = induced_bracket(br, 2, ("t", 0, 1), ("t", 1, 0))
        assert 2 * value == square[1, 1] - square[0, 0]

    def test_antisymmetry(self):
        br = q1("1a").bracket
        first = induced_bracket(br, 1, ("t", 0, 0), ("s", 0, 0))
        second = induced_bracket(br, 1, ("s", 0, 0), ("t", 0, 0))
        assert first == -second

    def test_scalar_dimension_one(self):
        assert induced_bracket(free1().bracket, 1, ("t", 0, 0), ("t", 0, 0)) == 0


class TestIdentities:
    def test_free1(self):
        br = free1().bracket
        assert jacobiator_check(br, 2).passed
        assert qp_rep_check(br, 2).passed

    def test_wrong_normalisation(self):
        br = free1(mu=1, validate=False).bracket
        assert jacobiator_check(br, 2).passed
        # 维数 2 时单个环的反常项缩并为零，要到维数 3 才能区分
        assert qp_rep_check(br, 2).passed
        assert not qp_rep_check(br, 3).passed

    def test_two_vertices(self):
        br = q1("2", delta=-1).bracket
        report = qp_rep_check(br, "1:1,2:1")
        assert report.passed
        assert report.checked > 0

    def test_relations_fall_back_to_points(self):
        checker = RepresentationChecker(nilpotent_free1(3).bracket, 2, trials=3, seed=11)
        assert checker.qp_rep_check().passed

    def test_equivariance(self):
        assert equivariance_check(free2("3").bracket, 2).passed

    def test_trivector(self):
        assert trivector_check(q1().algebra, 1).passed

    def test_sampled_index_tuples(self):
        checker = RepresentationChecker(free2("1").bracket, 3, samples=10, exhaustive_max_dim=2, seed=4)
        report = checker.qp_rep_check([("t", "s", "t")])
        assert report.passed
        assert report.checked == 10


class TestPoints:
    def test_nilpotent_and_torsion_blocks(self):
        from dqp_framework.algebra import AlgebraSpec, GeneratorDecl

        A = AlgebraSpec(["1"], [GeneratorDecl.nilpotent("x", "1", 3), GeneratorDecl.invertible("c", "1", "1", torsion=3)])
        point = random_rep_point(A, 3, seed=2)
        x, c = point.assignment["x"], point.assignment["c"]
        assert x ** 3 == zeros(3, 3)
        assert c ** 3 == eye(3)
        assert point.assignment["c^-1"] * c == eye(3)

    def test_formal_inverse_block(self):
        bundle = free1(lam=1, mu="-1/2", localize=True)
        point = random_rep_point(bundle.algebra, 2, seed=5)
        defining = point.element_matrix(bundle.algebra.defining_element("inv_t"))
        assert point.assignment["inv_t"] * defining == eye(2)

    def test_points_are_reproducible(self):
        A = free2().algebra
        assert random_rep_point(A, 2, seed=9).assignment == random_rep_point(A, 2, seed=9).assignment


class TestMomentMapNumeric:
    def test_formal_inverse_moment_map(self):
        bundle = free1(lam=1, mu="-1/2", localize=True)
        report = moment_map_numeric_check(bundle.bracket, bundle.moment_map, 2, trials=2, seed=1)
        assert report.passed
        assert report.checked == 2

    def test_ideal_generators(self):
        bundle = free1(localize=True)
        generators = moment_ideal_generators(bundle.moment_map, 2)
        assert len(generators) == 4
        with pytest.raises(DeferToNumericError):
            moment_ideal_generators(free1(lam=1, mu="-1/2", localize=True).moment_map, 1)
