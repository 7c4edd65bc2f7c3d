# -*- coding: utf-8 -*-
"""
验收矩阵：行的选择、汇总表与结果的可复现性
"""

import pytest

from dqp_framework import catalog
from dqp_framework.exceptions import DQPError
from dqp_framework.suite import (
    SUITE_ROWS,
    fusion_table_cases,
    normalize_confluence,
    run_suite,
    select_rows,
    tau_invariance,
)


class TestRowSelection:
    def test_all_rows(self):
        assert [row.name for row in select_rows()] == [row.name for row in SUITE_ROWS]

    def test_substring_match(self):
        assert [row.name for row in select_rows(["fusion"])] == ["fusion_kappa", "fusion_table"]

    def test_no_match(self):
        with pytest.raises(DQPError):
            select_rows(["nothing"])


class TestRows:
    def test_surface_row(self):
        result = run_suite(quick=True, rows=["surface"], workers=1)
        assert result.passed
        summary = result.summary()
        assert list(summary.columns) == ["row", "label", "passed", "checked", "witnesses", "seconds"]
        assert set(summary["row"]) == {"surface"}

    def test_results_are_reproducible(self):
        first = run_suite(quick=True, rows=["vdb"], workers=2).to_dict()
        second = run_suite(quick=True, rows=["vdb"], workers=1).to_dict()
        assert first == second
        assert first["passed"]

    def test_fusion_table_covers_all_type_pairs(self):
        cases = dict(fusion_table_cases(quick=True))
        report = cases["fusion table coverage"]()
        assert report.passed
        assert len(report.notes) == 16

    @pytest.mark.slow
    def test_quick_suite(self):
        assert run_suite(quick=True).passed


class TestPropertyHelpers:
    def test_normalize_confluence(self):
        group = catalog.surface_algebra(catalog.SurfaceSpec(1, 1))
        report = normalize_confluence(group, 50, seed=3)
        assert report.passed
        assert report.checked == 50

    def test_tau_invariance(self):
        report = tau_invariance(catalog.q1("2"), 15, seed=8)
        assert report.passed
        assert report.checked == 15
