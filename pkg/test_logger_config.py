# -*- coding: utf-8 -*-
"""
日志：慢调用写入性能日志，快调用不写
"""

from dqp_framework.brackets import check_double_poisson
from dqp_framework.catalog import free1
from dqp_framework.fusion import FusionRunner
from dqp_framework.logger_config import DQPLogger


def read_performance_log():
    return (DQPLogger._log_dir / "performance.log").read_text(encoding="utf-8")


def test_slow_check_goes_to_performance_log(monkeypatch):
    monkeypatch.setattr(DQPLogger, "slow_seconds", -1.0)
    report = check_double_poisson(free1().bracket)
    assert report.checked > 0
    assert "check_double_poisson 耗时" in read_performance_log()


def test_slow_method_goes_to_performance_log(monkeypatch):
    monkeypatch.setattr(DQPLogger, "slow_seconds", -1.0)
    FusionRunner().run(free1().bracket, [])
    assert "FusionRunner.run 耗时" in read_performance_log()


def test_fast_calls_stay_out_of_performance_log(monkeypatch):
    monkeypatch.setattr(DQPLogger, "slow_seconds", 3600.0)
    before = read_performance_log()
    check_double_poisson(free1().bracket)
    assert read_performance_log() == before
