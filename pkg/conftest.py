# -*- encoding: UTF-8 -*-
"""测试期间把日志写到临时目录，并关闭控制台输出"""

import pytest

from dqp_framework.logger_config import DQPLogger, initialize_logging


@pytest.fixture(autouse=True, scope="session")
def _logging_to_tmp(tmp_path_factory):
    DQPLogger.reset()
    initialize_logging(log_dir=str(tmp_path_factory.mktemp("logs")), log_level="WARNING", console_output=False)
    yield
    DQPLogger.reset()
