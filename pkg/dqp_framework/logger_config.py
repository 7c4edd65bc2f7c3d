"""
统一日志配置模块

提供：
- 主日志 / 错误日志 / 性能日志的文件轮转
- 检查操作日志（按日期分文件），记录每次校验的规模、见证数和耗时
- 方法调用与检查操作装饰器
- LoggerMixin，为括号、融合上下文、表示检查器等类提供 self.logger
"""

import logging
import logging.handlers
import sys
from datetime import datetime
from pathlib import Path
import functools
import time


class DQPLogger:
    """双拟泊松框架统一日志器"""

    _loggers = {}
    _configured = False
    _log_dir = None
    slow_seconds = 1.0

    @classmethod
    def setup_logging(cls,
                      log_dir="logs",
                      log_level=logging.INFO,
                      max_file_size=10*1024*1024,  # 10MB
                      backup_count=5,
                      console_output=True):
        """
        设置统一日志配置

        Args:
            log_dir: 日志文件目录
            log_level: 日志级别
            max_file_size: 单个日志文件最大大小（字节）
            backup_count: 保留的备份文件数量
            console_output: 是否输出到控制台
        """
        if cls._configured:
            return

        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)

        # 只接管框架自己的日志器，避免干扰调用方（例如 pytest）的根日志器
        framework_logger = logging.getLogger('dqp_framework')
        framework_logger.setLevel(log_level)
        framework_logger.propagate = False
        for handler in framework_logger.handlers[:]:
            framework_logger.removeHandler(handler)

        detailed_formatter = logging.Formatter(
            '%(asctime)s | %(name)s | %(levelname)s | %(filename)s:%(lineno)d | %(funcName)s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        simple_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)s | %(name)s | %(message)s',
            datefmt='%H:%M:%S'
        )

        # 1. 主日志文件（轮转）
        file_handler = logging.handlers.RotatingFileHandler(
            log_path / "dqp_framework.log",
            maxBytes=max_file_size,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(log_level)
        file_handler.setFormatter(detailed_formatter)
        framework_logger.addHandler(file_handler)

        # 2. 错误日志文件
        error_handler = logging.handlers.RotatingFileHandler(
            log_path / "errors.log",
            maxBytes=max_file_size,
            backupCount=backup_count,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(detailed_formatter)
        framework_logger.addHandler(error_handler)

        # 3. 性能日志文件
        perf_handler = logging.handlers.RotatingFileHandler(
            log_path / "performance.log",
            maxBytes=max_file_size,
            backupCount=backup_count,
            encoding='utf-8'
        )
        perf_handler.setLevel(logging.INFO)
        perf_handler.setFormatter(detailed_formatter)

        # 4. 控制台输出（走 stderr，stdout 留给 JSON 报告）
        if console_output:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(log_level)
            console_handler.setFormatter(simple_formatter)
            framework_logger.addHandler(console_handler)

        # 5. 检查操作日志（按日期分文件）
        today = datetime.now().strftime('%Y-%m-%d')
        check_handler = logging.FileHandler(log_path / f"checks_{today}.log", encoding='utf-8')
        check_handler.setLevel(logging.INFO)
        check_handler.setFormatter(detailed_formatter)

        check_logger = logging.getLogger('dqp_framework.checks')
        check_logger.addHandler(check_handler)

        perf_logger = logging.getLogger('dqp_framework.performance')
        perf_logger.addHandler(perf_handler)

        cls._configured = True
        cls._log_dir = log_path

        startup_logger = cls.get_logger('dqp_framework.startup')
        startup_logger.info(f"日志系统初始化完成 - 日志目录: {log_path.absolute()}")
        startup_logger.info(f"日志级别: {logging.getLevelName(log_level)}")

    @classmethod
    def reset(cls):
        """关闭所有处理器，允许以新参数重新初始化（测试与 CLI 切换日志目录时使用）"""
        for name in ('dqp_framework', 'dqp_framework.checks', 'dqp_framework.performance'):
            logger = logging.getLogger(name)
            for handler in logger.handlers[:]:
                handler.close()
                logger.removeHandler(handler)
        cls._loggers = {}
        cls._configured = False
        cls._log_dir = None
        cls.slow_seconds = 1.0

    @classmethod
    def get_logger(cls, name):
        """获取指定名称的日志器"""
        if not cls._configured:
            initialize_logging()

        if name not in cls._loggers:
            cls._loggers[name] = logging.getLogger(name)

        return cls._loggers[name]

    @classmethod
    def get_check_logger(cls):
        """获取检查操作专用日志器"""
        return cls.get_logger('dqp_framework.checks')

    @classmethod
    def get_performance_logger(cls):
        """获取性能监控专用日志器"""
        return cls.get_logger('dqp_framework.performance')


def _record_duration(label, seconds):
    """超过 logging.slow_seconds 的调用写入性能日志"""
    if seconds > DQPLogger.slow_seconds:
        DQPLogger.get_performance_logger().warning(f"{label} 耗时 {seconds:.2f}秒")


def log_method_call(include_args=True, include_result=False):
    """
    LoggerMixin 子类方法的调试日志：参数、返回值摘要与耗时

    Args:
        include_args: 是否记录参数（截断到 100 字符）
        include_result: 是否记录返回值（截断到 200 字符）
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(self, *args, **kwargs):
            logger = self.logger
            label = f"{self.__class__.__name__}.{func.__name__}"
            if include_args:
                shown = [str(arg)[:100] for arg in args] + [f"{k}={str(v)[:100]}" for k, v in kwargs.items()]
                logger.debug(f"调用 {label}({', '.join(shown)})")

            start_time = time.perf_counter()
            try:
                result = func(self, *args, **kwargs)
            except Exception as e:
                logger.error(f"{label} 失败: {e}", exc_info=True)
                raise
            elapsed = time.perf_counter() - start_time
            _record_duration(label, elapsed)
            if include_result and result is not None:
                logger.debug(f"{label} 返回: {str(result)[:200]}")
            logger.debug(f"{label} 完成 ({elapsed:.3f}秒)")
            return result

        return wrapper
    return decorator


def log_check_operation(operation_type):
    """
    返回 CheckReport 的检查函数写检查日志：开始、结论、检查数与见证数

    Args:
        operation_type: 检查类型 (如: '循环反对称', '拟泊松', '矩映射')
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            check_logger = DQPLogger.get_check_logger()
            check_logger.info(f"开始{operation_type}检查: {func.__name__}")
            start_time = time.perf_counter()
            try:
                report = func(*args, **kwargs)
            except Exception as e:
                check_logger.error(f"{operation_type}检查中断: {func.__name__} - {e}")
                raise
            elapsed = time.perf_counter() - start_time
            verdict = "通过" if report.passed else "失败"
            check_logger.info(
                f"{operation_type}检查{verdict}: {func.__name__} "
                f"(检查数: {report.checked}, 见证数: {len(report.witnesses)}, {elapsed:.2f}秒)")
            _record_duration(func.__name__, elapsed)
            return report

        return wrapper
    return decorator


class LoggerMixin:
    """为括号、融合上下文、表示检查器等类提供 self.logger"""

    @property
    def logger(self):
        return DQPLogger.get_logger(f"dqp_framework.{self.__class__.__name__}")

    def log_info(self, message):
        self.logger.info(message)

    def log_warning(self, message):
        self.logger.warning(message)

    def log_debug(self, message):
        self.logger.debug(message)


def initialize_logging(log_dir=None, log_level=None, console_output=None):
    """按 config.yaml 的 logging 段初始化日志系统，显式参数优先"""
    import settings

    logging_config = settings.get_config().get('logging', {})
    level = log_level or logging_config.get('level', 'INFO')
    DQPLogger.slow_seconds = float(logging_config.get('slow_seconds', 1.0))
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    DQPLogger.setup_logging(
        log_dir=log_dir or logging_config.get('log_dir', 'logs'),
        log_level=level,
        console_output=logging_config.get('console', True) if console_output is None else console_output,
    )


def get_logger(name):
    """获取日志器的便捷函数"""
    return DQPLogger.get_logger(name)
