# -*- encoding: UTF-8 -*-
"""
命令行入口

    python main.py catalog list
    python main.py catalog build free1 --params '{"lambda": "0", "mu": "1/2", "nu": "0"}'
    python main.py check --catalog q1 --params '{"case": "2", "delta": -1}'
    python main.py fuse --bundle pair.json --steps "1<-2" --recheck
    python main.py rep --catalog nilpotent_free1 --mode qp --dim 2
    python main.py suite --quick --row kappa

退出码：0 全部通过，1 有带见证的数学失败，2 结构或参数错误。
所有输入输出都是 UTF-8 JSON；标准输出只写报告，日志走 stderr 和日志文件。
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import pandas as pd

from . import catalog, serialization
from .brackets import (
    Bundle,
    CheckReport,
    check_cyclic_antisymmetry,
    check_moment_map,
    check_quasi_poisson,
    qp_anomaly,
    triple_bracket,
)
from .exceptions import DeferToNumericError, DQPError, StructuralError
from .fusion import fuse_sequence
from .logger_config import DQPLogger, get_logger, initialize_logging
from .representation import RepresentationChecker, moment_map_numeric_check, trivector_check
from .suite import SUITE_ROWS, run_suite

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

REP_MODES = ("jacobi", "qp", "moment", "equivariance", "trivector")

logger = get_logger('dqp_framework.cli')


@dataclass
class RunConfig:
    """一次命令行运行的全部参数；抽样相关的缺省值来自 config.yaml"""
    command: str
    bundle: Optional[str] = None
    catalog: Optional[str] = None
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None
    trials: Optional[int] = None
    samples: Optional[int] = None
    random_words: Optional[int] = None
    output: Optional[str] = None
    log_level: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        raw_params = getattr(args, "params", None)
        params = {}
        if raw_params:
            params = json.loads(raw_params)
            if not isinstance(params, dict):
                raise StructuralError("--params 必须是 JSON 对象", location="params")
        common = {"command", "bundle", "catalog", "params", "seed", "trials", "samples",
                  "random_words", "output", "log_level", "handler", "action"}
        extra = {k: v for k, v in vars(args).items() if k not in common}
        return cls(
            command=args.command,
            bundle=getattr(args, "bundle", None),
            catalog=getattr(args, "catalog", None),
            params=params,
            seed=getattr(args, "seed", None),
            trials=getattr(args, "trials", None),
            samples=getattr(args, "samples", None),
            random_words=getattr(args, "random_words", None),
            output=getattr(args, "output", None),
            log_level=getattr(args, "log_level", None),
            extra=extra,
        )

    def load_bundle(self) -> Bundle:
        if self.bundle and self.catalog:
            raise StructuralError("--bundle 与 --catalog 只能给出一个", location="input")
        if self.bundle:
            return serialization.load_bundle(self.bundle)
        if self.catalog:
            return catalog.build_family(self.catalog, self.params)
        raise StructuralError("需要 --bundle 或 --catalog", location="input")


def _parse_dim(text: Optional[str]):
    if text is None:
        return 1
    return int(text) if text.strip().isdigit() else text


def _emit(config: RunConfig, data):
    serialization.write_json(data, config.output)


def _reports_document(name: str, reports: Sequence[CheckReport]) -> dict:
    return {
        "name": name,
        "passed": all(r.passed for r in reports),
        "reports": [serialization.report_to_json(r) for r in reports],
    }


def _status(reports: Sequence[CheckReport]) -> int:
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAILED


def _moment_map_report(bundle: Bundle, dim, trials=None, seed=None) -> CheckReport:
    try:
        return check_moment_map(bundle.bracket, bundle.moment_map)
    except DeferToNumericError:
        logger.info(f"{bundle.name} 的矩映射含形式逆，改在表示点上检查（α = {dim}）")
        return moment_map_numeric_check(bundle.bracket, bundle.moment_map, dim, trials=trials, seed=seed)


# ----------------------------------------------------------------------
# 子命令
# ----------------------------------------------------------------------
def cmd_catalog(config: RunConfig) -> int:
    if config.extra.get("catalog_action") == "list":
        families = catalog.catalog_families()
        table = pd.DataFrame([{
            "family": family.name,
            "params": ", ".join(f.name for f in family.fields),
            "description": family.description,
        } for family in families.values()])
        if config.output:
            _emit(config, [family.schema() for family in families.values()])
        else:
            print(table.to_string(index=False))
        return EXIT_PASS
    bundle = catalog.build_family(config.extra["family"], config.params)
    _emit(config, serialization.bundle_to_json(bundle))
    return EXIT_PASS


def cmd_check(config: RunConfig) -> int:
    """循环反对称、拟泊松，以及（有 Φ 时）矩映射条件"""
    bundle = config.load_bundle()
    reports = [
        check_cyclic_antisymmetry(bundle.bracket, samples=config.random_words, seed=config.seed),
        check_quasi_poisson(bundle.bracket),
    ]
    if bundle.moment_map is not None:
        reports.append(_moment_map_report(bundle, _parse_dim(config.extra.get("dim")),
                                          trials=config.trials, seed=config.seed))
    for report in reports:
        for witness in report.witnesses[:5]:
            logger.warning(f"{report.name}: {witness.input} -> {witness.residual}")
    _emit(config, _reports_document(bundle.name, reports))
    return _status(reports)


def cmd_fuse(config: RunConfig) -> int:
    bundle = config.load_bundle()
    pipeline = fuse_sequence(bundle.bracket, config.extra["steps"], bundle.moment_map,
                             recheck=config.extra.get("recheck", False))
    fused = Bundle(pipeline.bracket, pipeline.moment_map, name=pipeline.bracket.name)
    document = serialization.bundle_to_json(fused)
    if pipeline.reports:
        document["reports"] = [serialization.report_to_json(r) for r in pipeline.reports]
    _emit(config, document)
    return _status(pipeline.reports)


def cmd_rep(config: RunConfig) -> int:
    bundle = config.load_bundle()
    mode = config.extra.get("mode", "qp")
    dim = _parse_dim(config.extra.get("dim"))
    if mode == "moment":
        if bundle.moment_map is None:
            raise StructuralError("数据包没有矩映射", location="moment_map")
        report = moment_map_numeric_check(bundle.bracket, bundle.moment_map, dim,
                                          trials=config.trials, seed=config.seed)
    elif mode == "trivector":
        report = trivector_check(bundle.algebra, dim, samples=config.samples, seed=config.seed)
    else:
        checker = RepresentationChecker(bundle.bracket, dim, samples=config.samples, seed=config.seed,
                                        trials=config.trials)
        report = {
            "jacobi": checker.jacobiator_check,
            "qp": checker.qp_rep_check,
            "equivariance": checker.equivariance_check,
        }[mode]()
    _emit(config, _reports_document(bundle.name, [report]))
    return _status([report])


def cmd_suite(config: RunConfig) -> int:
    result = run_suite(quick=config.extra.get("quick", False), rows=config.extra.get("row"),
                       workers=config.extra.get("workers"))
    print(result.summary().to_string(index=False), file=sys.stderr if config.output is None else sys.stdout)
    _emit(config, result.to_dict())
    return EXIT_PASS if result.passed else EXIT_FAILED


def cmd_triple(config: RunConfig) -> int:
    """打印 ⟪a,b,c⟫ 与拟泊松反常项"""
    bundle = config.load_bundle()
    A = bundle.algebra
    a, b, c = (A.element(config.extra[key]) for key in ("a", "b", "c"))
    value = triple_bracket(bundle.bracket, a, b, c)
    anomaly = qp_anomaly(A, a, b, c)
    _emit(config, {
        "triple": serialization.tensor3_to_json(value),
        "anomaly": serialization.tensor3_to_json(anomaly),
        "text": str(value),
        "equal": value == anomaly,
    })
    return EXIT_PASS


def cmd_emit(config: RunConfig) -> int:
    bundle = config.load_bundle()
    lines = [f"# {bundle.name}"]
    for g, h, value in bundle.bracket.table():
        lines.append(f"⟪{g},{h}⟫ = {value}")
    if bundle.moment_map is not None:
        for label in bundle.algebra.idempotents:
            lines.append(f"Φ_{label} = {bundle.moment_map.component(label)}")
    text = "\n".join(lines) + "\n"
    if config.output:
        with open(config.output, 'w', encoding='utf-8') as file:
            file.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


COMMANDS = {
    "catalog": cmd_catalog,
    "check": cmd_check,
    "fuse": cmd_fuse,
    "rep": cmd_rep,
    "suite": cmd_suite,
    "triple": cmd_triple,
    "emit": cmd_emit,
}


# ----------------------------------------------------------------------
# 参数解析
# ----------------------------------------------------------------------
def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--output", help="输出文件（缺省为标准输出）")
    parser.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _input(parser: argparse.ArgumentParser):
    parser.add_argument("--bundle", help="数据包 JSON 文件（- 表示标准输入）")
    parser.add_argument("--catalog", help="目录族名称")
    parser.add_argument("--params", help="目录族参数（JSON 对象）")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqp", description="双拟泊松括号的精确计算与验证")
    sub = parser.add_subparsers(dest="command", required=True)

    catalog_parser = sub.add_parser("catalog", help="列出或构造目录族")
    catalog_sub = catalog_parser.add_subparsers(dest="catalog_action", required=True)
    _common(catalog_sub.add_parser("list", help="列出全部目录族"))
    build = catalog_sub.add_parser("build", help="构造一个目录族并输出数据包")
    build.add_argument("family")
    build.add_argument("--params", help="目录族参数（JSON 对象）")
    _common(build)

    check = sub.add_parser("check", help="循环反对称、拟泊松与矩映射检查")
    _input(check)
    check.add_argument("--random-words", dest="random_words", type=int, help="随机字对的个数")
    check.add_argument("--seed", type=int)
    check.add_argument("--trials", type=int, help="矩映射数值检查的点数")
    check.add_argument("--dim", help="矩映射数值检查的维数向量，如 2 或 1:2,2:1")
    _common(check)

    fuse = sub.add_parser("fuse", help="按 kept<-absorbed 步骤依次融合")
    _input(fuse)
    fuse.add_argument("--steps", required=True, help='如 "1<-2,1<-3"')
    fuse.add_argument("--recheck", action="store_true", help="每一步后复查 κ、拟泊松与矩映射")
    _common(fuse)

    rep = sub.add_parser("rep", help="表示空间上的检查")
    _input(rep)
    rep.add_argument("--mode", choices=REP_MODES, default="qp")
    rep.add_argument("--dim", help="维数向量，如 2 或 1:2,2:1")
    rep.add_argument("--trials", type=int)
    rep.add_argument("--samples", type=int, help="抽样的指标组数")
    rep.add_argument("--seed", type=int)
    _common(rep)

    suite = sub.add_parser("suite", help="运行验收矩阵")
    suite.add_argument("--quick", action="store_true")
    suite.add_argument("--row", action="append", help=f"只运行名称包含该串的行: {[r.name for r in SUITE_ROWS]}")
    suite.add_argument("--workers", type=int)
    _common(suite)

    triple = sub.add_parser("triple", help="计算三重括号")
    _input(triple)
    triple.add_argument("--a", required=True)
    triple.add_argument("--b", required=True)
    triple.add_argument("--c", required=True)
    _common(triple)

    emit = sub.add_parser("emit", help="打印数据包中的括号与矩映射")
    _input(emit)
    _common(emit)
    return parser


def _error(exc: DQPError) -> int:
    serialization.write_json(exc.to_dict())
    return EXIT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "log_level", None):
        DQPLogger.reset()
        initialize_logging(log_level=args.log_level)
    try:
        config = RunConfig.from_args(args)
        logger.info(f"执行子命令 {config.command}")
        return COMMANDS[config.command](config)
    except DQPError as exc:
        logger.error(f"{type(exc).__name__}: {exc.message}（位置: {exc.location}）")
        return _error(exc)
    except json.JSONDecodeError as exc:
        logger.error(f"JSON 解析失败: {exc}")
        return _error(StructuralError(f"JSON 解析失败: {exc.msg}", location=f"line {exc.lineno}, column {exc.colno}"))
    except OSError as exc:
        logger.error(f"文件读写失败: {exc}", exc_info=True)
        return _error(StructuralError(f"文件读写失败: {exc}", location=getattr(exc, "filename", None)))
