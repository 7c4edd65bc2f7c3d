"""
双拟泊松括号框架

在带关系的路径代数上做精确有理运算，支持：
- 代数核心：幂等元、生成元（可逆、幂零、挠、形式逆）、规范字与张量
- 双括号：莱布尼茨延拓、三重括号、拟泊松反常项、矩映射条件
- 融合：把两个幂等元粘合，得到诱导括号 + 融合项，以及融合后的矩映射
- 目录：分类族、箭图括号、曲面基本群代数，以及对应的迭代融合构造
- 表示空间：坐标环上的诱导双导子括号、雅可比恒等式与数值矩映射检查
- 验收矩阵与命令行

日志功能：
- 检查操作自动记录规模、见证数和耗时（checks_<日期>.log）
- 超过 1 秒的方法调用写入 performance.log
- 主日志、错误日志自动轮转

使用示例:
    from dqp_framework import catalog
    from dqp_framework.brackets import check_quasi_poisson

    bundle = catalog.free2("2", gamma=0, alpha="1/2", mu="1/2", localize=True)
    report = check_quasi_poisson(bundle.bracket)
    print(report.passed, report.checked)
"""

from .exceptions import (
    DQPError,
    DeferToNumericError,
    ParameterError,
    SingularPointError,
    SpecIncompleteError,
    StructuralError,
)
from .algebra import AlgebraSpec, GeneratorDecl, NCPoly, Tensor2, Tensor3, Word
from .brackets import Bundle, CheckReport, DoubleBracketSpec, MomentMapSpec

__all__ = [
    "AlgebraSpec",
    "Bundle",
    "CheckReport",
    "DQPError",
    "DeferToNumericError",
    "DoubleBracketSpec",
    "GeneratorDecl",
    "MomentMapSpec",
    "NCPoly",
    "ParameterError",
    "SingularPointError",
    "SpecIncompleteError",
    "StructuralError",
    "Tensor2",
    "Tensor3",
    "Word",
]
