# -*- encoding: UTF-8 -*-
"""
异常层次

数学意义上的失败（等式不成立）不抛异常，而是由各检查器返回带见证的 CheckReport；
这里只定义结构性、参数性错误以及需要转入数值验证的信号。
"""


class DQPError(Exception):
    """框架内所有可预期错误的基类"""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.message = message
        self.location = location

    def to_dict(self):
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "location": self.location,
        }


class StructuralError(DQPError):
    """引用了不存在的生成元/幂等元、类型不匹配或 JSON 结构错误"""


class ParameterError(DQPError):
    """目录族的参数约束不满足（如 4(μ²-λν)≠1）"""


class SpecIncompleteError(DQPError):
    """求值时遇到未存储的生成元对"""

    def __init__(self, message, pair=None, location=None):
        super().__init__(message, location)
        self.pair = pair


class DeferToNumericError(DQPError):
    """表达式含不透明的形式逆，符号检查无法进行，需改用表示空间上的数值检查"""


class SingularPointError(DQPError):
    """多次重采样后仍未得到满足可逆性要求的表示点"""
