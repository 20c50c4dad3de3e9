#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义
"""

from typing import Optional


class CompeteRLError(Exception):
    """框架异常基类"""


class EpisodeFinishedError(CompeteRLError):
    """回合已结束仍调用 step"""

    def __init__(self, t: int, horizon: int):
        super().__init__(f"episode finished: t={t}, horizon={horizon}")
        self.t = t
        self.horizon = horizon


class DivergenceError(CompeteRLError):
    """出现非有限数值（训练发散）"""

    def __init__(self, detail: str, iteration: Optional[int] = None):
        where = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(f"divergence detected{where}: {detail}")
        self.detail = detail
        self.iteration = iteration

    def with_iteration(self, iteration: int) -> "DivergenceError":
        """补充迭代上下文"""
        if self.iteration is not None:
            return self
        return DivergenceError(self.detail, iteration)


class DimensionMismatchError(CompeteRLError, ValueError):
    """向量维度与布局不一致"""


class ConfigNotFoundError(CompeteRLError, FileNotFoundError):
    """配置文件不存在"""

    def __init__(self, path: str):
        super().__init__(f"config not found: {path}")
        self.path = path


class EmptyGridError(CompeteRLError, ValueError):
    """网格实验没有任何单元"""

    def __init__(self, detail: str = ""):
        super().__init__(f"empty grid{': ' + detail if detail else ''}")
