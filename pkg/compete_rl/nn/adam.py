#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Adam 优化器（带偏差修正）
参数列表原地更新；目标为最大化时由上游对损失取负
"""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from compete_rl.models.errors import DivergenceError
from compete_rl.models.schema import AdamSnapshot


@dataclass
class AdamState:
    """一阶/二阶矩与步数"""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])

    def copy(self) -> "AdamState":
        return AdamState([m.copy() for m in self.m], [v.copy() for v in self.v],
                         self.step, self.beta1, self.beta2, self.eps)

    def to_snapshot(self) -> AdamSnapshot:
        return AdamSnapshot(step=self.step, m=[m.tolist() for m in self.m], v=[v.tolist() for v in self.v])

    @classmethod
    def from_snapshot(cls, snapshot: AdamSnapshot) -> "AdamState":
        return cls(m=[np.array(m, dtype=np.float64) for m in snapshot.m],
                   v=[np.array(v, dtype=np.float64) for v in snapshot.v],
                   step=snapshot.step)


def adam_step(params: List[np.ndarray], grads: Sequence[np.ndarray], state: AdamState,
              lr: float) -> AdamState:
    """
    执行一步 Adam 下降

    Args:
        params: 参数列表（原地更新）
        grads: 与 params 同序同形的梯度
        state: 优化器状态（原地更新）
        lr: 学习率

    Returns:
        AdamState: 更新后的状态
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError(f"参数({len(params)})、梯度({len(grads)})、矩({len(state.m)})数量不一致")
    for p, g in zip(params, grads):
        if p.shape != np.shape(g):
            raise ValueError(f"梯度形状 {np.shape(g)} 与参数形状 {p.shape} 不一致")
        if not np.all(np.isfinite(g)):
            raise DivergenceError("non-finite gradient in adam_step")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    step_size = lr / bc1

    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= step_size * m / (np.sqrt(v / bc2) + state.eps)
    return state
