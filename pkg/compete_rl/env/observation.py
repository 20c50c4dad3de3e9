#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
观测构造
s̄^i = [s^i | o^i]，o^{ij} = [x^j - x^i, v^j - v^i]（含自身）
"""

from typing import Optional

import numpy as np

from compete_rl.env.race import AgentPhys, RaceState
from compete_rl.models.errors import DimensionMismatchError
from compete_rl.models.schema import AuxKind, EnvKind, ObsLayout


def proprio_obs(agent: AgentPhys, kind: EnvKind) -> np.ndarray:
    """
    本体感受观测

    不包含绝对位置 x。

    Args:
        agent: 智能体物理状态
        kind: 环境类型

    Returns:
        np.ndarray: PointRacer 为 [v]，StaminaRacer 为 [v, stamina]
    """
    if kind is EnvKind.POINT_RACER:
        return np.array([agent.v], dtype=np.float64)
    return np.array([agent.v, agent.stamina], dtype=np.float64)


def competitive_obs(state: RaceState, i: int, self_first: bool = False) -> np.ndarray:
    """
    竞争观测 o^i

    Args:
        state: 赛跑状态
        i: 智能体下标
        self_first: 是否把自身块放在最前（其余保持下标顺序）

    Returns:
        np.ndarray: 长度 2N 的向量
    """
    n = state.n_agents
    if not 0 <= i < n:
        raise IndexError(f"智能体下标越界: {i} (N={n})")

    order = range(n)
    if self_first:
        order = [i] + [j for j in range(n) if j != i]

    me = state.agents[i]
    out = np.empty(2 * n, dtype=np.float64)
    for slot, j in enumerate(order):
        if j == i:
            # 自身块精确为零
            out[2 * slot] = 0.0
            out[2 * slot + 1] = 0.0
        else:
            other = state.agents[j]
            out[2 * slot] = other.x - me.x
            out[2 * slot + 1] = other.v - me.v
    return out


def observation_layout(kind: EnvKind, aux_kind: AuxKind, n_aux_agents: int = 0,
                       self_first: bool = False) -> ObsLayout:
    """
    构造观测布局

    Args:
        kind: 环境类型
        aux_kind: 辅助块类型
        n_aux_agents: 辅助块覆盖的智能体数（训练时的 N）
        self_first: 竞争块排序方式

    Returns:
        ObsLayout: 观测布局
    """
    aux_dim = 0 if aux_kind is AuxKind.NONE else 2 * n_aux_agents
    return ObsLayout(proprio_dim=kind.proprio_dim, aux_dim=aux_dim, aux_kind=aux_kind, self_first=self_first)


def aux_block(state: RaceState, i: int, layout: ObsLayout,
              rng: Optional[np.random.Generator] = None, noise_std: float = 1.0) -> np.ndarray:
    """
    生成辅助块

    Args:
        state: 赛跑状态
        i: 智能体下标
        layout: 观测布局
        rng: 噪声随机源（仅 noise 模式需要）
        noise_std: 噪声标准差

    Returns:
        np.ndarray: 长度 layout.aux_dim 的向量
    """
    if layout.aux_kind is AuxKind.NONE:
        return np.zeros(0, dtype=np.float64)
    if layout.aux_kind is AuxKind.COMPETITIVE:
        if layout.aux_agents != state.n_agents:
            raise DimensionMismatchError(
                f"竞争块按 N={layout.aux_agents} 布局，但状态中有 {state.n_agents} 个智能体"
            )
        return competitive_obs(state, i, self_first=layout.self_first)
    if layout.aux_kind is AuxKind.NOISE:
        if rng is None:
            raise ValueError("noise 模式需要随机源 rng")
        return noise_std * rng.standard_normal(layout.aux_dim)
    return np.zeros(layout.aux_dim, dtype=np.float64)


def build_observation(state: RaceState, i: int, layout: ObsLayout, kind: EnvKind,
                      rng: Optional[np.random.Generator] = None, noise_std: float = 1.0) -> np.ndarray:
    """
    构造完整观测 s̄^i

    Args:
        state: 赛跑状态
        i: 智能体下标
        layout: 观测布局
        kind: 环境类型
        rng: 噪声随机源
        noise_std: 噪声标准差

    Returns:
        np.ndarray: 长度 layout.total_dim 的向量
    """
    if layout.proprio_dim != kind.proprio_dim:
        raise DimensionMismatchError(
            f"布局的本体维度 {layout.proprio_dim} 与 {kind.value} 的 {kind.proprio_dim} 不一致"
        )
    proprio = proprio_obs(state.agents[i], kind)
    if layout.aux_kind is AuxKind.NONE:
        return proprio
    return np.concatenate([proprio, aux_block(state, i, layout, rng, noise_std)])
