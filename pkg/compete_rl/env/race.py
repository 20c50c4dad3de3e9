#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
一维赛跑环境
N 个同质、互不接触的智能体在同一条赛道上比速度
"""

import math
from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from compete_rl.models.errors import EpisodeFinishedError
from compete_rl.models.schema import EnvKind, RaceConfig


@dataclass(frozen=True)
class AgentPhys:
    """单个智能体的物理状态"""
    x: float = 0.0
    v: float = 0.0
    stamina: float = 1.0


@dataclass(frozen=True)
class RaceState:
    """N 智能体赛跑的完整状态"""
    agents: Tuple[AgentPhys, ...]
    t: int = 0

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def positions(self) -> np.ndarray:
        return np.array([agent.x for agent in self.agents], dtype=np.float64)

    def velocities(self) -> np.ndarray:
        return np.array([agent.v for agent in self.agents], dtype=np.float64)

    def permuted(self, order: Sequence[int]) -> "RaceState":
        """按给定顺序重排智能体"""
        return replace(self, agents=tuple(self.agents[j] for j in order))


def reset(config: RaceConfig, seed: int = 0) -> RaceState:
    """
    重置环境

    起点固定在原点，不引入重置噪声；seed 只为接口对称保留。

    Args:
        config: 环境配置
        seed: 随机种子

    Returns:
        RaceState: t=0 的初始状态
    """
    return RaceState(agents=tuple(AgentPhys() for _ in range(config.n_agents)), t=0)


def _clamp_action(action: float) -> float:
    if not math.isfinite(action):
        raise ValueError(f"动作不是有限数: {action}")
    return min(1.0, max(-1.0, action))


def _advance(agent: AgentPhys, action: float, config: RaceConfig) -> Tuple[AgentPhys, float]:
    drag = config.c_d * agent.v * abs(agent.v)
    if config.kind is EnvKind.POINT_RACER:
        v_next = agent.v + config.dt * (config.f_max * action - drag)
        stamina_next = 1.0
    else:
        m = agent.stamina
        v_next = agent.v + config.dt * (config.f_max * action * m - drag)
        stamina_next = m + config.dt * (config.rho * (1.0 - m) - config.kappa * abs(action))
        stamina_next = min(1.0, max(0.0, stamina_next))
    x_next = agent.x + config.dt * v_next
    reward = v_next - config.w_ctrl * action * action
    return AgentPhys(x=x_next, v=v_next, stamina=stamina_next), reward


def step(state: RaceState, actions: Sequence[float], config: RaceConfig) -> Tuple[RaceState, np.ndarray, bool]:
    """
    推进一步

    Args:
        state: 当前状态
        actions: 每个智能体一个标量动作，超出 [-1, 1] 的部分被截断
        config: 环境配置

    Returns:
        Tuple[RaceState, np.ndarray, bool]: 新状态、每个智能体的奖励、回合是否结束
    """
    if state.t >= config.horizon:
        raise EpisodeFinishedError(state.t, config.horizon)
    if len(actions) != state.n_agents:
        raise ValueError(f"动作数量 {len(actions)} 与智能体数量 {state.n_agents} 不一致")

    agents = []
    rewards = np.empty(state.n_agents, dtype=np.float64)
    for i, (agent, action) in enumerate(zip(state.agents, actions)):
        next_agent, reward = _advance(agent, _clamp_action(float(action)), config)
        agents.append(next_agent)
        rewards[i] = reward

    t_next = state.t + 1
    return RaceState(agents=tuple(agents), t=t_next), rewards, t_next == config.horizon
