#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
轨迹与经验缓冲区
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List

import numpy as np


@dataclass
class Trajectory:
    """单个智能体的一条轨迹"""
    agent_id: int
    obs: List[np.ndarray] = field(default_factory=list)
    critic_obs: List[np.ndarray] = field(default_factory=list)
    actions: List[np.ndarray] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    logp: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    dones: List[bool] = field(default_factory=list)
    # 末状态价值 V(s̄_T)；时间截断时用于自举
    bootstrap_value: float = 0.0
    truncated: bool = True

    def append(self, obs: np.ndarray, critic_obs: np.ndarray, action: np.ndarray, reward: float,
               logp: float, value: float, done: bool) -> None:
        if self.dones and self.dones[-1]:
            raise ValueError("轨迹已结束，不能继续追加")
        self.obs.append(obs)
        self.critic_obs.append(critic_obs)
        self.actions.append(action)
        self.rewards.append(float(reward))
        self.logp.append(float(logp))
        self.values.append(float(value))
        self.dones.append(bool(done))

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def episode_reward(self) -> float:
        """无折扣回合奖励"""
        return float(np.sum(self.rewards))

    def terminals(self) -> np.ndarray:
        """
        GAE 使用的终止标记

        时间截断不是终止：末步的 done 被清零，由 bootstrap_value 自举。
        """
        terminals = np.asarray(self.dones, dtype=np.float64)
        if self.truncated and len(terminals):
            terminals[-1] = 0.0
        return terminals

    def as_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "obs": np.vstack(self.obs),
            "critic_obs": np.vstack(self.critic_obs),
            "actions": np.vstack(self.actions),
            "rewards": np.asarray(self.rewards, dtype=np.float64),
            "logp": np.asarray(self.logp, dtype=np.float64),
            "values": np.asarray(self.values, dtype=np.float64),
            "dones": np.asarray(self.dones, dtype=bool),
        }


class RolloutBuffer:
    """一次采样阶段的轨迹集合（共享模式下即共享缓冲区 D）"""

    def __init__(self):
        self.trajectories: List[Trajectory] = []

    def add(self, trajectory: Trajectory) -> None:
        if len(trajectory) == 0:
            return
        if self.trajectories:
            expected = self.trajectories[0].obs[0].shape
            if trajectory.obs[0].shape != expected:
                raise ValueError(f"观测维度 {trajectory.obs[0].shape} 与缓冲区 {expected} 不一致")
        self.trajectories.append(trajectory)

    def extend(self, trajectories: List[Trajectory]) -> None:
        for trajectory in trajectories:
            self.add(trajectory)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories)

    @property
    def total_steps(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def agent_ids(self) -> List[int]:
        return sorted({t.agent_id for t in self.trajectories})

    def episode_rewards(self) -> List[float]:
        return [t.episode_reward for t in self.trajectories if t.dones and t.dones[-1]]

    def clear(self) -> None:
        self.trajectories = []
