#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
经验采集
N 个智能体同步跑完整回合，数据分布式采样、集中式训练
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from compete_rl.env.observation import build_observation
from compete_rl.env.race import RaceState, reset, step
from compete_rl.models.errors import DimensionMismatchError, DivergenceError
from compete_rl.models.schema import CriticInput, ModeFlags, ObsLayout, RaceConfig, Sharing
from compete_rl.orchestrator.modes import PolicyBank, global_critic_input
from compete_rl.orchestrator.seeding import SeedStreams
from compete_rl.ppo.buffer import RolloutBuffer, Trajectory


@dataclass
class RolloutResult:
    """一次采集的结果"""
    buffers: List[RolloutBuffer]
    # 每个智能体每个回合的无折扣奖励
    episode_rewards: List[float] = field(default_factory=list)
    steps_per_agent: int = 0
    episodes: int = 0

    @property
    def env_steps(self) -> int:
        """所有智能体的总步数"""
        return sum(buffer.total_steps for buffer in self.buffers)

    @property
    def mean_episode_reward(self) -> float:
        return float(np.mean(self.episode_rewards)) if self.episode_rewards else 0.0


def _observe(state: RaceState, env_config: RaceConfig, flags: ModeFlags, layout: ObsLayout,
             streams: SeedStreams, noise_std: float) -> Tuple[np.ndarray, np.ndarray]:
    obs = np.stack([
        build_observation(state, i, layout, env_config.kind, streams.noise, noise_std)
        for i in range(state.n_agents)
    ])
    if flags.critic_input is CriticInput.DECENTRALIZED:
        return obs, obs

    proprio_dim = layout.proprio_dim
    critic_obs = np.stack([
        global_critic_input(state, i, flags, env_config.kind,
                            aux=obs[i, proprio_dim:] if layout.aux_dim else None)
        for i in range(state.n_agents)
    ])
    return obs, critic_obs


def _check_finite(name: str, values: np.ndarray, episode: int, t: int) -> None:
    if not np.all(np.isfinite(values)):
        raise DivergenceError(f"non-finite {name} in episode {episode} at step {t}")


def collect_rollouts(env_config: RaceConfig, bank: PolicyBank, flags: ModeFlags, steps_per_agent: int,
                     streams: SeedStreams, layout: ObsLayout, noise_std: float = 1.0) -> RolloutResult:
    """
    采集经验直到每个智能体至少有 steps_per_agent 步

    Args:
        env_config: 环境配置
        bank: 策略库
        flags: 模式开关
        steps_per_agent: 每个智能体的最少步数（只按整回合采集）
        streams: 随机流
        layout: 策略输入布局
        noise_std: 噪声辅助块的标准差

    Returns:
        RolloutResult: 共享模式 1 个缓冲区（汇总全部智能体），独立模式 N 个
    """
    n = env_config.n_agents
    if bank.n_agents != n:
        raise DimensionMismatchError(f"策略库按 N={bank.n_agents} 构建，环境有 {n} 个智能体")
    if bank.param_sets[0].obs_dim != layout.total_dim:
        raise DimensionMismatchError(f"策略输入维度 {bank.param_sets[0].obs_dim} 与布局 {layout.total_dim} 不一致")

    shared = flags.sharing is Sharing.SHARED
    result = RolloutResult(buffers=[RolloutBuffer() for _ in range(1 if shared else n)])

    while result.steps_per_agent < steps_per_agent:
        episode = result.episodes
        state = reset(env_config, seed=int(streams.env.integers(2 ** 31)))
        trajectories = [Trajectory(agent_id=i) for i in range(n)]

        done = False
        while not done:
            obs, critic_obs = _observe(state, env_config, flags, layout, streams, noise_std)
            _check_finite("observation", obs, episode, state.t)
            actions, logp, values = bank.act(obs, critic_obs, streams.policy)
            _check_finite("action", actions, episode, state.t)

            # 缓冲区保存未截断的采样动作，截断只发生在环境内部
            next_state, rewards, done = step(state, actions[:, 0], env_config)
            _check_finite("reward", rewards, episode, state.t)
            for i, trajectory in enumerate(trajectories):
                trajectory.append(obs[i], critic_obs[i], actions[i], rewards[i], logp[i], values[i], done)
            state = next_state

        _, final_critic_obs = _observe(state, env_config, flags, layout, streams, noise_std)
        bootstrap = bank.values(final_critic_obs)
        for i, trajectory in enumerate(trajectories):
            trajectory.bootstrap_value = float(bootstrap[i])
            result.episode_rewards.append(trajectory.episode_reward)
            result.buffers[0 if shared else i].add(trajectory)

        result.steps_per_agent += env_config.horizon
        result.episodes += 1

    return result
