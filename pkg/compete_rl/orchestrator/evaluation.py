#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
单智能体评估
缺失的竞争维度补零，策略取分布均值
"""

from typing import Optional, Tuple

import numpy as np

from compete_rl.env.observation import build_observation
from compete_rl.env.race import reset, step
from compete_rl.models.errors import DimensionMismatchError
from compete_rl.models.schema import AuxKind, EnvKind, ModeFlags, ObsLayout, RaceConfig
from compete_rl.nn.params import ParamSet
from compete_rl.orchestrator.modes import policy_layout


def evaluation_layout(kind: EnvKind, flags: ModeFlags, n_train: int, self_first: bool = False) -> ObsLayout:
    """
    评估时的观测布局

    训练时有辅助块（任何类型）则保留 2·n_train 维并全部填零。
    """
    trained = policy_layout(kind, flags, n_train, self_first)
    if trained.aux_kind is AuxKind.NONE:
        return trained
    return ObsLayout(proprio_dim=trained.proprio_dim, aux_dim=trained.aux_dim,
                     aux_kind=AuxKind.ZERO_PAD, self_first=self_first)


def evaluate_episodes(params: ParamSet, kind: EnvKind, n_train: int, flags: ModeFlags, episodes: int,
                      rng: np.random.Generator, race_config: Optional[RaceConfig] = None,
                      self_first: bool = False) -> np.ndarray:
    """
    逐回合的评估奖励

    各回合互不影响，合并成一场 episodes 个智能体的赛跑一次性推进。

    Returns:
        np.ndarray: 长度 episodes 的无折扣回合奖励
    """
    if episodes < 1:
        raise ValueError(f"episodes 必须为正: {episodes}")
    layout = evaluation_layout(kind, flags, n_train, self_first)
    if params.obs_dim != layout.total_dim:
        raise DimensionMismatchError(
            f"策略输入维度 {params.obs_dim} 与评估布局 {layout.total_dim} "
            f"({kind.value}, n_train={n_train}, aux={flags.aux_obs.value}) 不一致"
        )

    if race_config is not None and race_config.kind is kind:
        config = race_config.model_copy(update={"n_agents": episodes})
    else:
        config = RaceConfig(kind=kind, n_agents=episodes)
    state = reset(config, seed=int(rng.integers(2 ** 31)))
    totals = np.zeros(episodes, dtype=np.float64)

    done = False
    while not done:
        obs = np.stack([build_observation(state, i, layout, kind) for i in range(episodes)])
        actions = params.mean_action(obs)
        state, rewards, done = step(state, actions[:, 0], config)
        totals += rewards
    return totals


def evaluate(params: ParamSet, kind: EnvKind, n_train: int, flags: ModeFlags, episodes: int,
             rng: np.random.Generator, race_config: Optional[RaceConfig] = None,
             self_first: bool = False) -> Tuple[float, float]:
    """
    零填充的单智能体评估

    Args:
        params: 在 flags 下训练的参数
        kind: 评估环境
        n_train: 训练时的智能体数
        flags: 训练时的模式开关
        episodes: 回合数
        rng: 评估随机源
        race_config: 环境参数，缺省为该环境的默认值
        self_first: 训练时的竞争块排序

    Returns:
        Tuple[float, float]: 回合奖励的均值与（总体）标准差
    """
    totals = evaluate_episodes(params, kind, n_train, flags, episodes, rng, race_config, self_first)
    return float(np.mean(totals)), float(np.std(totals))
