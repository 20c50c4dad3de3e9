#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
训练主循环
collect_rollouts -> 每组参数一次 ppo_update -> 零填充评估
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from compete_rl.logging_config import get_logger
from compete_rl.models.errors import DivergenceError
from compete_rl.models.schema import CheckpointMeta, ExperimentSpec, MetricsRow, ObsLayout, UpdateStats
from compete_rl.orchestrator.evaluation import evaluate_episodes
from compete_rl.orchestrator.modes import PolicyBank, critic_input_dim, mode_label, policy_layout
from compete_rl.orchestrator.rollout import collect_rollouts
from compete_rl.orchestrator.seeding import SeedStreams
from compete_rl.ppo.update import ppo_update

logger = get_logger(__name__)

IterationCallback = Callable[[MetricsRow], None]


@dataclass
class TrainResult:
    """训练结果"""
    bank: PolicyBank
    layout: ObsLayout
    critic_dim: int
    label: str
    history: List[MetricsRow] = field(default_factory=list)

    def checkpoint_meta(self, spec: ExperimentSpec) -> CheckpointMeta:
        return CheckpointMeta(
            env_kind=spec.env.kind,
            n_train=spec.n_agents,
            flags=spec.flags,
            obs_layout=self.layout,
            critic_input_dim=self.critic_dim,
            mode=self.label,
        )


def _mean_stats(stats: List[UpdateStats]) -> UpdateStats:
    """独立模式下对各智能体的统计量取平均"""
    if len(stats) == 1:
        return stats[0]
    fields = UpdateStats.model_fields.keys()
    return UpdateStats(**{name: float(np.mean([getattr(s, name) for s in stats])) for name in fields})


def build_bank(spec: ExperimentSpec, streams: SeedStreams) -> TrainResult:
    """按实验配置初始化策略库（未训练）"""
    kind = spec.env.kind
    layout = policy_layout(kind, spec.flags, spec.n_agents, spec.self_first_aux)
    critic_dim = critic_input_dim(kind, spec.flags, spec.n_agents, layout)
    bank = PolicyBank.build(spec.flags, spec.n_agents, layout.total_dim, critic_dim, kind.action_dim,
                            spec.head, spec.hidden_sizes, streams)
    return TrainResult(bank=bank, layout=layout, critic_dim=critic_dim, label=mode_label(spec.flags, spec.n_agents))


def train(spec: ExperimentSpec, seed: int, callback: Optional[IterationCallback] = None) -> TrainResult:
    """
    训练一个种子

    Args:
        spec: 实验配置
        seed: 主种子
        callback: 每次迭代完成后以 MetricsRow 调用

    Returns:
        TrainResult: 训练后的策略库与指标历史（total_iterations=0 时历史为空）
    """
    streams = SeedStreams.from_master(seed)
    result = build_bank(spec, streams)
    log = logger.bind(experiment=spec.name, mode=result.label, seed=seed)

    env_steps_total = 0
    for iteration in range(spec.total_iterations):
        rollout = collect_rollouts(spec.env, result.bank, spec.flags, spec.steps_per_agent, streams,
                                   result.layout, spec.noise_std)
        env_steps_total += rollout.env_steps

        stats = []
        try:
            for buffer, params in zip(rollout.buffers, result.bank.param_sets):
                _, update_stats = ppo_update(buffer, params, spec.ppo, iteration)
                stats.append(update_stats)
        except DivergenceError as e:
            log.error("训练发散", iteration=iteration, error=str(e))
            raise
        merged = _mean_stats(stats)

        eval_rewards = np.concatenate([
            evaluate_episodes(params, spec.env.kind, spec.n_agents, spec.flags, spec.eval_episodes,
                              streams.eval, spec.env, spec.self_first_aux)
            for params in result.bank.param_sets
        ])

        row = MetricsRow(
            iteration=iteration,
            env_steps_total=env_steps_total,
            mode=result.label,
            n_agents=spec.n_agents,
            seed=seed,
            train_mean_ep_reward=rollout.mean_episode_reward,
            eval_mean_ep_reward=float(np.mean(eval_rewards)),
            eval_std=float(np.std(eval_rewards)),
            policy_loss=merged.policy_loss,
            value_loss=merged.value_loss,
            entropy=merged.entropy,
            clip_fraction=merged.clip_fraction,
            lr=merged.lr_used,
        )
        result.history.append(row)
        log.info("迭代完成", iteration=iteration, train_reward=row.train_mean_ep_reward,
                 eval_reward=row.eval_mean_ep_reward, policy_loss=row.policy_loss,
                 value_loss=row.value_loss, lr=row.lr)
        if callback is not None:
            callback(row)

    return result
