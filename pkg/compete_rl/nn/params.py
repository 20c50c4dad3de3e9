#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
参数集合与检查点
ParamSet = actor(主干 + 分布头) + critic + 各自的 Adam 状态
"""

import json
import os
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from compete_rl.models.schema import CheckpointFile, CheckpointMeta, HeadKind, ParamSnapshot
from compete_rl.nn.adam import AdamState
from compete_rl.nn.heads import BetaHead, GaussianHead, make_head
from compete_rl.nn.mlp import Mlp

# 策略输出层的初始缩放，初始动作接近零
POLICY_OUTPUT_SCALE = 0.01


class ParamSet:
    """一组策略/价值参数 (θ, φ)"""

    def __init__(self, actor: Mlp, head, critic: Mlp,
                 adam_actor: Optional[AdamState] = None, adam_critic: Optional[AdamState] = None):
        """
        初始化参数集合

        Args:
            actor: 策略主干
            head: GaussianHead 或 BetaHead
            critic: 价值网络（输出维度 1）
            adam_actor: 策略优化器状态，缺省为零矩
            adam_critic: 价值优化器状态，缺省为零矩
        """
        if critic.output_dim != 1:
            raise ValueError(f"critic 输出维度必须为 1: {critic.output_dim}")
        if actor.output_dim != head.trunk_outputs():
            raise ValueError(f"actor 输出维度 {actor.output_dim} 与分布头需要的 {head.trunk_outputs()} 不一致")
        self.actor = actor
        self.head = head
        self.critic = critic
        self.adam_actor = adam_actor or AdamState.zeros_like(self.actor_parameters())
        self.adam_critic = adam_critic or AdamState.zeros_like(self.critic_parameters())

    @classmethod
    def build(cls, obs_dim: int, critic_dim: int, action_dim: int, head_kind: HeadKind,
              hidden_sizes: Sequence[int], rng: np.random.Generator) -> "ParamSet":
        """
        随机初始化一组参数

        Args:
            obs_dim: 策略输入维度
            critic_dim: 价值网络输入维度
            action_dim: 动作维度
            head_kind: 分布头类型
            hidden_sizes: 隐藏层宽度
            rng: 初始化随机源

        Returns:
            ParamSet: 新参数集合
        """
        head = make_head(head_kind, action_dim)
        hidden = list(hidden_sizes)
        actor = Mlp.initialize([obs_dim, *hidden, head.trunk_outputs()], rng, output_scale=POLICY_OUTPUT_SCALE)
        critic = Mlp.initialize([critic_dim, *hidden, 1], rng)
        return cls(actor, head, critic)

    @property
    def obs_dim(self) -> int:
        return self.actor.input_dim

    @property
    def critic_dim(self) -> int:
        return self.critic.input_dim

    def actor_parameters(self) -> List[np.ndarray]:
        return self.actor.parameters() + self.head.parameters()

    def critic_parameters(self) -> List[np.ndarray]:
        return self.critic.parameters()

    def act(self, obs: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """
        按策略采样

        Args:
            obs: (B, obs_dim)
            rng: 采样随机源

        Returns:
            Tuple[np.ndarray, np.ndarray]: 未截断的动作 (B, action_dim) 与对数概率 (B,)
        """
        out, _ = self.actor.forward(obs)
        action = self.head.sample(out, rng)
        return action, self.head.log_prob(out, action)

    def log_prob(self, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
        out, _ = self.actor.forward(obs)
        return self.head.log_prob(out, action)

    def mean_action(self, obs: np.ndarray) -> np.ndarray:
        """确定性动作（分布均值）"""
        out, _ = self.actor.forward(obs)
        return self.head.mean_action(out)

    def value(self, critic_obs: np.ndarray) -> np.ndarray:
        out, _ = self.critic.forward(critic_obs)
        return out[..., 0]

    def copy(self) -> "ParamSet":
        return ParamSet(self.actor.copy(), self.head.copy(), self.critic.copy(),
                        self.adam_actor.copy(), self.adam_critic.copy())

    def to_snapshot(self) -> ParamSnapshot:
        log_std = self.head.log_std.tolist() if isinstance(self.head, GaussianHead) else None
        return ParamSnapshot(
            head_kind=self.head.kind,
            log_std=log_std,
            actor=self.actor.to_snapshot(),
            critic=self.critic.to_snapshot(),
            adam_actor=self.adam_actor.to_snapshot(),
            adam_critic=self.adam_critic.to_snapshot(),
        )

    @classmethod
    def from_snapshot(cls, snapshot: ParamSnapshot) -> "ParamSet":
        actor = Mlp.from_snapshot(snapshot.actor)
        if snapshot.head_kind is HeadKind.GAUSSIAN:
            head = GaussianHead(actor.output_dim, np.array(snapshot.log_std, dtype=np.float64))
        else:
            head = BetaHead(actor.output_dim // 2)
        return cls(actor, head, Mlp.from_snapshot(snapshot.critic),
                   AdamState.from_snapshot(snapshot.adam_actor),
                   AdamState.from_snapshot(snapshot.adam_critic))


def save_checkpoint(path: str, meta: CheckpointMeta, param_sets: Sequence[ParamSet]) -> str:
    """
    写入 JSON 检查点

    Args:
        path: 目标文件
        meta: 训练上下文
        param_sets: 共享模式 1 组，独立模式 N 组

    Returns:
        str: 写入的路径
    """
    document = CheckpointFile(meta=meta, policies=[p.to_snapshot() for p in param_sets])
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(target.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(document.model_dump_json())
    os.replace(tmp, target)
    return str(target)


def load_checkpoint(path: str) -> Tuple[CheckpointMeta, List[ParamSet]]:
    """读取 JSON 检查点"""
    with open(path, "r", encoding="utf-8") as f:
        document = CheckpointFile.model_validate(json.load(f))
    if document.format_version != 1:
        raise ValueError(f"不支持的检查点版本: {document.format_version}")
    return document.meta, [ParamSet.from_snapshot(s) for s in document.policies]
