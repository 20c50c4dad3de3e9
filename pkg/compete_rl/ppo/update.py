#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PPO 参数更新
逐轨迹 GAE -> 跨智能体汇总 -> 全批量优势标准化 -> epochs_per_iter 次全批量梯度步
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from compete_rl.models.errors import DivergenceError
from compete_rl.models.schema import PpoConfig, UpdateStats
from compete_rl.nn.adam import adam_step
from compete_rl.nn.params import ParamSet
from compete_rl.ppo.buffer import RolloutBuffer
from compete_rl.ppo.gae import compute_gae
from compete_rl.ppo.losses import (
    clipped_surrogate_grad,
    normalize_advantages,
    surrogate_terms,
    value_loss,
    value_loss_grad,
)


@dataclass
class PpoBatch:
    """汇总后的全批量训练数据"""
    obs: np.ndarray
    critic_obs: np.ndarray
    actions: np.ndarray
    logp_old: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self) -> int:
        return len(self.logp_old)


def prepare_batch(buffer: RolloutBuffer, config: PpoConfig) -> PpoBatch:
    """
    逐轨迹计算 GAE，按轨迹顺序拼接，并在整个汇总批次上标准化优势

    Args:
        buffer: 经验缓冲区
        config: PPO配置

    Returns:
        PpoBatch: 全批量数据
    """
    if len(buffer) == 0 or buffer.total_steps == 0:
        raise ValueError("ppo_update: 缓冲区为空")

    parts = {"obs": [], "critic_obs": [], "actions": [], "logp": [], "adv": [], "ret": []}
    for trajectory in buffer:
        arrays = trajectory.as_arrays()
        adv, ret = compute_gae(arrays["rewards"], arrays["values"], trajectory.terminals(),
                               trajectory.bootstrap_value, config.gamma, config.lam)
        parts["obs"].append(arrays["obs"])
        parts["critic_obs"].append(arrays["critic_obs"])
        parts["actions"].append(arrays["actions"])
        parts["logp"].append(arrays["logp"])
        parts["adv"].append(adv)
        parts["ret"].append(ret)

    return PpoBatch(
        obs=np.vstack(parts["obs"]),
        critic_obs=np.vstack(parts["critic_obs"]),
        actions=np.vstack(parts["actions"]),
        logp_old=np.concatenate(parts["logp"]),
        advantages=normalize_advantages(np.concatenate(parts["adv"])),
        returns=np.concatenate(parts["ret"]),
    )


def learning_rate(config: PpoConfig, iteration: int) -> float:
    """线性衰减 lr = lr0·(1 - iteration / total_iterations)"""
    if config.total_iterations <= 0:
        return config.lr0
    return config.lr0 * (1.0 - iteration / config.total_iterations)


def _clip_by_global_norm(grads: List[np.ndarray], max_norm) -> List[np.ndarray]:
    if max_norm is None:
        return grads
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if norm <= max_norm:
        return grads
    scale = max_norm / (norm + 1e-12)
    return [g * scale for g in grads]


def actor_loss_and_grads(params: ParamSet, batch: PpoBatch, config: PpoConfig) -> Tuple[float, List[np.ndarray]]:
    """
    策略损失 -(代理目标 + entropy_coef·熵) 及其对 actor_parameters() 的梯度

    Returns:
        Tuple[float, List[np.ndarray]]: 损失与梯度（与 actor_parameters() 同序）
    """
    head = params.head
    out, tape = params.actor.forward(batch.obs)
    logp_new = head.log_prob(out, batch.actions)
    _, per_sample, _ = surrogate_terms(logp_new, batch.logp_old, batch.advantages, config.clip_eps)
    objective = float(np.mean(per_sample))

    d_logp = clipped_surrogate_grad(logp_new, batch.logp_old, batch.advantages, config.clip_eps)
    d_out, d_head = head.log_prob_grad(out, batch.actions)
    g_out = d_logp[:, None] * d_out
    g_head = [np.sum(d_logp[:, None] * h, axis=0) for h in d_head]

    if config.entropy_coef > 0.0:
        objective += config.entropy_coef * float(np.mean(head.entropy(out)))
        e_out, e_head = head.entropy_grad(out)
        scale = config.entropy_coef / len(batch)
        g_out = g_out + scale * e_out
        g_head = [g + scale * np.sum(e, axis=0) for g, e in zip(g_head, e_head)]

    loss = -objective
    if not np.isfinite(loss):
        raise DivergenceError("non-finite policy loss")

    # 优化器只做下降，目标取负
    _, trunk_grads = params.actor.backward(tape, -g_out)
    return loss, trunk_grads + [-g for g in g_head]


def critic_loss_and_grads(params: ParamSet, batch: PpoBatch, config: PpoConfig) -> Tuple[float, List[np.ndarray]]:
    """
    价值损失及其对 critic_parameters() 的梯度（乘以 value_coef）
    """
    out, tape = params.critic.forward(batch.critic_obs)
    pred = out[:, 0]
    loss = value_loss(pred, batch.returns)
    if not np.isfinite(loss):
        raise DivergenceError("non-finite value loss")
    dy = config.value_coef * value_loss_grad(pred, batch.returns)
    _, grads = params.critic.backward(tape, dy[:, None])
    return loss, grads


def measure(params: ParamSet, batch: PpoBatch, config: PpoConfig, lr: float) -> UpdateStats:
    """用当前参数在整个批次上统计损失与概率比"""
    out, _ = params.actor.forward(batch.obs)
    logp_new = params.head.log_prob(out, batch.actions)
    ratio, per_sample, _ = surrogate_terms(logp_new, batch.logp_old, batch.advantages, config.clip_eps)
    stats = UpdateStats(
        policy_loss=-float(np.mean(per_sample)),
        value_loss=value_loss(params.value(batch.critic_obs), batch.returns),
        entropy=float(np.mean(params.head.entropy(out))),
        mean_ratio=float(np.mean(ratio)),
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > config.clip_eps)),
        lr_used=lr,
    )
    if not all(np.isfinite([stats.policy_loss, stats.value_loss, stats.entropy])):
        raise DivergenceError("non-finite update statistics")
    return stats


def ppo_update(buffer: RolloutBuffer, params: ParamSet, config: PpoConfig,
               iteration: int) -> Tuple[ParamSet, UpdateStats]:
    """
    一次 PPO 迭代的参数更新（全批量，不分小批次）

    Args:
        buffer: 用当前参数采样得到的经验（更新后被清空）
        params: 参数集合（原地更新）
        config: PPO配置
        iteration: 当前迭代序号（从 0 开始），决定学习率

    Returns:
        Tuple[ParamSet, UpdateStats]: 更新后的参数与统计量
    """
    batch = prepare_batch(buffer, config)
    lr = learning_rate(config, iteration)
    try:
        for _ in range(config.epochs_per_iter):
            _, actor_grads = actor_loss_and_grads(params, batch, config)
            adam_step(params.actor_parameters(), _clip_by_global_norm(actor_grads, config.max_grad_norm),
                      params.adam_actor, lr)
            _, critic_grads = critic_loss_and_grads(params, batch, config)
            adam_step(params.critic_parameters(), _clip_by_global_norm(critic_grads, config.max_grad_norm),
                      params.adam_critic, lr)
        stats = measure(params, batch, config, lr)
    except DivergenceError as e:
        raise e.with_iteration(iteration) from e
    buffer.clear()
    return params, stats
