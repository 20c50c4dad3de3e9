#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
策略分布头
高斯头：状态无关的可训练 log_std
Beta头：主干输出 2·action_dim 个预激活，α, β = 1 + softplus(pre)，动作 a = 2u - 1
"""

import math
from typing import List, Tuple

import numpy as np
from scipy.special import betaln, digamma, expit, polygamma

from compete_rl.models.schema import HeadKind

LOG_2PI = math.log(2.0 * math.pi)
BETA_EDGE = 1e-6


def gaussian_logprob(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> np.ndarray:
    """
    对角高斯对数密度（最后一维求和）

    Args:
        mean: 均值
        log_std: 对数标准差
        action: 动作

    Returns:
        np.ndarray: 对数密度；一维输入时为标量
    """
    z = (np.asarray(action) - mean) * np.exp(-log_std)
    return np.sum(-0.5 * z * z - log_std - 0.5 * LOG_2PI, axis=-1)


def gaussian_logprob_grad(mean: np.ndarray, log_std: np.ndarray,
                          action: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """对数密度对均值和 log_std 的逐样本梯度"""
    inv_std = np.exp(-log_std)
    z = (np.asarray(action) - mean) * inv_std
    return z * inv_std, z * z - 1.0


def gaussian_sample(mean: np.ndarray, log_std: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """重参数化采样 a = μ + σ·z"""
    mean = np.asarray(mean, dtype=np.float64)
    return mean + np.exp(log_std) * rng.standard_normal(mean.shape)


def gaussian_entropy(log_std: np.ndarray) -> float:
    """对角高斯熵 Σ(log σ + ½log 2πe)"""
    return float(np.sum(log_std + 0.5 * (LOG_2PI + 1.0)))


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def beta_params(pre: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """预激活 -> (α, β)，前半为 α，后半为 β"""
    pre = np.asarray(pre, dtype=np.float64)
    half = pre.shape[-1] // 2
    return 1.0 + softplus(pre[..., :half]), 1.0 + softplus(pre[..., half:])


def _to_unit(action: np.ndarray) -> np.ndarray:
    a = np.clip(np.asarray(action, dtype=np.float64), -1.0 + BETA_EDGE, 1.0 - BETA_EDGE)
    return 0.5 * (a + 1.0)


def beta_logprob(pre: np.ndarray, action: np.ndarray) -> np.ndarray:
    """
    仿射 Beta 分布在 [-1, 1] 上的对数密度

    端点 ±1 会先向内收缩 1e-6；包含雅可比项 log(1/2)。

    Args:
        pre: 主干输出的预激活
        action: 动作

    Returns:
        np.ndarray: 对数密度
    """
    alpha, beta = beta_params(pre)
    u = _to_unit(action)
    logp = (alpha - 1.0) * np.log(u) + (beta - 1.0) * np.log1p(-u) - betaln(alpha, beta) - math.log(2.0)
    return np.sum(logp, axis=-1)


def beta_logprob_grad(pre: np.ndarray, action: np.ndarray) -> np.ndarray:
    """对数密度对预激活的梯度"""
    pre = np.asarray(pre, dtype=np.float64)
    half = pre.shape[-1] // 2
    alpha, beta = beta_params(pre)
    u = _to_unit(action)
    psi_total = digamma(alpha + beta)
    d_alpha = np.log(u) - digamma(alpha) + psi_total
    d_beta = np.log1p(-u) - digamma(beta) + psi_total
    return np.concatenate([d_alpha * expit(pre[..., :half]), d_beta * expit(pre[..., half:])], axis=-1)


def beta_sample(pre: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """a = 2u - 1, u ~ Beta(α, β)"""
    alpha, beta = beta_params(pre)
    return 2.0 * rng.beta(alpha, beta) - 1.0


def beta_mean(pre: np.ndarray) -> np.ndarray:
    """分布均值 (α - β) / (α + β)"""
    alpha, beta = beta_params(pre)
    return (alpha - beta) / (alpha + beta)


def beta_entropy(pre: np.ndarray) -> np.ndarray:
    """仿射 Beta 的微分熵（含 log 2 平移）"""
    alpha, beta = beta_params(pre)
    total = alpha + beta
    h = (betaln(alpha, beta) - (alpha - 1.0) * digamma(alpha) - (beta - 1.0) * digamma(beta)
         + (total - 2.0) * digamma(total) + math.log(2.0))
    return np.sum(h, axis=-1)


def beta_entropy_grad(pre: np.ndarray) -> np.ndarray:
    """熵对预激活的梯度"""
    pre = np.asarray(pre, dtype=np.float64)
    half = pre.shape[-1] // 2
    alpha, beta = beta_params(pre)
    total = alpha + beta
    tri_total = (total - 2.0) * polygamma(1, total)
    d_alpha = -(alpha - 1.0) * polygamma(1, alpha) + tri_total
    d_beta = -(beta - 1.0) * polygamma(1, beta) + tri_total
    return np.concatenate([d_alpha * expit(pre[..., :half]), d_beta * expit(pre[..., half:])], axis=-1)


class GaussianHead:
    """状态无关 log_std 的高斯头"""

    kind = HeadKind.GAUSSIAN

    def __init__(self, action_dim: int, log_std: np.ndarray = None):
        self.action_dim = action_dim
        self.log_std = np.zeros(action_dim) if log_std is None else np.asarray(log_std, dtype=np.float64)

    def trunk_outputs(self) -> int:
        return self.action_dim

    def parameters(self) -> List[np.ndarray]:
        return [self.log_std]

    def log_prob(self, out: np.ndarray, action: np.ndarray) -> np.ndarray:
        return gaussian_logprob(out, self.log_std, action)

    def log_prob_grad(self, out: np.ndarray, action: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """返回 (对主干输出的逐样本梯度, 对头参数的逐样本梯度)"""
        d_mean, d_log_std = gaussian_logprob_grad(out, self.log_std, action)
        return d_mean, [d_log_std]

    def entropy(self, out: np.ndarray) -> np.ndarray:
        batch = np.asarray(out).shape[:-1]
        return np.full(batch, gaussian_entropy(self.log_std))

    def entropy_grad(self, out: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        out = np.asarray(out)
        return np.zeros_like(out), [np.ones_like(out)]

    def sample(self, out: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return gaussian_sample(out, self.log_std, rng)

    def mean_action(self, out: np.ndarray) -> np.ndarray:
        return np.asarray(out, dtype=np.float64)

    def copy(self) -> "GaussianHead":
        return GaussianHead(self.action_dim, self.log_std.copy())


class BetaHead:
    """Beta 分布头，无额外参数"""

    kind = HeadKind.BETA

    def __init__(self, action_dim: int):
        self.action_dim = action_dim

    def trunk_outputs(self) -> int:
        return 2 * self.action_dim

    def parameters(self) -> List[np.ndarray]:
        return []

    def log_prob(self, out: np.ndarray, action: np.ndarray) -> np.ndarray:
        return beta_logprob(out, action)

    def log_prob_grad(self, out: np.ndarray, action: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        return beta_logprob_grad(out, action), []

    def entropy(self, out: np.ndarray) -> np.ndarray:
        return beta_entropy(out)

    def entropy_grad(self, out: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        return beta_entropy_grad(out), []

    def sample(self, out: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return beta_sample(out, rng)

    def mean_action(self, out: np.ndarray) -> np.ndarray:
        return beta_mean(out)

    def copy(self) -> "BetaHead":
        return BetaHead(self.action_dim)


def make_head(kind: HeadKind, action_dim: int):
    """按类型创建分布头"""
    if kind is HeadKind.GAUSSIAN:
        return GaussianHead(action_dim)
    if kind is HeadKind.BETA:
        return BetaHead(action_dim)
    raise ValueError(f"不支持的分布头: {kind}")
