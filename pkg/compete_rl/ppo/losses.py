#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PPO 损失
价值均方误差、裁剪代理目标及其解析梯度
"""

from typing import Tuple

import numpy as np

from compete_rl.models.errors import DivergenceError

ADV_EPS = 1e-8


def value_loss(values_pred: np.ndarray, returns: np.ndarray) -> float:
    """所有样本平方误差的算术平均"""
    err = np.asarray(values_pred, dtype=np.float64) - np.asarray(returns, dtype=np.float64)
    return float(np.mean(err * err))


def value_loss_grad(values_pred: np.ndarray, returns: np.ndarray) -> np.ndarray:
    """价值损失对每个预测值的梯度"""
    err = np.asarray(values_pred, dtype=np.float64) - np.asarray(returns, dtype=np.float64)
    return 2.0 * err / err.size


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """
    标准化为零均值、单位（总体）标准差

    长度小于 2 时原样返回。
    """
    advantages = np.asarray(advantages, dtype=np.float64)
    if advantages.size < 2:
        return advantages
    return (advantages - advantages.mean()) / (advantages.std() + ADV_EPS)


def _ratio(logp_new: np.ndarray, logp_old: np.ndarray) -> np.ndarray:
    ratio = np.exp(np.asarray(logp_new, dtype=np.float64) - np.asarray(logp_old, dtype=np.float64))
    if not np.all(np.isfinite(ratio)):
        raise DivergenceError("non-finite probability ratio")
    return ratio


def surrogate_terms(logp_new: np.ndarray, logp_old: np.ndarray, advantages: np.ndarray,
                    clip_eps: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    逐样本代理项

    Returns:
        Tuple: (概率比, min 后的逐样本目标, 是否取未裁剪分支)
    """
    ratio = _ratio(logp_new, logp_old)
    advantages = np.asarray(advantages, dtype=np.float64)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    return ratio, np.minimum(unclipped, clipped), unclipped <= clipped


def clipped_surrogate(logp_new: np.ndarray, logp_old: np.ndarray, advantages: np.ndarray,
                      clip_eps: float) -> float:
    """
    裁剪代理目标（最大化）

    mean(min(ratio·Â, clip(ratio, 1-ε, 1+ε)·Â))
    """
    _, objective, _ = surrogate_terms(logp_new, logp_old, advantages, clip_eps)
    return float(np.mean(objective))


def clipped_surrogate_grad(logp_new: np.ndarray, logp_old: np.ndarray, advantages: np.ndarray,
                           clip_eps: float) -> np.ndarray:
    """
    代理目标对 logp_new 的逐样本梯度

    取裁剪分支的样本梯度精确为零。
    """
    ratio, _, use_unclipped = surrogate_terms(logp_new, logp_old, advantages, clip_eps)
    advantages = np.asarray(advantages, dtype=np.float64)
    return np.where(use_unclipped, ratio * advantages, 0.0) / ratio.size
