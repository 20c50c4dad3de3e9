#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
广义优势估计（GAE）
"""

from typing import Sequence, Tuple

import numpy as np


def compute_gae(rewards: Sequence[float], values: Sequence[float], dones: Sequence[float],
                bootstrap_value: float, gamma: float, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    递归计算 GAE

    δ_t = r_t + γ·V_{t+1}·(1 - done_t) - V_t
    Â_t = δ_t + γλ·(1 - done_t)·Â_{t+1}

    Args:
        rewards: 长度 T 的奖励
        values: 长度 T 的价值估计
        dones: 终止标记，done_t 为真时不向 t+1 自举
        bootstrap_value: V(s̄_T)，真正终止时传 0
        gamma: 折扣因子
        lam: GAE参数

    Returns:
        Tuple[np.ndarray, np.ndarray]: 优势与价值回归目标 (Â + V)
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    T = len(rewards)
    if T == 0:
        raise ValueError("compute_gae: 输入为空")
    if len(values) != T or len(dones) != T:
        raise ValueError(f"compute_gae: 长度不一致 r={T} V={len(values)} done={len(dones)}")

    advantages = np.zeros(T, dtype=np.float64)
    next_value = float(bootstrap_value)
    next_adv = 0.0
    for t in range(T - 1, -1, -1):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        next_adv = delta + gamma * lam * nonterminal * next_adv
        advantages[t] = next_adv
        next_value = values[t]
    return advantages, advantages + values


def compute_gae_reference(rewards: Sequence[float], values: Sequence[float], dones: Sequence[float],
                          bootstrap_value: float, gamma: float, lam: float) -> np.ndarray:
    """
    按定义的双重求和 Â_t = Σ_l (γλ)^l δ_{t+l}，在终止处截断

    只用于校验 compute_gae。
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    T = len(rewards)
    next_values = np.append(values[1:], bootstrap_value)
    deltas = rewards + gamma * next_values * (1.0 - dones) - values

    advantages = np.zeros(T, dtype=np.float64)
    for t in range(T):
        total = 0.0
        for l in range(T - t):
            total += (gamma * lam) ** l * deltas[t + l]
            if dones[t + l]:
                break
        advantages[t] = total
    return advantages
