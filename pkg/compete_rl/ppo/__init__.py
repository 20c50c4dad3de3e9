#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PPO 模块
GAE、价值损失、裁剪代理目标与全批量更新
"""

from .buffer import (
    Trajectory,
    RolloutBuffer
)

from .gae import (
    compute_gae,
    compute_gae_reference
)

from .losses import (
    value_loss,
    value_loss_grad,
    normalize_advantages,
    clipped_surrogate,
    clipped_surrogate_grad
)

from .update import (
    PpoBatch,
    prepare_batch,
    learning_rate,
    actor_loss_and_grads,
    critic_loss_and_grads,
    ppo_update
)

__all__ = [
    'Trajectory',
    'RolloutBuffer',

    'compute_gae',
    'compute_gae_reference',

    'value_loss',
    'value_loss_grad',
    'normalize_advantages',
    'clipped_surrogate',
    'clipped_surrogate_grad',

    'PpoBatch',
    'prepare_batch',
    'learning_rate',
    'actor_loss_and_grads',
    'critic_loss_and_grads',
    'ppo_update'
]
