#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
编排模块
模式开关、策略库、经验采集、训练与零填充评估
"""

from .seeding import (
    derive_rng,
    SeedStreams
)

from .modes import (
    SA_MODE,
    SA_FLAGS,
    BASELINE_MODES,
    parse_mode,
    mode_name,
    mode_label,
    resolve_cell,
    policy_layout,
    critic_input_dim,
    global_critic_input,
    PolicyBank
)

from .rollout import (
    RolloutResult,
    collect_rollouts
)

from .evaluation import (
    evaluation_layout,
    evaluate_episodes,
    evaluate
)

from .trainer import (
    TrainResult,
    build_bank,
    train
)

__all__ = [
    # 随机源
    'derive_rng',
    'SeedStreams',

    # 模式
    'SA_MODE',
    'SA_FLAGS',
    'BASELINE_MODES',
    'parse_mode',
    'mode_name',
    'mode_label',
    'resolve_cell',
    'policy_layout',
    'critic_input_dim',
    'global_critic_input',
    'PolicyBank',

    # 采集与训练
    'RolloutResult',
    'collect_rollouts',
    'evaluation_layout',
    'evaluate_episodes',
    'evaluate',
    'TrainResult',
    'build_bank',
    'train'
]
