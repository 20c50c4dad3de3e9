#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
奖励上限
PointRacer 以全力 a=1 为参考；StaminaRacer 用常数动作枚举给出下界
"""

from typing import Optional

import numpy as np

from compete_rl.env.race import reset, step
from compete_rl.models.schema import EnvKind, RaceConfig

# StaminaRacer 枚举的常数动作 0.1, 0.2, ..., 1.0
CONSTANT_ACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 11))


def constant_action_reward(config: RaceConfig, action: float) -> float:
    """单智能体以常数动作跑满一个回合的无折扣奖励"""
    single = config.model_copy(update={"n_agents": 1})
    state = reset(single)
    total = 0.0
    done = False
    while not done:
        state, rewards, done = step(state, [action], single)
        total += float(rewards[0])
    return total


def analytic_ceiling(kind: EnvKind, config: Optional[RaceConfig] = None) -> float:
    """
    单智能体回合奖励的参考上限

    Args:
        kind: 环境类型
        config: 环境参数，缺省为该环境的默认值

    Returns:
        float: PointRacer 为 a=1 的回合奖励；
               StaminaRacer 为最佳常数动作的回合奖励（真实最优的下界）
    """
    if config is None or config.kind is not kind:
        config = RaceConfig(kind=kind)
    if kind is EnvKind.POINT_RACER:
        return constant_action_reward(config, 1.0)
    return float(np.max([constant_action_reward(config, a) for a in CONSTANT_ACTIONS]))
