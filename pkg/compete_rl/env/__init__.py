#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
赛跑环境模块
包含动力学和观测构造
"""

from .race import (
    AgentPhys,
    RaceState,
    reset,
    step
)

from .observation import (
    proprio_obs,
    competitive_obs,
    observation_layout,
    aux_block,
    build_observation
)

__all__ = [
    # 动力学
    'AgentPhys',
    'RaceState',
    'reset',
    'step',

    # 观测
    'proprio_obs',
    'competitive_obs',
    'observation_layout',
    'aux_block',
    'build_observation'
]
