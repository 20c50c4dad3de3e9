#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
compete_rl
竞争观测增强 + 共享策略/共享经验的多智能体 PPO 实验框架
"""

__version__ = "1.0.0"
