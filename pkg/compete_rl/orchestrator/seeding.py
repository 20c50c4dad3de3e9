#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
随机源派生
主种子按固定标签拆分成互不相关的随机流，只差一个开关的模式共享其余随机性
"""

import zlib
from dataclasses import dataclass, field
from typing import Dict

import numpy as np


def derive_rng(master_seed: int, label: str) -> np.random.Generator:
    """
    由主种子和标签派生随机源

    Args:
        master_seed: 主种子
        label: 随机流标签，如 "policy"、"init/2"

    Returns:
        np.random.Generator: 独立随机源
    """
    entropy = [int(master_seed), zlib.crc32(label.encode("utf-8"))]
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass
class SeedStreams:
    """一个种子的全部随机流"""
    master_seed: int
    env: np.random.Generator
    policy: np.random.Generator
    noise: np.random.Generator
    eval: np.random.Generator
    _init: Dict[str, np.random.Generator] = field(default_factory=dict)

    @classmethod
    def from_master(cls, master_seed: int) -> "SeedStreams":
        return cls(
            master_seed=master_seed,
            env=derive_rng(master_seed, "env"),
            policy=derive_rng(master_seed, "policy"),
            noise=derive_rng(master_seed, "noise"),
            eval=derive_rng(master_seed, "eval"),
        )

    def init(self, label: str = "init") -> np.random.Generator:
        """参数初始化随机源；独立模式下每个智能体用 init/{i}"""
        if label not in self._init:
            self._init[label] = derive_rng(self.master_seed, label)
        return self._init[label]
