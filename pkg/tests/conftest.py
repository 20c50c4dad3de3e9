#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试公共夹具
"""

import os
import sys
from typing import Any, Callable, Dict

import pytest

# 添加项目路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from compete_rl.config import reset_config_manager
from compete_rl.models.schema import ExperimentSpec


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    """每个测试使用干净的进程级配置"""
    for key in ("COMPETE_RL_THREADS", "COMPETE_RL_OUTPUT_DIR", "COMPETE_RL_LOG_LEVEL", "COMPETE_RL_LOG_FORMAT"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("COMPETE_RL_LOG_LEVEL", "WARNING")
    reset_config_manager()
    yield
    reset_config_manager()


def tiny_spec_data(default_output_dir: str, /, **overrides: Any) -> Dict[str, Any]:
    """短回合、小网络的实验配置（秒级完成），output_dir 也可以在 overrides 中覆盖"""
    data: Dict[str, Any] = {
        "name": "tiny",
        "env": {"kind": "PointRacer", "horizon": 20},
        "n_agents": 1,
        "total_iterations": 2,
        "steps_per_agent": 20,
        "seeds": [0],
        "eval_episodes": 2,
        "hidden_sizes": [8, 8],
        "output_dir": default_output_dir,
    }
    data.update(overrides)
    return data


@pytest.fixture
def output_dir(tmp_path) -> str:
    """临时输出目录"""
    path = tmp_path / "output"
    path.mkdir()
    return str(path)


@pytest.fixture
def make_spec(output_dir) -> Callable[..., ExperimentSpec]:
    """按需覆盖字段的小实验配置工厂"""
    def factory(**overrides: Any) -> ExperimentSpec:
        return ExperimentSpec.model_validate(tiny_spec_data(output_dir, **overrides))
    return factory
