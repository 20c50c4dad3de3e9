#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理器
负责进程级设置（环境变量）和实验配置文件的加载
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

import psutil
from dotenv import load_dotenv
from pydantic import ValidationError

from compete_rl.models.errors import ConfigNotFoundError
from compete_rl.models.schema import ExperimentSpec

_LOG_FORMATS = ("console", "json")


class ConfigManager:
    """配置管理器"""

    def __init__(self):
        """初始化配置管理器"""
        # 加载 .env
        load_dotenv()

        self.threads = self._read_threads(os.getenv("COMPETE_RL_THREADS"))
        self.output_dir = os.getenv("COMPETE_RL_OUTPUT_DIR", "output")
        self.log_level = os.getenv("COMPETE_RL_LOG_LEVEL", "INFO").upper()

        log_format = os.getenv("COMPETE_RL_LOG_FORMAT", "console").lower()
        self.log_format = log_format if log_format in _LOG_FORMATS else "console"

    @staticmethod
    def _read_threads(raw: Optional[str]) -> Optional[int]:
        """解析 COMPETE_RL_THREADS，非法值视为未设置"""
        if raw is None or not raw.strip():
            return None
        try:
            value = int(raw)
        except ValueError:
            return None
        return value if value > 0 else None

    def get_worker_count(self, requested: Optional[int] = None) -> int:
        """
        获取工作进程数

        Args:
            requested: 调用方希望的进程数

        Returns:
            int: 受 COMPETE_RL_THREADS 约束后的进程数
        """
        available = psutil.cpu_count(logical=True) or 1
        count = requested if requested is not None else available
        if self.threads is not None:
            count = min(count, self.threads)
        return max(1, count)

    def load_experiment_spec(self, path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentSpec:
        """
        加载并校验实验配置文件

        Args:
            path: JSON配置文件路径
            overrides: 覆盖的顶层字段（命令行参数）

        Returns:
            ExperimentSpec: 校验后的实验配置
        """
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigNotFoundError(str(config_path))

        with open(config_path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"配置文件不是合法JSON: {e}") from e

        if not isinstance(data, dict):
            raise ValueError("配置文件顶层必须是JSON对象")

        if "output_dir" not in data:
            data["output_dir"] = self.output_dir
        data.update(overrides or {})
        return ExperimentSpec.model_validate(data)

    def get_config_summary(self) -> Dict[str, Any]:
        """
        获取配置摘要

        Returns:
            Dict[str, Any]: 配置摘要
        """
        return {
            "threads": self.threads,
            "worker_count": self.get_worker_count(),
            "output_dir": self.output_dir,
            "log_level": self.log_level,
            "log_format": self.log_format,
        }


def format_validation_error(error: ValidationError) -> str:
    """把pydantic校验错误压成一行，便于命令行输出"""
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item.get("loc", ())) or "<root>"
        parts.append(f"{location}: {item.get('msg')}")
    return "; ".join(parts)


# 全局配置管理器实例
_config_manager: Optional[ConfigManager] = None


def get_config_manager() -> ConfigManager:
    """获取全局配置管理器"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def reset_config_manager() -> None:
    """丢弃缓存的配置（环境变量变化后调用）"""
    global _config_manager
    _config_manager = None
