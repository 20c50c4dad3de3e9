#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志配置
基于 structlog 的结构化日志
"""

import logging
import sys
from typing import Optional

import structlog

from compete_rl.config import get_config_manager

_configured = False


def configure_logging(level: Optional[str] = None, log_format: Optional[str] = None, force: bool = False) -> None:
    """
    配置结构化日志（进程内只配置一次）

    Args:
        level: 日志级别，缺省读取 COMPETE_RL_LOG_LEVEL
        log_format: console 或 json，缺省读取 COMPETE_RL_LOG_FORMAT
        force: 是否强制重新配置
    """
    global _configured
    if _configured and not force:
        return

    config = get_config_manager()
    level_name = (level or config.log_level).upper()
    numeric_level = getattr(logging, level_name, logging.INFO)
    renderer = (
        structlog.processors.JSONRenderer(ensure_ascii=False)
        if (log_format or config.log_format) == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    _configured = True


def get_logger(name: str) -> structlog.typing.FilteringBoundLogger:
    """获取带模块名的日志器"""
    configure_logging()
    return structlog.get_logger(name).bind(module=name)
