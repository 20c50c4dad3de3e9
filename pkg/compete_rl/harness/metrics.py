#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
指标文件
metrics.csv 只追加写入，中断后已写入的行仍然有效
"""

from pathlib import Path
from typing import Iterable

import pandas as pd

from compete_rl.models.schema import MetricsRow

METRICS_COLUMNS = list(MetricsRow.model_fields.keys())


def append_metrics(path: str, rows: Iterable[MetricsRow]) -> int:
    """
    追加指标行，文件不存在时先写表头

    Args:
        path: metrics.csv 路径
        rows: 指标行

    Returns:
        int: 写入的行数
    """
    records = [row.model_dump(mode="json") for row in rows]
    if not records:
        return 0
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame.from_records(records, columns=METRICS_COLUMNS)
    frame.to_csv(target, mode="a", header=not target.exists(), index=False, lineterminator="\n")
    return len(records)


def read_metrics(path: str) -> pd.DataFrame:
    """读取 metrics.csv，列顺序与 MetricsRow 一致，浮点数按写出的值精确还原"""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in METRICS_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} 缺少列: {missing}")
    return frame[METRICS_COLUMNS]
