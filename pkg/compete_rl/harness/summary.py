#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
收敛后统计
所有汇总量都只由原始 metrics.csv 计算
"""

import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from compete_rl.harness.metrics import read_metrics
from compete_rl.harness.runner import MANIFEST_FILE, METRICS_FILE, read_manifest
from compete_rl.models.schema import EnvKind, GridCellSummary, GridSummary, RunStatus

SUMMARY_CSV = "summary.csv"
SUMMARY_TXT = "summary.txt"

SUMMARY_COLUMNS = ["env_kind", "mode", "label", "n_agents", "mean", "std", "n_effective", "n_failed",
                   "run_dir", "seeds", "convergence_fraction"]


def window_length(iterations: int, fraction: float) -> int:
    """收敛窗口长度 max(1, ceil(fraction·iterations))"""
    return max(1, math.ceil(fraction * iterations))


def seed_window_mean(metrics: pd.DataFrame, fraction: float) -> float:
    """单个种子最后 fraction 比例迭代的评估奖励均值"""
    if metrics.empty:
        raise ValueError("metrics 为空，无法计算收敛窗口")
    ordered = metrics.sort_values("iteration")
    tail = ordered["eval_mean_ep_reward"].to_numpy()[-window_length(len(ordered), fraction):]
    return math.fsum(tail) / len(tail)


def aggregate(values: Sequence[float]) -> Tuple[float, float]:
    """
    跨种子均值与总体标准差

    精确求和，结果与种子顺序无关。
    """
    if not values:
        return float("nan"), float("nan")
    n = len(values)
    mean = math.fsum(values) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)
    return mean, std


def declared_seeds(run_dir: str, seeds: Optional[Sequence[int]] = None) -> List[int]:
    """声明的种子（升序），缺省为目录中找到的全部 seed<k>"""
    if seeds is not None:
        return sorted(seeds)
    root = Path(run_dir)
    return sorted(int(p.name[len("seed"):]) for p in root.glob("seed*") if p.name[len("seed"):].isdigit())


def collect_seed_means(run_dir: str, fraction: float,
                       seeds: Optional[Sequence[int]] = None) -> Tuple[List[float], int]:
    """
    收集一个单元内已完成种子的窗口均值

    Args:
        run_dir: <模式名>_N<N> 目录
        fraction: 收敛窗口占比
        seeds: 声明的种子，缺省为目录中找到的全部种子

    Returns:
        Tuple[List[float], int]: 已完成种子的窗口均值（按种子号排序）与失败种子数
    """
    root = Path(run_dir)
    means, failed = [], 0
    for seed in declared_seeds(run_dir, seeds):
        directory = root / f"seed{seed}"
        manifest = read_manifest(directory / MANIFEST_FILE)
        if manifest is None or manifest.status is not RunStatus.COMPLETED:
            failed += 1
            continue
        metrics = read_metrics(str(directory / METRICS_FILE))
        if metrics.empty:
            failed += 1
            continue
        means.append(seed_window_mean(metrics, fraction))
    return means, failed


def summarize_cell(env_kind: EnvKind, mode: str, label: str, n_agents: int, run_dir: str, fraction: float,
                   seeds: Optional[Sequence[int]] = None) -> GridCellSummary:
    """一个 (模式, N) 单元的收敛后统计"""
    resolved = declared_seeds(run_dir, seeds)
    means, failed = collect_seed_means(run_dir, fraction, resolved)
    mean, std = aggregate(means)
    return GridCellSummary(env_kind=env_kind, mode=mode, label=label, n_agents=n_agents, mean=mean, std=std,
                           n_effective=len(means), n_failed=failed, run_dir=str(run_dir), seeds=resolved)


def _format_seeds(seeds: Sequence[int]) -> str:
    return ";".join(str(s) for s in seeds)


def _parse_seeds(raw: str) -> List[int]:
    return [int(part) for part in str(raw).split(";") if part.strip()]


def summary_frame(summary: GridSummary) -> pd.DataFrame:
    records = [cell.model_dump(mode="json") for cell in summary.cells]
    frame = pd.DataFrame.from_records(records, columns=SUMMARY_COLUMNS[:-1])
    frame["seeds"] = frame["seeds"].map(_format_seeds)
    frame["convergence_fraction"] = summary.convergence_fraction
    return frame


def write_summary_csv(summary: GridSummary, path: Optional[str] = None) -> str:
    target = Path(path) if path else Path(summary.root_dir) / SUMMARY_CSV
    target.parent.mkdir(parents=True, exist_ok=True)
    summary_frame(summary).to_csv(target, index=False, lineterminator="\n")
    return str(target)


def format_cell(cell: GridCellSummary) -> str:
    if cell.n_effective == 0:
        return f"failed ({cell.n_failed})"
    return f"{cell.mean:.2f} ± {cell.std:.2f} ({cell.n_effective})"


def summary_table_text(summary: GridSummary) -> str:
    """
    透视表：环境为行，单元标签为列

    同一标签出现多次（N=1 时多个模式都退化为 SA）只保留一列。
    """
    records = [
        {"env": cell.env_kind.value, "label": cell.label, "value": format_cell(cell)}
        for cell in summary.cells
    ]
    frame = pd.DataFrame.from_records(records, columns=["env", "label", "value"])
    frame = frame.drop_duplicates(subset=["env", "label"])
    columns = list(dict.fromkeys(frame["label"]))
    table = frame.pivot(index="env", columns="label", values="value").reindex(columns=columns).fillna("-")
    table.index.name = None
    table.columns.name = None
    return table.to_string() + "\n"


def write_summary_text(summary: GridSummary, path: Optional[str] = None) -> str:
    target = Path(path) if path else Path(summary.root_dir) / SUMMARY_TXT
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# {summary.name}: 收敛窗口 = 最后 {summary.convergence_fraction:.0%} 迭代, mean ± std (n_eff)\n")
        f.write(summary_table_text(summary))
    return str(target)


def load_grid_summary(path: str) -> GridSummary:
    """
    读取 summary.csv

    Args:
        path: summary.csv 路径

    Returns:
        GridSummary: 汇总（root_dir 为文件所在目录）
    """
    target = Path(path)
    frame = pd.read_csv(target, float_precision="round_trip", dtype={"seeds": str})
    missing = [c for c in SUMMARY_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} 缺少列: {missing}")
    frame["seeds"] = frame["seeds"].fillna("").map(_parse_seeds)

    cells = [
        GridCellSummary(
            env_kind=EnvKind(row["env_kind"]),
            mode=str(row["mode"]),
            label=str(row["label"]),
            n_agents=int(row["n_agents"]),
            mean=float(row["mean"]),
            std=float(row["std"]),
            n_effective=int(row["n_effective"]),
            n_failed=int(row["n_failed"]),
            run_dir=str(row["run_dir"]),
            seeds=list(row["seeds"]),
        )
        for row in frame.to_dict(orient="records")
    ]
    fraction = float(frame["convergence_fraction"].iloc[0]) if len(frame) else 0.1
    return GridSummary(name=target.parent.name, root_dir=str(target.parent),
                       convergence_fraction=fraction, cells=cells)
