#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
报告生成
每个环境一张奖励-迭代曲线（跨种子均值 ± 标准差带）、一张智能体数扫描图，以及 report.md
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from compete_rl.harness.metrics import read_metrics
from compete_rl.harness.runner import MANIFEST_FILE, METRICS_FILE, read_manifest
from compete_rl.harness.summary import declared_seeds
from compete_rl.logging_config import get_logger
from compete_rl.models.errors import EmptyGridError
from compete_rl.models.schema import EnvKind, GridCellSummary, GridSummary, RunStatus

logger = get_logger(__name__)

REPORT_FILE = "report.md"

# 固定 SVG 内部 id，相同数据生成相同文件
plt.rcParams['svg.hashsalt'] = 'compete-rl'
plt.rcParams['axes.unicode_minus'] = False

_SVG_METADATA = {"Date": None}


def curve_frame(run_dir: str, seeds: Optional[Sequence[int]] = None) -> Optional[pd.DataFrame]:
    """
    一个单元跨种子的评估曲线

    只读取声明的种子（与汇总表相同的集合），seeds 为空时取目录中的全部种子。

    Returns:
        Optional[pd.DataFrame]: 按迭代的 mean/std（总体标准差），没有完成的种子时为 None
    """
    root = Path(run_dir)
    frames = []
    for seed in declared_seeds(run_dir, seeds or None):
        directory = root / f"seed{seed}"
        manifest = read_manifest(directory / MANIFEST_FILE)
        if manifest is None or manifest.status is not RunStatus.COMPLETED:
            continue
        metrics = read_metrics(str(directory / METRICS_FILE))
        if not metrics.empty:
            frames.append(metrics[["iteration", "seed", "eval_mean_ep_reward"]])
    if not frames:
        return None
    merged = pd.concat(frames, ignore_index=True)
    grouped = merged.groupby("iteration")["eval_mean_ep_reward"]
    return pd.DataFrame({"mean": grouped.mean(), "std": grouped.std(ddof=0)}).reset_index()


def _unique_runs(cells: List[GridCellSummary]) -> List[GridCellSummary]:
    """同一目录（N=1 时退化成 SA）只画一次"""
    seen, unique = set(), []
    for cell in cells:
        if cell.run_dir not in seen:
            seen.add(cell.run_dir)
            unique.append(cell)
    return unique


def plot_reward_curves(env_kind: EnvKind, cells: List[GridCellSummary], path: Path) -> int:
    """
    奖励-迭代曲线

    Returns:
        int: 画出的带数
    """
    fig, ax = plt.subplots(figsize=(8, 5))
    bands = 0
    for cell in _unique_runs(cells):
        curve = curve_frame(cell.run_dir, cell.seeds)
        if curve is None:
            continue
        x = curve["iteration"].to_numpy()
        mean = curve["mean"].to_numpy()
        std = curve["std"].to_numpy()
        line, = ax.plot(x, mean, linewidth=1.5, label=cell.label)
        ax.fill_between(x, mean - std, mean + std, color=line.get_color(), alpha=0.2)
        bands += 1

    ax.set_xlabel("iteration")
    ax.set_ylabel("eval episode reward")
    ax.set_title(f"{env_kind.value}: reward vs iteration")
    ax.grid(True, alpha=0.3)
    if bands:
        ax.legend()
    fig.savefig(path, format="svg", bbox_inches="tight", metadata=_SVG_METADATA)
    plt.close(fig)
    return bands


def plot_agent_sweep(env_kind: EnvKind, cells: List[GridCellSummary], path: Path) -> None:
    """收敛后得分随智能体数的变化，每个模式一条折线"""
    fig, ax = plt.subplots(figsize=(8, 5))
    modes = list(dict.fromkeys(cell.mode for cell in cells))
    for mode in modes:
        points = sorted((c.n_agents, c.mean, c.std) for c in cells if c.mode == mode and c.n_effective > 0)
        if not points:
            continue
        n, mean, std = (np.array(v, dtype=np.float64) for v in zip(*points))
        ax.errorbar(n, mean, yerr=std, marker="o", capsize=3, label=mode)

    ax.set_xlabel("number of agents N")
    ax.set_ylabel("post-convergence eval reward")
    ax.set_title(f"{env_kind.value}: agent-count sweep")
    ax.grid(True, alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.savefig(path, format="svg", bbox_inches="tight", metadata=_SVG_METADATA)
    plt.close(fig)


def report_markdown(summary: GridSummary, figures: Dict[str, List[str]]) -> str:
    """report.md 内容，每个 (模式, N) 一行"""
    lines = [
        f"# {summary.name}",
        "",
        f"Post-convergence window: final {summary.convergence_fraction:.0%} of iterations; "
        "mean ± population std across seed window means.",
        "",
        "| env | mode | N | label | mean | std | n_effective | n_failed |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for cell in summary.cells:
        lines.append(
            f"| {cell.env_kind.value} | {cell.mode} | {cell.n_agents} | {cell.label} | "
            f"{cell.mean:.4f} | {cell.std:.4f} | {cell.n_effective} | {cell.n_failed} |"
        )
    lines.append("")
    for env, names in figures.items():
        lines.append(f"## {env}")
        lines.append("")
        for name in names:
            lines.append(f"![{name}]({name})")
        lines.append("")
    return "\n".join(lines)


def emit_report(summary: GridSummary, output_dir: Optional[str] = None) -> List[str]:
    """
    生成报告

    Args:
        summary: 网格汇总
        output_dir: 输出目录，缺省为 summary.root_dir

    Returns:
        List[str]: 生成的文件路径（SVG 在前，report.md 最后）
    """
    if not summary.cells:
        raise EmptyGridError("summary has no cells")

    target = Path(output_dir) if output_dir else Path(summary.root_dir)
    target.mkdir(parents=True, exist_ok=True)

    written: List[str] = []
    figures: Dict[str, List[str]] = {}
    envs = list(dict.fromkeys(cell.env_kind for cell in summary.cells))
    for env_kind in envs:
        cells = [c for c in summary.cells if c.env_kind is env_kind]
        curve_name = f"{env_kind.value}_reward.svg"
        sweep_name = f"{env_kind.value}_agent_sweep.svg"
        bands = plot_reward_curves(env_kind, cells, target / curve_name)
        plot_agent_sweep(env_kind, cells, target / sweep_name)
        figures[env_kind.value] = [curve_name, sweep_name]
        written += [str(target / curve_name), str(target / sweep_name)]
        logger.info("图表已生成", env=env_kind.value, bands=bands)

    report_path = target / REPORT_FILE
    with open(report_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(report_markdown(summary, figures))
    written.append(str(report_path))
    logger.info("报告已生成", path=str(report_path), cells=len(summary.cells))
    return written
