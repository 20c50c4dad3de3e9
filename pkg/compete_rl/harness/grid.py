#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
网格实验
(模式, N) 笛卡尔积，单元在进程池中并发执行，全部结束后再汇总
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from compete_rl.config import get_config_manager
from compete_rl.harness.report import emit_report
from compete_rl.harness.runner import experiment_dir, run_experiment
from compete_rl.harness.summary import summarize_cell, write_summary_csv, write_summary_text
from compete_rl.logging_config import configure_logging, get_logger
from compete_rl.models.errors import EmptyGridError
from compete_rl.models.schema import ExperimentSpec, GridSummary
from compete_rl.orchestrator.modes import mode_label, resolve_cell

logger = get_logger(__name__)


@dataclass
class GridCell:
    """网格中的一个请求单元"""
    mode: str
    n_requested: int
    spec: ExperimentSpec

    @property
    def label(self) -> str:
        return mode_label(self.spec.flags, self.spec.n_agents)

    @property
    def run_dir(self) -> str:
        return str(experiment_dir(self.spec))


def cell_spec(base: ExperimentSpec, mode: str, n_agents: int) -> ExperimentSpec:
    """由基础配置派生单元配置，重新走一遍校验"""
    flags, n = resolve_cell(mode, n_agents)
    data = base.model_dump(mode="json")
    data["flags"] = flags.model_dump(mode="json")
    data["n_agents"] = n
    data["env"]["n_agents"] = n
    return ExperimentSpec.model_validate(data)


def plan_grid(base: ExperimentSpec, modes: Sequence[str], agent_counts: Sequence[int]) -> List[GridCell]:
    """
    展开网格

    Args:
        base: 基础配置
        modes: 模式名（不含 N 前缀）
        agent_counts: 智能体数

    Returns:
        List[GridCell]: 每个 (模式, N) 一个单元，顺序为模式优先
    """
    if not modes:
        raise EmptyGridError("modes list is empty")
    if not agent_counts:
        raise EmptyGridError("agent_counts list is empty")
    return [GridCell(mode=m, n_requested=n, spec=cell_spec(base, m, n)) for m in modes for n in agent_counts]


def _run_cell(payload: str) -> str:
    """进程池入口，参数与返回值都是 JSON 以便跨进程传递"""
    configure_logging()
    spec = ExperimentSpec.model_validate_json(payload)
    result = run_experiment(spec)
    return result.run_dir


def execute_cells(cells: List[GridCell], workers: Optional[int] = None) -> Dict[str, Optional[str]]:
    """
    执行去重后的单元

    Returns:
        Dict[str, Optional[str]]: run_dir -> 错误信息（成功为 None）
    """
    unique: Dict[str, ExperimentSpec] = {}
    for cell in cells:
        unique.setdefault(cell.run_dir, cell.spec)

    errors: Dict[str, Optional[str]] = {}
    worker_count = min(get_config_manager().get_worker_count(workers), len(unique))
    logger.info("网格开始", cells=len(cells), unique_runs=len(unique), workers=worker_count)

    if worker_count <= 1:
        for run_dir, spec in unique.items():
            try:
                run_experiment(spec)
                errors[run_dir] = None
            except Exception as e:
                logger.error("单元失败", run_dir=run_dir, error=str(e))
                errors[run_dir] = str(e)
        return errors

    with ProcessPoolExecutor(max_workers=worker_count) as pool:
        futures = {pool.submit(_run_cell, spec.model_dump_json()): run_dir for run_dir, spec in unique.items()}
        for future in as_completed(futures):
            run_dir = futures[future]
            try:
                future.result()
                errors[run_dir] = None
                logger.info("单元完成", run_dir=run_dir)
            except Exception as e:
                logger.error("单元失败", run_dir=run_dir, error=str(e))
                errors[run_dir] = str(e)
    return errors


def summarize_grid(base: ExperimentSpec, cells: List[GridCell]) -> GridSummary:
    """汇总所有单元，每个请求单元一行（N=1 时多个模式引用同一个 SA 目录）"""
    summary = GridSummary(
        name=base.name,
        root_dir=str(experiment_dir(base).parent),
        convergence_fraction=base.convergence_fraction,
    )
    for cell in cells:
        summary.cells.append(summarize_cell(
            env_kind=base.env.kind,
            mode=cell.mode,
            label=cell.label,
            n_agents=cell.spec.n_agents,
            run_dir=cell.run_dir,
            fraction=base.convergence_fraction,
            seeds=cell.spec.seeds,
        ))
    return summary


def run_grid(base: ExperimentSpec, modes: Sequence[str], agent_counts: Sequence[int],
             workers: Optional[int] = None) -> GridSummary:
    """
    运行网格实验并生成汇总与报告

    Args:
        base: 基础配置（flags 和 n_agents 由网格覆盖）
        modes: 模式名列表
        agent_counts: 智能体数列表
        workers: 进程数，缺省为可用 CPU 数（受 COMPETE_RL_THREADS 约束）

    Returns:
        GridSummary: 收敛后统计
    """
    cells = plan_grid(base, modes, agent_counts)
    execute_cells(cells, workers)

    summary = summarize_grid(base, cells)
    write_summary_csv(summary)
    write_summary_text(summary)
    emit_report(summary)
    logger.info("网格完成", name=base.name, cells=len(summary.cells))
    return summary
