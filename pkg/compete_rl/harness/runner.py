#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
实验运行器
逐种子训练，写指标、检查点和运行清单；单个种子发散不影响其余种子
"""

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from compete_rl.harness.metrics import METRICS_COLUMNS, append_metrics
from compete_rl.logging_config import get_logger
from compete_rl.models.errors import DivergenceError
from compete_rl.models.schema import ExperimentSpec, MetricsRow, RunManifest, RunStatus
from compete_rl.nn.params import save_checkpoint
from compete_rl.orchestrator.modes import mode_label, mode_name
from compete_rl.orchestrator.trainer import train

logger = get_logger(__name__)

METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "checkpoint.json"
MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "config.json"


def cell_dir_name(spec: ExperimentSpec) -> str:
    """<模式名>_N<智能体数>，N=1 的 SA 配置为 SA_N1"""
    label = mode_label(spec.flags, spec.n_agents)
    name = label if label == "SA" else mode_name(spec.flags)
    return f"{name}_N{spec.n_agents}"


def experiment_dir(spec: ExperimentSpec) -> Path:
    return Path(spec.output_dir) / spec.name / cell_dir_name(spec)


def seed_dir(spec: ExperimentSpec, seed: int) -> Path:
    return experiment_dir(spec) / f"seed{seed}"


def spec_digest(spec: ExperimentSpec) -> str:
    """
    配置摘要

    不含 seeds 和 output_dir：追加种子或换输出目录不影响已完成种子的结果。
    """
    payload = spec.model_dump_json(exclude={"seeds", "output_dir"})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_manifest(path: Path, manifest: RunManifest) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(manifest.model_dump_json(indent=2))
    os.replace(tmp, path)


def read_manifest(path: Path) -> Optional[RunManifest]:
    """读取运行清单，文件不存在或损坏时返回 None"""
    if not path.is_file():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            return RunManifest.model_validate(json.load(f))
    except (OSError, ValueError):
        return None


def echo_config(spec: ExperimentSpec) -> Path:
    """把生效的配置写回输出目录，可直接用它重跑"""
    target = experiment_dir(spec) / CONFIG_FILE
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(spec.model_dump_json(indent=2))
        f.write("\n")
    return target


@dataclass
class ExperimentResult:
    """一次 run_experiment 的结果"""
    run_dir: str
    manifests: List[RunManifest] = field(default_factory=list)

    @property
    def failed_seeds(self) -> List[int]:
        return [m.seed for m in self.manifests if m.status is RunStatus.FAILED]

    @property
    def completed_seeds(self) -> List[int]:
        return [m.seed for m in self.manifests if m.status is RunStatus.COMPLETED]


class ExperimentRunner:
    """实验运行器"""

    def __init__(self):
        """初始化运行器"""
        self.run_stats = {
            "seeds_started": 0,
            "seeds_completed": 0,
            "seeds_failed": 0,
            "seeds_skipped": 0,
            "seeds_stale": 0,
        }

    def run_seed(self, spec: ExperimentSpec, seed: int) -> RunManifest:
        """
        训练单个种子

        已完成且配置摘要一致的种子直接跳过；配置已变化、中断（running）或失败的种子清掉残留指标后重跑。

        Args:
            spec: 实验配置
            seed: 种子

        Returns:
            RunManifest: 最终的运行清单
        """
        directory = seed_dir(spec, seed)
        manifest_path = directory / MANIFEST_FILE
        metrics_path = directory / METRICS_FILE
        log = logger.bind(experiment=spec.name, mode=mode_label(spec.flags, spec.n_agents), seed=seed)

        digest = spec_digest(spec)
        previous = read_manifest(manifest_path)
        if previous is not None and previous.status is RunStatus.COMPLETED:
            if previous.spec_digest == digest:
                self.run_stats["seeds_skipped"] += 1
                log.info("种子已完成，跳过")
                return previous
            self.run_stats["seeds_stale"] += 1
            log.warning("配置已变化，重跑种子", previous_digest=previous.spec_digest, digest=digest)

        directory.mkdir(parents=True, exist_ok=True)
        for stale in (metrics_path, directory / CHECKPOINT_FILE):
            if stale.exists():
                stale.unlink()

        manifest = RunManifest(
            name=spec.name,
            mode=mode_label(spec.flags, spec.n_agents),
            n_agents=spec.n_agents,
            seed=seed,
            status=RunStatus.RUNNING,
            spec_digest=digest,
            updated_at=_now(),
        )
        write_manifest(manifest_path, manifest)
        self.run_stats["seeds_started"] += 1
        log.info("种子开始", iterations=spec.total_iterations)

        def on_iteration(row: MetricsRow) -> None:
            append_metrics(str(metrics_path), [row])
            manifest.iterations_completed = row.iteration + 1
            manifest.updated_at = _now()
            write_manifest(manifest_path, manifest)

        try:
            result = train(spec, seed, callback=on_iteration)
        except DivergenceError as e:
            manifest.status = RunStatus.FAILED
            manifest.error_message = str(e)
            manifest.updated_at = _now()
            write_manifest(manifest_path, manifest)
            self.run_stats["seeds_failed"] += 1
            log.error("种子失败", error=str(e))
            return manifest

        if not metrics_path.exists():
            # total_iterations=0 时只写表头
            metrics_path.write_text(",".join(METRICS_COLUMNS) + "\n", encoding="utf-8")

        checkpoint = save_checkpoint(str(directory / CHECKPOINT_FILE), result.checkpoint_meta(spec),
                                     result.bank.param_sets)
        log.info("检查点已写入", path=checkpoint)

        manifest.status = RunStatus.COMPLETED
        manifest.updated_at = _now()
        write_manifest(manifest_path, manifest)
        self.run_stats["seeds_completed"] += 1
        log.info("种子完成", iterations=manifest.iterations_completed)
        return manifest

    def run(self, spec: ExperimentSpec) -> ExperimentResult:
        """按 seeds 顺序逐个训练"""
        echo_config(spec)
        result = ExperimentResult(run_dir=str(experiment_dir(spec)))
        for seed in spec.seeds:
            result.manifests.append(self.run_seed(spec, seed))
        return result

    def get_run_stats(self) -> Dict[str, Any]:
        """获取运行统计信息"""
        stats = self.run_stats.copy()
        finished = stats["seeds_completed"] + stats["seeds_failed"]
        stats["failure_rate"] = stats["seeds_failed"] / finished if finished else 0.0
        return stats


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """
    运行一个实验的全部种子

    输出 <output_dir>/<name>/<模式名>_N<N>/seed<k>/{metrics.csv, checkpoint.json, manifest.json}

    Args:
        spec: 实验配置

    Returns:
        ExperimentResult: 每个种子的运行清单
    """
    return ExperimentRunner().run(spec)
