#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行入口
train / eval / compare / grid / plot / selftest
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from compete_rl.config import format_validation_error, get_config_manager
from compete_rl.logging_config import configure_logging, get_logger
from compete_rl.models.errors import CompeteRLError, ConfigNotFoundError, EmptyGridError
from compete_rl.models.schema import CliCommand, EnvKind, GridSummary
from compete_rl.nn.params import load_checkpoint
from compete_rl.orchestrator.evaluation import evaluate
from compete_rl.orchestrator.modes import BASELINE_MODES, parse_mode
from compete_rl.orchestrator.seeding import derive_rng

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

DEFAULT_GRID_AGENTS = "2,3,4,5"

logger = get_logger(__name__)


class UsageError(Exception):
    """参数组合或取值不合法（退出码 2）"""


def _int_list(raw: str) -> List[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的整数: {raw!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"需要至少一个正整数: {raw!r}")
    return values


def _str_list(raw: str) -> List[str]:
    values = [part.strip() for part in raw.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("列表不能为空")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compete_rl",
        description="竞争观测 + 共享策略 PPO 的桌面级实验框架",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser(CliCommand.TRAIN.value, help="运行单个实验（全部种子）")
    train.add_argument("--config", required=True, help="JSON 实验配置")
    train.add_argument("--seed", type=int, help="只运行这个种子（覆盖 seeds）")
    train.add_argument("--mode", help="模式名，如 SA、Sh-Decent-Comp（覆盖 flags）")
    train.add_argument("--agents", type=int, help="智能体数（覆盖 n_agents）")
    train.add_argument("--output", help="输出根目录（覆盖 output_dir）")

    ev = sub.add_parser(CliCommand.EVAL.value, help="零填充单智能体评估")
    ev.add_argument("--checkpoint", required=True, help="checkpoint.json 路径")
    ev.add_argument("--env", choices=[k.value for k in EnvKind], help="评估环境，缺省为训练环境")
    ev.add_argument("--episodes", type=int, default=20, help="回合数")
    ev.add_argument("--agent", type=int, default=0, help="独立模式下选择第几个智能体的策略")
    ev.add_argument("--seed", type=int, default=0, help="评估种子")

    compare = sub.add_parser(CliCommand.COMPARE.value, help="指定模式与智能体数的网格")
    compare.add_argument("--config", required=True, help="JSON 基础配置")
    compare.add_argument("--modes", required=True, type=_str_list, help="逗号分隔的模式名")
    compare.add_argument("--agents", required=True, type=_int_list, help="逗号分隔的智能体数")
    compare.add_argument("--workers", type=int, help="并发进程数")
    compare.add_argument("--output", help="输出根目录（覆盖 output_dir）")

    grid = sub.add_parser(CliCommand.GRID.value, help="完整基线矩阵 × 智能体数")
    grid.add_argument("--config", required=True, help="JSON 基础配置")
    grid.add_argument("--agents", type=_int_list, default=_int_list(DEFAULT_GRID_AGENTS), help="逗号分隔的智能体数")
    grid.add_argument("--workers", type=int, help="并发进程数")
    grid.add_argument("--output", help="输出根目录（覆盖 output_dir）")

    plot = sub.add_parser(CliCommand.PLOT.value, help="由 summary.csv 生成图表和 report.md")
    plot.add_argument("--summary", required=True, nargs="+", help="一个或多个 summary.csv")
    plot.add_argument("--output", help="报告目录，缺省为第一个 summary 所在目录")

    selftest = sub.add_parser(CliCommand.SELFTEST.value, help="运行不变量自检")
    selftest.add_argument("--quick", action="store_true", help="缩小实例数量")

    return parser


def spec_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """把命令行参数转换成顶层配置覆盖项"""
    overrides: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None and args.command == CliCommand.TRAIN.value:
        overrides["seeds"] = [args.seed]
    if getattr(args, "output", None):
        overrides["output_dir"] = args.output

    mode = getattr(args, "mode", None)
    agents = getattr(args, "agents", None) if args.command == CliCommand.TRAIN.value else None
    if mode:
        try:
            flags, fixed_n = parse_mode(mode)
        except ValueError as e:
            raise UsageError(str(e))
        overrides["flags"] = flags.model_dump(mode="json")
        if fixed_n is not None:
            if agents is not None and agents != fixed_n:
                raise UsageError(f"模式 {mode} 固定 N={fixed_n}，与 --agents {agents} 冲突")
            agents = fixed_n
    if agents is not None:
        overrides["n_agents"] = agents
    return overrides


def _load_spec(args: argparse.Namespace):
    """加载配置；文件内容不合法属于用法错误"""
    try:
        return get_config_manager().load_experiment_spec(args.config, spec_overrides(args))
    except ValidationError:
        raise
    except ValueError as e:
        raise UsageError(str(e)) from e


def cmd_train(args: argparse.Namespace) -> int:
    from compete_rl.harness.runner import run_experiment

    spec = _load_spec(args)
    result = run_experiment(spec)
    print(f"结果目录: {result.run_dir}")
    for manifest in result.manifests:
        print(f"  seed{manifest.seed}: {manifest.status.value} ({manifest.iterations_completed} iterations)")
    if result.failed_seeds:
        print(f"失败的种子: {result.failed_seeds}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    if args.episodes < 1:
        raise UsageError("--episodes 必须为正")
    path = Path(args.checkpoint)
    if not path.is_file():
        raise UsageError(f"checkpoint not found: {path}")

    try:
        meta, param_sets = load_checkpoint(str(path))
    except ValueError as e:
        raise UsageError(f"无法读取检查点 {path}: {e}") from e
    if not 0 <= args.agent < len(param_sets):
        raise UsageError(f"--agent {args.agent} 超出范围（检查点含 {len(param_sets)} 组参数）")
    kind = EnvKind(args.env) if args.env else meta.env_kind

    mean, std = evaluate(param_sets[args.agent], kind, meta.n_train, meta.flags, args.episodes,
                         derive_rng(args.seed, "eval"), self_first=meta.obs_layout.self_first)
    print(f"{meta.mode} on {kind.value}: {mean:.4f} ± {std:.4f} ({args.episodes} episodes)")
    return EXIT_OK


def _print_summary(summary: GridSummary) -> None:
    from compete_rl.harness.summary import summary_table_text

    print(summary_table_text(summary), end="")
    print(f"汇总目录: {summary.root_dir}")


def cmd_compare(args: argparse.Namespace) -> int:
    from compete_rl.harness.grid import run_grid

    for mode in args.modes:
        try:
            parse_mode(mode)
        except ValueError as e:
            raise UsageError(str(e))
    summary = run_grid(_load_spec(args), args.modes, args.agents, args.workers)
    _print_summary(summary)
    return EXIT_OK


def cmd_grid(args: argparse.Namespace) -> int:
    from compete_rl.harness.grid import run_grid

    summary = run_grid(_load_spec(args), BASELINE_MODES, args.agents, args.workers)
    _print_summary(summary)
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    from compete_rl.harness.report import emit_report
    from compete_rl.harness.summary import load_grid_summary

    summaries = []
    for raw in args.summary:
        if not Path(raw).is_file():
            raise UsageError(f"summary not found: {raw}")
        try:
            summaries.append(load_grid_summary(raw))
        except ValueError as e:
            raise UsageError(f"无法读取汇总 {raw}: {e}") from e

    merged = summaries[0].model_copy(deep=True)
    for extra in summaries[1:]:
        merged.cells.extend(extra.cells)
    for path in emit_report(merged, args.output):
        print(path)
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    from compete_rl.selftest import run_selftest

    return run_selftest(quick=args.quick)


_COMMANDS = {
    CliCommand.TRAIN.value: cmd_train,
    CliCommand.EVAL.value: cmd_eval,
    CliCommand.COMPARE.value: cmd_compare,
    CliCommand.GRID.value: cmd_grid,
    CliCommand.PLOT.value: cmd_plot,
    CliCommand.SELFTEST.value: cmd_selftest,
}


def parse_and_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    解析命令行并执行

    Args:
        argv: 参数列表，缺省为 sys.argv[1:]

    Returns:
        int: 退出码（0 成功，1 运行失败，2 用法错误）
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging()
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ConfigNotFoundError, EmptyGridError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"错误: 配置校验失败: {format_validation_error(e)}", file=sys.stderr)
        return EXIT_USAGE
    except CompeteRLError as e:
        logger.error("命令失败", command=args.command, error=str(e))
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception("未预期的异常", command=args.command)
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
