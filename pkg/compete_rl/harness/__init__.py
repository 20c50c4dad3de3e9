#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
实验模块
种子运行、网格执行、收敛后统计与报告
"""

from .metrics import (
    METRICS_COLUMNS,
    append_metrics,
    read_metrics
)

from .runner import (
    ExperimentResult,
    ExperimentRunner,
    experiment_dir,
    seed_dir,
    spec_digest,
    run_experiment
)

from .summary import (
    window_length,
    seed_window_mean,
    aggregate,
    summarize_cell,
    write_summary_csv,
    write_summary_text,
    load_grid_summary
)

from .ceiling import (
    analytic_ceiling,
    constant_action_reward
)

from .report import (
    emit_report
)

from .grid import (
    GridCell,
    plan_grid,
    run_grid
)

__all__ = [
    'METRICS_COLUMNS',
    'append_metrics',
    'read_metrics',

    'ExperimentResult',
    'ExperimentRunner',
    'experiment_dir',
    'seed_dir',
    'spec_digest',
    'run_experiment',

    'window_length',
    'seed_window_mean',
    'aggregate',
    'summarize_cell',
    'write_summary_csv',
    'write_summary_text',
    'load_grid_summary',

    'analytic_ceiling',
    'constant_action_reward',

    'emit_report',

    'GridCell',
    'plan_grid',
    'run_grid'
]
