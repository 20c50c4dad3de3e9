#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
数据模型模块
"""

from .schema import (
    EnvKind,
    AuxKind,
    Sharing,
    CriticInput,
    AuxObs,
    HeadKind,
    RunStatus,
    CliCommand,
    RaceConfig,
    ObsLayout,
    PpoConfig,
    ModeFlags,
    ExperimentSpec,
    UpdateStats,
    MetricsRow,
    RunManifest,
    GridCellSummary,
    GridSummary,
    MlpSnapshot,
    AdamSnapshot,
    ParamSnapshot,
    CheckpointMeta,
    CheckpointFile
)

from .errors import (
    CompeteRLError,
    EpisodeFinishedError,
    DivergenceError,
    DimensionMismatchError,
    ConfigNotFoundError,
    EmptyGridError
)

__all__ = [
    'EnvKind',
    'AuxKind',
    'Sharing',
    'CriticInput',
    'AuxObs',
    'HeadKind',
    'RunStatus',
    'CliCommand',
    'RaceConfig',
    'ObsLayout',
    'PpoConfig',
    'ModeFlags',
    'ExperimentSpec',
    'UpdateStats',
    'MetricsRow',
    'RunManifest',
    'GridCellSummary',
    'GridSummary',
    'MlpSnapshot',
    'AdamSnapshot',
    'ParamSnapshot',
    'CheckpointMeta',
    'CheckpointFile',

    'CompeteRLError',
    'EpisodeFinishedError',
    'DivergenceError',
    'DimensionMismatchError',
    'ConfigNotFoundError',
    'EmptyGridError'
]
