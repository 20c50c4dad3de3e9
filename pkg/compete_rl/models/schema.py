#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
数据模型定义
实验配置、观测布局、训练指标与检查点文档
"""

import re
from enum import Enum
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

_SAFE_NAME = re.compile(r"^[A-Za-z0-9_.-]+$")


class EnvKind(str, Enum):
    """赛跑环境类型"""
    POINT_RACER = "PointRacer"
    STAMINA_RACER = "StaminaRacer"

    @property
    def proprio_dim(self) -> int:
        """本体感受观测维度"""
        return 1 if self is EnvKind.POINT_RACER else 2

    @property
    def action_dim(self) -> int:
        """动作维度"""
        return 1


class AuxKind(str, Enum):
    """辅助观测块类型"""
    NONE = "none"
    COMPETITIVE = "competitive"
    NOISE = "noise"
    ZERO_PAD = "zero_pad"


class Sharing(str, Enum):
    """策略/经验共享方式"""
    SHARED = "shared"
    SEPARATE = "separate"


class CriticInput(str, Enum):
    """价值网络输入方式"""
    DECENTRALIZED = "decentralized"
    CENTRALIZED = "centralized"


class AuxObs(str, Enum):
    """训练时的辅助观测"""
    NONE = "none"
    NOISE = "noise"
    COMPETITIVE = "competitive"
    ZERO = "zero"


class HeadKind(str, Enum):
    """策略分布头"""
    GAUSSIAN = "gaussian"
    BETA = "beta"


class RunStatus(str, Enum):
    """单个种子的运行状态"""
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class CliCommand(str, Enum):
    """命令行子命令"""
    TRAIN = "train"
    EVAL = "eval"
    COMPARE = "compare"
    GRID = "grid"
    PLOT = "plot"
    SELFTEST = "selftest"


class RaceConfig(BaseModel):
    """赛跑环境配置"""
    model_config = ConfigDict(extra="forbid")

    kind: EnvKind = Field(EnvKind.POINT_RACER, description="环境类型")
    n_agents: int = Field(1, ge=1, description="参赛智能体数量")
    dt: float = Field(0.05, gt=0, description="积分步长（秒）")
    horizon: int = Field(500, ge=1, description="回合长度（步）")
    f_max: float = Field(1.0, description="驱动力尺度")
    c_d: float = Field(0.1, gt=0, description="阻力系数")
    w_ctrl: Optional[float] = Field(None, ge=0, description="动作代价权重，缺省按环境类型取值")
    rho: float = Field(0.05, ge=0, description="体力恢复速率")
    kappa: float = Field(0.15, ge=0, description="体力消耗速率")

    @model_validator(mode="after")
    def _default_ctrl_weight(self) -> "RaceConfig":
        if self.w_ctrl is None:
            self.w_ctrl = 0.1 if self.kind is EnvKind.POINT_RACER else 0.05
        return self


class ObsLayout(BaseModel):
    """观测向量布局 s̄ = [s | o]"""
    model_config = ConfigDict(extra="forbid")

    proprio_dim: int = Field(..., ge=1, description="本体感受维度")
    aux_dim: int = Field(0, ge=0, description="辅助块维度")
    aux_kind: AuxKind = Field(AuxKind.NONE, description="辅助块类型")
    self_first: bool = Field(False, description="竞争块是否把自身放在最前")

    @model_validator(mode="after")
    def _check_aux(self) -> "ObsLayout":
        if self.aux_kind is AuxKind.NONE and self.aux_dim != 0:
            raise ValueError("aux_kind=none 时 aux_dim 必须为 0")
        if self.aux_kind is not AuxKind.NONE and (self.aux_dim == 0 or self.aux_dim % 2):
            raise ValueError(f"辅助块维度必须为正偶数: {self.aux_dim}")
        return self

    @property
    def total_dim(self) -> int:
        return self.proprio_dim + self.aux_dim

    @property
    def aux_agents(self) -> int:
        """辅助块对应的智能体数量"""
        return self.aux_dim // 2


class PpoConfig(BaseModel):
    """PPO超参数"""
    model_config = ConfigDict(extra="forbid")

    gamma: float = Field(0.995, gt=0, le=1, description="折扣因子")
    lam: float = Field(0.95, ge=0, le=1, description="GAE参数")
    clip_eps: float = Field(0.2, gt=0, description="裁剪参数")
    lr0: float = Field(0.0005, gt=0, description="初始学习率（线性衰减）")
    total_iterations: int = Field(500, ge=0, description="总迭代次数")
    epochs_per_iter: int = Field(10, ge=0, description="每次迭代的全批量梯度步数")
    entropy_coef: float = Field(0.0, ge=0, description="熵奖励系数")
    value_coef: float = Field(1.0, gt=0, description="价值损失系数")
    max_grad_norm: Optional[float] = Field(None, gt=0, description="梯度范数上限，None表示不裁剪")


class ModeFlags(BaseModel):
    """基线矩阵的三个正交开关"""
    model_config = ConfigDict(extra="forbid")

    sharing: Sharing = Field(Sharing.SHARED, description="共享或独立策略")
    critic_input: CriticInput = Field(CriticInput.DECENTRALIZED, description="价值网络输入")
    aux_obs: AuxObs = Field(AuxObs.NONE, description="辅助观测")


class ExperimentSpec(BaseModel):
    """实验配置（JSON配置文件的结构）"""

    name: str = Field("experiment", description="实验名称（用作目录名）")
    env: RaceConfig = Field(default_factory=RaceConfig, description="环境配置")
    flags: ModeFlags = Field(default_factory=ModeFlags, description="模式开关")
    n_agents: int = Field(1, ge=1, description="参赛智能体数量")
    ppo: PpoConfig = Field(default_factory=PpoConfig, description="PPO超参数")
    total_iterations: int = Field(500, ge=0, description="训练迭代次数")
    steps_per_agent: int = Field(5000, ge=1, description="每次迭代每个智能体的最少采样步数")
    seeds: List[int] = Field(default_factory=lambda: list(range(10)), description="随机种子列表")
    eval_episodes: int = Field(20, ge=1, description="每次评估的回合数")
    output_dir: str = Field("output", description="输出根目录")
    head: HeadKind = Field(HeadKind.GAUSSIAN, description="策略分布头")
    hidden_sizes: List[int] = Field(default_factory=lambda: [64, 64], description="隐藏层宽度")
    noise_std: float = Field(1.0, gt=0, description="噪声辅助块的标准差")
    self_first_aux: bool = Field(False, description="竞争块自身优先排序")
    convergence_fraction: float = Field(0.1, gt=0, le=1, description="收敛窗口占比")

    model_config = {
        "extra": "forbid",
        "json_schema_extra": {
            "example": {
                "name": "stamina_comp",
                "env": {"kind": "StaminaRacer"},
                "flags": {"sharing": "shared", "critic_input": "decentralized", "aux_obs": "competitive"},
                "n_agents": 3,
                "total_iterations": 50,
                "seeds": [0, 1, 2]
            }
        }
    }

    @field_validator("name")
    @classmethod
    def _check_name(cls, value: str) -> str:
        if not _SAFE_NAME.match(value):
            raise ValueError(f"实验名称包含非法字符: {value!r}")
        return value

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("seeds 不能为空")
        if len(set(value)) != len(value):
            raise ValueError(f"seeds 不能重复: {value}")
        return value

    @field_validator("hidden_sizes")
    @classmethod
    def _check_hidden(cls, value: List[int]) -> List[int]:
        if any(width < 1 for width in value):
            raise ValueError(f"隐藏层宽度必须为正: {value}")
        return value

    @model_validator(mode="after")
    def _sync(self) -> "ExperimentSpec":
        if self.flags.critic_input is CriticInput.CENTRALIZED and self.n_agents < 2:
            raise ValueError("centralized critic 需要 n_agents >= 2")
        self.env.n_agents = self.n_agents
        self.ppo.total_iterations = self.total_iterations
        return self


class UpdateStats(BaseModel):
    """一次PPO更新的统计量"""
    policy_loss: float = Field(..., description="裁剪代理目标的相反数")
    value_loss: float = Field(..., description="价值均方误差")
    entropy: float = Field(..., description="平均策略熵")
    mean_ratio: float = Field(..., description="平均概率比")
    clip_fraction: float = Field(..., description="被裁剪样本比例")
    lr_used: float = Field(..., description="本次使用的学习率")


class MetricsRow(BaseModel):
    """metrics.csv 中的一行"""
    iteration: int
    env_steps_total: int
    mode: str
    n_agents: int
    seed: int
    train_mean_ep_reward: float
    eval_mean_ep_reward: float
    eval_std: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    lr: float


class RunManifest(BaseModel):
    """单个种子的运行清单"""
    name: str = Field(..., description="实验名称")
    mode: str = Field(..., description="模式标签")
    n_agents: int = Field(..., description="智能体数量")
    seed: int = Field(..., description="随机种子")
    status: RunStatus = Field(RunStatus.RUNNING, description="运行状态")
    iterations_completed: int = Field(0, description="已完成迭代数")
    error_message: Optional[str] = Field(None, description="失败原因")
    spec_digest: Optional[str] = Field(None, description="生成该种子结果的配置摘要")
    updated_at: str = Field(..., description="更新时间")


class GridCellSummary(BaseModel):
    """网格中一个 (模式, N) 单元的收敛后统计"""
    env_kind: EnvKind
    mode: str = Field(..., description="请求的模式名（不含N前缀）")
    label: str = Field(..., description="实际运行的模式标签")
    n_agents: int
    mean: float = Field(..., description="各种子收敛窗口均值的平均")
    std: float = Field(..., description="各种子收敛窗口均值的总体标准差")
    n_effective: int = Field(..., description="参与统计的种子数")
    n_failed: int = Field(0, description="失败的种子数")
    run_dir: str = Field(..., description="原始数据目录")
    seeds: List[int] = Field(default_factory=list, description="声明的种子（统计与曲线都只用这些种子）")


class GridSummary(BaseModel):
    """网格实验汇总"""
    name: str
    root_dir: str
    convergence_fraction: float = 0.1
    cells: List[GridCellSummary] = Field(default_factory=list)


class MlpSnapshot(BaseModel):
    """MLP参数快照（行优先嵌套数组）"""
    layer_dims: List[int]
    weights: List[List[List[float]]]
    biases: List[List[float]]


class AdamSnapshot(BaseModel):
    """Adam状态快照，矩与参数顺序一致"""
    step: int = 0
    m: List[Any] = Field(default_factory=list)
    v: List[Any] = Field(default_factory=list)


class ParamSnapshot(BaseModel):
    """一组 actor/critic 参数"""
    head_kind: HeadKind
    log_std: Optional[List[float]] = None
    actor: MlpSnapshot
    critic: MlpSnapshot
    adam_actor: AdamSnapshot
    adam_critic: AdamSnapshot


class CheckpointMeta(BaseModel):
    """检查点的训练上下文"""
    env_kind: EnvKind
    n_train: int
    flags: ModeFlags
    obs_layout: ObsLayout
    critic_input_dim: int
    mode: str


class CheckpointFile(BaseModel):
    """checkpoint.json 文档"""
    format_version: int = 1
    meta: CheckpointMeta
    policies: List[ParamSnapshot]
