#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
模式开关与策略库
基线矩阵 = 共享方式 × 价值网络输入 × 辅助观测
"""

import re
from typing import List, Optional, Sequence, Tuple

import numpy as np

from compete_rl.env.observation import competitive_obs, observation_layout, proprio_obs
from compete_rl.env.race import RaceState
from compete_rl.models.schema import (
    AuxKind,
    AuxObs,
    CriticInput,
    EnvKind,
    HeadKind,
    ModeFlags,
    ObsLayout,
    Sharing,
)
from compete_rl.nn.params import ParamSet
from compete_rl.orchestrator.seeding import SeedStreams

SA_MODE = "SA"

SA_FLAGS = ModeFlags(sharing=Sharing.SHARED, critic_input=CriticInput.DECENTRALIZED, aux_obs=AuxObs.NONE)

# 基线矩阵（不含 N 前缀）
BASELINE_MODES = [
    "SA",
    "Sh-Decent",
    "Sh-Cent",
    "Sp-Decent-Comp",
    "Sh-Decent-Noi",
    "Sh-Decent-Comp",
    "Sh-Cent-Comp",
]

_SHARING_TOKENS = {"Sh": Sharing.SHARED, "Sp": Sharing.SEPARATE}
_CRITIC_TOKENS = {"Decent": CriticInput.DECENTRALIZED, "Cent": CriticInput.CENTRALIZED}
_AUX_TOKENS = {"Comp": AuxObs.COMPETITIVE, "Noi": AuxObs.NOISE, "Zero": AuxObs.ZERO}

_AUX_KINDS = {
    AuxObs.NONE: AuxKind.NONE,
    AuxObs.COMPETITIVE: AuxKind.COMPETITIVE,
    AuxObs.NOISE: AuxKind.NOISE,
    AuxObs.ZERO: AuxKind.ZERO_PAD,
}

_PREFIX = re.compile(r"^(\d+)A-(.+)$")


def parse_mode(name: str) -> Tuple[ModeFlags, Optional[int]]:
    """
    解析模式名

    接受 "SA"、"Sh-Decent-Comp" 或带前缀的 "3A-Sh-Decent-Comp"。

    Args:
        name: 模式名

    Returns:
        Tuple[ModeFlags, Optional[int]]: 开关与名称中固定的智能体数（无则为 None）
    """
    name = name.strip()
    if name == SA_MODE:
        return SA_FLAGS.model_copy(), 1

    n_agents = None
    match = _PREFIX.match(name)
    if match:
        n_agents = int(match.group(1))
        name = match.group(2)

    tokens = name.split("-")
    if len(tokens) not in (2, 3) or tokens[0] not in _SHARING_TOKENS or tokens[1] not in _CRITIC_TOKENS:
        raise ValueError(f"无法识别的模式名: {name!r}")
    aux = AuxObs.NONE
    if len(tokens) == 3:
        if tokens[2] not in _AUX_TOKENS:
            raise ValueError(f"无法识别的辅助观测后缀: {tokens[2]!r}")
        aux = _AUX_TOKENS[tokens[2]]

    flags = ModeFlags(sharing=_SHARING_TOKENS[tokens[0]], critic_input=_CRITIC_TOKENS[tokens[1]], aux_obs=aux)
    return flags, n_agents


def mode_name(flags: ModeFlags) -> str:
    """不含 N 前缀的模式名，如 Sh-Decent-Comp"""
    parts = [
        "Sh" if flags.sharing is Sharing.SHARED else "Sp",
        "Decent" if flags.critic_input is CriticInput.DECENTRALIZED else "Cent",
    ]
    for token, aux in _AUX_TOKENS.items():
        if flags.aux_obs is aux:
            parts.append(token)
    return "-".join(parts)


def mode_label(flags: ModeFlags, n_agents: int) -> str:
    """完整标签：N=1 的 SA 配置为 "SA"，其余为 "<N>A-<模式名>" """
    if n_agents == 1 and flags == SA_FLAGS:
        return SA_MODE
    return f"{n_agents}A-{mode_name(flags)}"


def resolve_cell(name: str, n_agents: int) -> Tuple[ModeFlags, int]:
    """
    网格单元的实际配置

    N=1 时任何模式都退化为 SA。
    """
    flags, fixed_n = parse_mode(name)
    if fixed_n is not None:
        n_agents = fixed_n
    if n_agents == 1:
        return SA_FLAGS.model_copy(), 1
    return flags, n_agents


def aux_kind_for(flags: ModeFlags) -> AuxKind:
    return _AUX_KINDS[flags.aux_obs]


def policy_layout(kind: EnvKind, flags: ModeFlags, n_agents: int, self_first: bool = False) -> ObsLayout:
    """训练时策略输入的布局，辅助块宽度 2N"""
    return observation_layout(kind, aux_kind_for(flags), n_aux_agents=n_agents, self_first=self_first)


def critic_input_dim(kind: EnvKind, flags: ModeFlags, n_agents: int, layout: ObsLayout) -> int:
    """
    价值网络输入维度

    分散式：与策略输入相同；集中式：N·proprio_dim，有辅助块时再加上本智能体的辅助块。
    """
    if flags.critic_input is CriticInput.DECENTRALIZED:
        return layout.total_dim
    return n_agents * kind.proprio_dim + layout.aux_dim


def global_critic_input(state: RaceState, i: int, flags: ModeFlags, kind: EnvKind,
                        aux: Optional[np.ndarray] = None) -> np.ndarray:
    """
    集中式价值网络输入

    所有智能体的本体观测按下标顺序拼接，辅助观测开启时再接上智能体 i 的辅助块。

    Args:
        state: 赛跑状态
        i: 智能体下标
        flags: 模式开关
        kind: 环境类型
        aux: 智能体 i 在本步实际看到的辅助块；竞争模式下缺省时按下标顺序现算

    Returns:
        np.ndarray: 价值网络输入
    """
    block = np.concatenate([proprio_obs(agent, kind) for agent in state.agents])
    if flags.aux_obs is AuxObs.NONE:
        return block
    if aux is None:
        if flags.aux_obs is not AuxObs.COMPETITIVE:
            raise ValueError(f"aux_obs={flags.aux_obs.value} 时必须传入本步的辅助块")
        aux = competitive_obs(state, i)
    return np.concatenate([block, aux])


class PolicyBank:
    """共享模式 1 组参数，独立模式每个智能体 1 组"""

    def __init__(self, sharing: Sharing, param_sets: Sequence[ParamSet], n_agents: int):
        expected = 1 if sharing is Sharing.SHARED else n_agents
        if len(param_sets) != expected:
            raise ValueError(f"{sharing.value} 模式需要 {expected} 组参数，实际 {len(param_sets)}")
        self.sharing = sharing
        self.param_sets: List[ParamSet] = list(param_sets)
        self.n_agents = n_agents

    @classmethod
    def build(cls, flags: ModeFlags, n_agents: int, obs_dim: int, critic_dim: int, action_dim: int,
              head_kind: HeadKind, hidden_sizes: Sequence[int], streams: SeedStreams) -> "PolicyBank":
        """
        初始化策略库

        共享模式用 "init" 随机流，独立模式第 i 组用 "init/{i}"。
        """
        if flags.sharing is Sharing.SHARED:
            labels = ["init"]
        else:
            labels = [f"init/{i}" for i in range(n_agents)]
        param_sets = [
            ParamSet.build(obs_dim, critic_dim, action_dim, head_kind, hidden_sizes, streams.init(label))
            for label in labels
        ]
        return cls(flags.sharing, param_sets, n_agents)

    def policy_for(self, i: int) -> ParamSet:
        if not 0 <= i < self.n_agents:
            raise IndexError(f"智能体下标越界: {i} (N={self.n_agents})")
        return self.param_sets[0] if self.sharing is Sharing.SHARED else self.param_sets[i]

    def act(self, obs: np.ndarray, critic_obs: np.ndarray,
            rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        全部智能体同步采样

        共享模式一次前向处理全部 N 行；独立模式按下标顺序逐个采样。

        Returns:
            Tuple: (原始动作 (N, action_dim), 对数概率 (N,), 价值 (N,))
        """
        if self.sharing is Sharing.SHARED:
            params = self.param_sets[0]
            actions, logp = params.act(obs, rng)
            return actions, logp, params.value(critic_obs)

        actions, logps, values = [], [], []
        for i, params in enumerate(self.param_sets):
            action, logp = params.act(obs[i:i + 1], rng)
            actions.append(action[0])
            logps.append(logp[0])
            values.append(params.value(critic_obs[i:i + 1])[0])
        return np.vstack(actions), np.asarray(logps), np.asarray(values)

    def values(self, critic_obs: np.ndarray) -> np.ndarray:
        """各智能体在给定输入下的价值估计"""
        if self.sharing is Sharing.SHARED:
            return self.param_sets[0].value(critic_obs)
        return np.asarray([p.value(critic_obs[i:i + 1])[0] for i, p in enumerate(self.param_sets)])

    def __len__(self) -> int:
        return len(self.param_sets)
