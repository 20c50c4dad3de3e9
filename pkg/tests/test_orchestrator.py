#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
编排模块测试：模式开关、策略库、经验采集、评估与训练循环
"""

from pathlib import Path

import numpy as np
import pytest

from compete_rl.env import AgentPhys, RaceState, reset, step
from compete_rl.env.observation import proprio_obs
from compete_rl.harness import read_metrics, run_grid
from compete_rl.harness.runner import METRICS_FILE
from compete_rl.models.errors import DimensionMismatchError
from compete_rl.models.schema import (
    AuxKind,
    AuxObs,
    CriticInput,
    EnvKind,
    HeadKind,
    ModeFlags,
    RaceConfig,
    Sharing,
)
from compete_rl.nn import GaussianHead, Mlp, ParamSet
from compete_rl.orchestrator import (
    BASELINE_MODES,
    SA_FLAGS,
    PolicyBank,
    SeedStreams,
    build_bank,
    collect_rollouts,
    critic_input_dim,
    derive_rng,
    evaluate,
    evaluation_layout,
    global_critic_input,
    mode_label,
    mode_name,
    parse_mode,
    policy_layout,
    resolve_cell,
    train,
)
from compete_rl.selftest import padding_violations

COMP = ModeFlags(aux_obs=AuxObs.COMPETITIVE)
NOISE = ModeFlags(aux_obs=AuxObs.NOISE)
CENT = ModeFlags(critic_input=CriticInput.CENTRALIZED)
CENT_COMP = ModeFlags(critic_input=CriticInput.CENTRALIZED, aux_obs=AuxObs.COMPETITIVE)
SEPARATE_COMP = ModeFlags(sharing=Sharing.SEPARATE, aux_obs=AuxObs.COMPETITIVE)


def make_bank(flags: ModeFlags, n: int, kind: EnvKind = EnvKind.POINT_RACER, seed: int = 0,
              hidden=(8, 8)):
    streams = SeedStreams.from_master(seed)
    layout = policy_layout(kind, flags, n)
    critic_dim = critic_input_dim(kind, flags, n, layout)
    bank = PolicyBank.build(flags, n, layout.total_dim, critic_dim, kind.action_dim, HeadKind.GAUSSIAN,
                            list(hidden), streams)
    return bank, layout, streams


class TestSeeding:
    """测试随机源派生"""

    def test_same_label_same_stream(self):
        assert derive_rng(3, "env").integers(2 ** 31) == derive_rng(3, "env").integers(2 ** 31)

    def test_labels_are_independent(self):
        a = derive_rng(3, "env").random(4)
        b = derive_rng(3, "policy").random(4)
        c = derive_rng(4, "env").random(4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_init_stream_cached(self):
        streams = SeedStreams.from_master(0)
        assert streams.init("init/1") is streams.init("init/1")
        assert streams.init("init/0") is not streams.init("init/1")


class TestModes:
    """测试模式名解析"""

    @pytest.mark.parametrize("name,expected", [
        ("SA", (Sharing.SHARED, CriticInput.DECENTRALIZED, AuxObs.NONE)),
        ("Sh-Decent", (Sharing.SHARED, CriticInput.DECENTRALIZED, AuxObs.NONE)),
        ("Sh-Cent", (Sharing.SHARED, CriticInput.CENTRALIZED, AuxObs.NONE)),
        ("Sp-Decent-Comp", (Sharing.SEPARATE, CriticInput.DECENTRALIZED, AuxObs.COMPETITIVE)),
        ("Sh-Decent-Noi", (Sharing.SHARED, CriticInput.DECENTRALIZED, AuxObs.NOISE)),
        ("Sh-Decent-Comp", (Sharing.SHARED, CriticInput.DECENTRALIZED, AuxObs.COMPETITIVE)),
        ("Sh-Cent-Comp", (Sharing.SHARED, CriticInput.CENTRALIZED, AuxObs.COMPETITIVE)),
        ("Sh-Decent-Zero", (Sharing.SHARED, CriticInput.DECENTRALIZED, AuxObs.ZERO)),
    ])
    def test_parse(self, name, expected):
        flags, _ = parse_mode(name)
        assert (flags.sharing, flags.critic_input, flags.aux_obs) == expected

    def test_prefix(self):
        flags, n = parse_mode("3A-Sh-Decent-Comp")
        assert n == 3
        assert flags == COMP

    def test_sa_fixes_one_agent(self):
        assert parse_mode("SA") == (SA_FLAGS, 1)
        assert parse_mode("Sh-Decent")[1] is None

    @pytest.mark.parametrize("name", ["", "XA-Sh-Decent", "Sh", "Sh-Central", "Sh-Decent-Foo", "Sp-Decent-Comp-X"])
    def test_invalid(self, name):
        with pytest.raises(ValueError):
            parse_mode(name)

    def test_names_roundtrip(self):
        for name in BASELINE_MODES[1:]:
            assert mode_name(parse_mode(name)[0]) == name

    def test_labels(self):
        assert mode_label(SA_FLAGS, 1) == "SA"
        assert mode_label(COMP, 3) == "3A-Sh-Decent-Comp"
        assert mode_label(SA_FLAGS, 2) == "2A-Sh-Decent"

    def test_single_agent_collapses_to_sa(self):
        """N=1 时任何模式都退化为 SA"""
        for name in BASELINE_MODES:
            assert resolve_cell(name, 1) == (SA_FLAGS, 1)
        assert resolve_cell("Sh-Cent-Comp", 3) == (CENT_COMP, 3)
        assert resolve_cell("SA", 4) == (SA_FLAGS, 1)

    def test_layouts(self):
        assert policy_layout(EnvKind.POINT_RACER, SA_FLAGS, 1).total_dim == 1
        layout = policy_layout(EnvKind.STAMINA_RACER, COMP, 3)
        assert layout.total_dim == 8
        assert layout.aux_kind is AuxKind.COMPETITIVE
        assert policy_layout(EnvKind.POINT_RACER, ModeFlags(aux_obs=AuxObs.ZERO), 2).aux_kind is AuxKind.ZERO_PAD

    def test_critic_dims(self):
        """集中式价值网络维度 = N·proprio_dim (+ 2N)"""
        kind = EnvKind.STAMINA_RACER
        assert critic_input_dim(kind, COMP, 3, policy_layout(kind, COMP, 3)) == 8
        assert critic_input_dim(kind, CENT, 3, policy_layout(kind, CENT, 3)) == 6
        assert critic_input_dim(kind, CENT_COMP, 3, policy_layout(kind, CENT_COMP, 3)) == 12


class TestGlobalCriticInput:
    """测试集中式价值网络输入"""

    def test_concatenation(self):
        state = RaceState(agents=(AgentPhys(v=1.0), AgentPhys(x=2.0, v=2.0)))
        assert np.array_equal(global_critic_input(state, 0, CENT, EnvKind.POINT_RACER), [1.0, 2.0])
        assert np.array_equal(proprio_obs(state.agents[0], EnvKind.POINT_RACER), [1.0])

    def test_permutation_swaps_entries(self):
        state = RaceState(agents=(AgentPhys(v=1.0), AgentPhys(v=2.0)))
        swapped = state.permuted([1, 0])
        assert np.array_equal(global_critic_input(swapped, 0, CENT, EnvKind.POINT_RACER), [2.0, 1.0])

    def test_competitive_block_appended(self):
        state = RaceState(agents=(AgentPhys(x=0.0, v=1.0), AgentPhys(x=3.0, v=-1.0)))
        vec = global_critic_input(state, 1, CENT_COMP, EnvKind.POINT_RACER)
        assert len(vec) == 2 * 1 + 2 * 2
        assert np.array_equal(vec, [1.0, -1.0, -3.0, 2.0, 0.0, 0.0])

    def test_noise_requires_block(self):
        state = RaceState(agents=(AgentPhys(), AgentPhys()))
        flags = ModeFlags(critic_input=CriticInput.CENTRALIZED, aux_obs=AuxObs.NOISE)
        with pytest.raises(ValueError):
            global_critic_input(state, 0, flags, EnvKind.POINT_RACER)
        vec = global_critic_input(state, 0, flags, EnvKind.POINT_RACER, aux=np.ones(4))
        assert np.array_equal(vec, [0, 0, 1, 1, 1, 1])


class TestPolicyBank:
    """测试策略库"""

    def test_shared_single_param_set(self):
        bank, _, _ = make_bank(COMP, 3)
        assert len(bank) == 1
        assert all(bank.policy_for(i) is bank.param_sets[0] for i in range(3))

    def test_separate_param_sets(self):
        bank, _, _ = make_bank(SEPARATE_COMP, 3)
        assert len(bank) == 3
        assert not np.array_equal(bank.param_sets[0].actor.weights[0], bank.param_sets[1].actor.weights[0])

    def test_separate_init_depends_on_index_only(self):
        """第 i 组参数只由 init/{i} 决定"""
        a, _, _ = make_bank(SEPARATE_COMP, 2)
        b, _, _ = make_bank(SEPARATE_COMP, 2)
        for pa, pb in zip(a.param_sets, b.param_sets):
            assert np.array_equal(pa.actor.weights[0], pb.actor.weights[0])

    def test_wrong_count(self):
        bank, _, _ = make_bank(SEPARATE_COMP, 2)
        with pytest.raises(ValueError):
            PolicyBank(Sharing.SEPARATE, bank.param_sets[:1], 2)

    def test_policy_for_out_of_range(self):
        bank, _, _ = make_bank(COMP, 2)
        with pytest.raises(IndexError):
            bank.policy_for(2)

    def test_act_shapes(self):
        for flags in (COMP, SEPARATE_COMP):
            bank, layout, streams = make_bank(flags, 3)
            obs = np.zeros((3, layout.total_dim))
            actions, logp, values = bank.act(obs, obs, streams.policy)
            assert actions.shape == (3, 1)
            assert logp.shape == (3,) and values.shape == (3,)


class TestCollectRollouts:
    """测试经验采集"""

    def test_shared_pooling(self):
        """共享模式下所有智能体的轨迹进入同一个缓冲区"""
        bank, layout, streams = make_bank(COMP, 3)
        config = RaceConfig(n_agents=3, horizon=50)
        result = collect_rollouts(config, bank, COMP, 100, streams, layout)
        assert len(result.buffers) == 1
        buffer = result.buffers[0]
        assert buffer.agent_ids() == [0, 1, 2]
        assert buffer.total_steps == 3 * 100
        assert result.env_steps == 300
        assert result.episodes == 2
        assert len(result.episode_rewards) == 6

    def test_whole_episodes(self):
        """步数不足一回合时仍采满整回合"""
        bank, layout, streams = make_bank(SA_FLAGS, 1)
        result = collect_rollouts(RaceConfig(horizon=30), bank, SA_FLAGS, 31, streams, layout)
        assert result.steps_per_agent == 60
        assert all(len(t) == 30 for t in result.buffers[0])

    def test_separate_buffers(self):
        bank, layout, streams = make_bank(SEPARATE_COMP, 2)
        result = collect_rollouts(RaceConfig(n_agents=2, horizon=20), bank, SEPARATE_COMP, 40, streams, layout)
        assert len(result.buffers) == 2
        for i, buffer in enumerate(result.buffers):
            assert buffer.agent_ids() == [i]
            assert buffer.total_steps == 40

    def test_recorded_fields(self):
        bank, layout, streams = make_bank(CENT_COMP, 2, kind=EnvKind.STAMINA_RACER)
        config = RaceConfig(kind=EnvKind.STAMINA_RACER, n_agents=2, horizon=10)
        result = collect_rollouts(config, bank, CENT_COMP, 10, streams, layout)
        trajectory = result.buffers[0].trajectories[0]
        arrays = trajectory.as_arrays()
        assert arrays["obs"].shape == (10, 2 + 4)
        assert arrays["critic_obs"].shape == (10, 2 * 2 + 4)
        assert arrays["actions"].shape == (10, 1)
        assert list(arrays["dones"]) == [False] * 9 + [True]
        assert np.isfinite(trajectory.bootstrap_value)
        # 集中式输入末尾就是本智能体看到的竞争块
        assert np.array_equal(arrays["critic_obs"][:, 4:], arrays["obs"][:, 2:])

    def test_antisymmetry_replay(self):
        """回放缓冲区：两个智能体同一步的竞争块互为相反数，自身块为零"""
        bank, layout, streams = make_bank(COMP, 2, seed=5)
        result = collect_rollouts(RaceConfig(n_agents=2, horizon=100), bank, COMP, 300, streams, layout)
        trajectories = result.buffers[0].trajectories
        for first, second in zip(trajectories[0::2], trajectories[1::2]):
            assert (first.agent_id, second.agent_id) == (0, 1)
            for o0, o1 in zip(first.obs, second.obs):
                b0, b1 = o0[1:].reshape(2, 2), o1[1:].reshape(2, 2)
                assert np.array_equal(b0[0], [0.0, 0.0])
                assert np.array_equal(b1[1], [0.0, 0.0])
                assert np.array_equal(b0[1], -b1[0])

    def test_noise_blocks_zero_mean(self):
        """噪声模式下记录的辅助块均值接近零"""
        bank, layout, streams = make_bank(NOISE, 2, seed=7)
        result = collect_rollouts(RaceConfig(n_agents=2, horizon=500), bank, NOISE, 5000, streams, layout)
        blocks = np.vstack([np.vstack(t.obs)[:, 1:] for t in result.buffers[0]])
        assert blocks.shape == (2 * 5000, 4)
        n = blocks.size
        assert abs(blocks.mean()) < 3.0 * 1.0 / np.sqrt(n)
        assert abs(blocks.std() - 1.0) < 0.05

    def test_dimension_mismatch(self):
        bank, layout, streams = make_bank(COMP, 2)
        with pytest.raises(DimensionMismatchError):
            collect_rollouts(RaceConfig(n_agents=3), bank, COMP, 10, streams, layout)
        other = policy_layout(EnvKind.POINT_RACER, SA_FLAGS, 2)
        with pytest.raises(DimensionMismatchError):
            collect_rollouts(RaceConfig(n_agents=2), bank, COMP, 10, streams, other)

    def test_single_agent_matches_reference_loop(self):
        """N=1 SA 配置与不经过多智能体代码的单智能体 PPO 采样循环逐位一致"""
        config = RaceConfig(horizon=25)
        bank, layout, streams = make_bank(SA_FLAGS, 1, seed=11)
        result = collect_rollouts(config, bank, SA_FLAGS, 50, streams, layout)

        # 参考循环：同一主种子，同样的随机流调用顺序
        ref_streams = SeedStreams.from_master(11)
        params = ParamSet.build(1, 1, 1, HeadKind.GAUSSIAN, [8, 8], ref_streams.init("init"))
        reference = []
        for _ in range(2):
            state = reset(config, seed=int(ref_streams.env.integers(2 ** 31)))
            obs_list, actions, rewards, logps, values = [], [], [], [], []
            done = False
            while not done:
                obs = np.array([[state.agents[0].v]])
                action, logp = params.act(obs, ref_streams.policy)
                values.append(params.value(obs)[0])
                state, reward, done = step(state, [action[0, 0]], config)
                obs_list.append(obs[0])
                actions.append(action[0])
                rewards.append(reward[0])
                logps.append(logp[0])
            bootstrap = params.value(np.array([[state.agents[0].v]]))[0]
            reference.append((obs_list, actions, rewards, logps, values, bootstrap))

        trajectories = result.buffers[0].trajectories
        assert len(trajectories) == 2
        for trajectory, (obs, actions, rewards, logps, values, bootstrap) in zip(trajectories, reference):
            assert np.array_equal(np.vstack(trajectory.obs), np.vstack(obs))
            assert np.array_equal(np.vstack(trajectory.actions), np.vstack(actions))
            assert trajectory.rewards == rewards
            assert trajectory.logp == logps
            assert trajectory.values == values
            assert trajectory.bootstrap_value == bootstrap


class TestEvaluation:
    """测试零填充评估"""

    def test_padding_dimension(self):
        """N=3 竞争模式训练的参数，评估维度 = proprio_dim + 6，辅助块全零"""
        layout = evaluation_layout(EnvKind.STAMINA_RACER, COMP, 3)
        assert layout.total_dim == 2 + 6
        assert layout.aux_kind is AuxKind.ZERO_PAD
        assert evaluation_layout(EnvKind.POINT_RACER, SA_FLAGS, 1).total_dim == 1

    def test_all_modes_padding(self):
        assert padding_violations() == []

    def test_zero_policy(self):
        """零权重策略在 PointRacer 上奖励为 0"""
        params = ParamSet(Mlp.zeros([7, 8, 1]), GaussianHead(1), Mlp.zeros([7, 8, 1]))
        mean, std = evaluate(params, EnvKind.POINT_RACER, 3, COMP, 5, np.random.default_rng(0))
        assert mean == 0.0
        assert std == 0.0

    def test_deterministic(self):
        bank, _, _ = make_bank(COMP, 3)
        params = bank.param_sets[0]
        first = evaluate(params, EnvKind.POINT_RACER, 3, COMP, 4, derive_rng(1, "eval"))
        second = evaluate(params, EnvKind.POINT_RACER, 3, COMP, 4, derive_rng(1, "eval"))
        assert first == second

    def test_dimension_mismatch(self):
        bank, _, _ = make_bank(COMP, 2)
        with pytest.raises(DimensionMismatchError):
            evaluate(bank.param_sets[0], EnvKind.POINT_RACER, 3, COMP, 2, np.random.default_rng(0))
        with pytest.raises(DimensionMismatchError):
            evaluate(bank.param_sets[0], EnvKind.STAMINA_RACER, 2, COMP, 2, np.random.default_rng(0))

    def test_invalid_episodes(self):
        bank, _, _ = make_bank(SA_FLAGS, 1)
        with pytest.raises(ValueError):
            evaluate(bank.param_sets[0], EnvKind.POINT_RACER, 1, SA_FLAGS, 0, np.random.default_rng(0))

    def test_cross_env_uses_default_config(self):
        """评估环境与训练环境不同时使用该环境的默认参数"""
        params = ParamSet(Mlp.zeros([2, 4, 1]), GaussianHead(1), Mlp.zeros([2, 4, 1]))
        custom = RaceConfig(kind=EnvKind.POINT_RACER, horizon=5)
        mean, _ = evaluate(params, EnvKind.STAMINA_RACER, 1, SA_FLAGS, 2, np.random.default_rng(0), custom)
        assert mean == 0.0


class TestTrain:
    """测试训练循环"""

    def test_zero_iterations(self, make_spec):
        result = train(make_spec(total_iterations=0), seed=0)
        assert result.history == []
        assert len(result.bank) == 1
        assert result.label == "SA"

    def test_history_rows(self, make_spec):
        rows = []
        spec = make_spec(total_iterations=3, n_agents=2, flags={"aux_obs": "competitive"})
        result = train(spec, seed=1, callback=rows.append)
        assert rows == result.history
        assert [r.iteration for r in rows] == [0, 1, 2]
        assert all(r.mode == "2A-Sh-Decent-Comp" and r.seed == 1 for r in rows)
        assert [r.env_steps_total for r in rows] == [40, 80, 120]
        assert rows[0].lr > rows[2].lr

    def test_deterministic(self, make_spec):
        spec = make_spec(total_iterations=2, n_agents=2, flags={"aux_obs": "noise"})
        assert train(spec, seed=3).history == train(spec, seed=3).history

    def test_separate_mode(self, make_spec):
        spec = make_spec(total_iterations=1, n_agents=2, flags={"sharing": "separate", "aux_obs": "competitive"})
        result = train(spec, seed=0)
        assert len(result.bank) == 2
        assert result.bank.param_sets[0].adam_actor.step == spec.ppo.epochs_per_iter
        assert result.bank.param_sets[1].adam_actor.step == spec.ppo.epochs_per_iter

    def test_centralized_stamina(self, make_spec):
        spec = make_spec(total_iterations=1, n_agents=3, env={"kind": "StaminaRacer", "horizon": 10},
                         steps_per_agent=10, flags={"critic_input": "centralized", "aux_obs": "competitive"})
        result = train(spec, seed=0)
        assert result.critic_dim == 3 * 2 + 6
        meta = result.checkpoint_meta(spec)
        assert meta.mode == "3A-Sh-Cent-Comp"
        assert meta.obs_layout.total_dim == 8

    def test_modes_differing_in_one_flag_share_env_stream(self, make_spec):
        """只差辅助观测开关的两个模式，环境重置种子序列相同"""
        a = build_bank(make_spec(n_agents=2), SeedStreams.from_master(0))
        b = build_bank(make_spec(n_agents=2, flags={"aux_obs": "noise"}), SeedStreams.from_master(0))
        assert a.layout.total_dim == 1 and b.layout.total_dim == 5
        sa, sb = SeedStreams.from_master(0), SeedStreams.from_master(0)
        assert sa.env.integers(2 ** 31, size=5).tolist() == sb.env.integers(2 ** 31, size=5).tolist()


class TestBaselineMatrix:
    """完整基线矩阵在 StaminaRacer N=3 上训练"""

    MODES = BASELINE_MODES + ["Sh-Decent-Zero"]
    LABELS = ["SA", "3A-Sh-Decent", "3A-Sh-Cent", "3A-Sp-Decent-Comp", "3A-Sh-Decent-Noi",
              "3A-Sh-Decent-Comp", "3A-Sh-Cent-Comp", "3A-Sh-Decent-Zero"]

    def _check(self, summary, iterations):
        assert [cell.label for cell in summary.cells] == self.LABELS
        for cell in summary.cells:
            assert cell.n_failed == 0
            assert cell.n_effective == 1
            metrics = read_metrics(str(Path(cell.run_dir) / "seed0" / METRICS_FILE))
            assert list(metrics["iteration"]) == list(range(iterations))
            assert np.all(np.isfinite(metrics.select_dtypes("number").to_numpy()))

    @pytest.mark.parametrize("head", ["gaussian", "beta"])
    def test_every_mode_trains(self, make_spec, head):
        base = make_spec(env={"kind": "StaminaRacer", "horizon": 20}, total_iterations=3, head=head)
        self._check(run_grid(base, self.MODES, [3], workers=1), 3)

    @pytest.mark.slow
    def test_every_mode_trains_fifty_iterations(self, make_spec):
        base = make_spec(env={"kind": "StaminaRacer", "horizon": 100}, total_iterations=50,
                         steps_per_agent=500, eval_episodes=5, hidden_sizes=[32, 32])
        self._check(run_grid(base, self.MODES, [3]), 50)
