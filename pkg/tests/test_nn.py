#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
神经网络模块测试：MLP 反向传播、分布头、Adam、检查点
"""

import json

import numpy as np
import pytest

from compete_rl.models.errors import DimensionMismatchError, DivergenceError
from compete_rl.models.schema import AuxKind, AuxObs, CheckpointMeta, EnvKind, HeadKind, ModeFlags, ObsLayout
from compete_rl.nn import (
    AdamState,
    BetaHead,
    GaussianHead,
    Mlp,
    ParamSet,
    adam_step,
    beta_logprob,
    beta_mean,
    beta_sample,
    gaussian_entropy,
    gaussian_logprob,
    load_checkpoint,
    make_head,
    save_checkpoint,
)
from compete_rl.selftest import adam_first_step_error, finite_difference_error


class TestMlp:
    """测试 MLP"""

    def test_initialization_bounds(self):
        """权重落在 ±sqrt(1/fan_in) 内，偏置为零"""
        mlp = Mlp.initialize([4, 16, 3], np.random.default_rng(0))
        for k, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
            bound = np.sqrt(1.0 / mlp.layer_dims[k])
            assert np.all(np.abs(w) <= bound)
            assert np.all(b == 0.0)

    def test_output_scale(self):
        base = Mlp.initialize([2, 4, 1], np.random.default_rng(1))
        scaled = Mlp.initialize([2, 4, 1], np.random.default_rng(1), output_scale=0.01)
        assert np.allclose(scaled.weights[-1], 0.01 * base.weights[-1])
        assert np.array_equal(scaled.weights[0], base.weights[0])

    def test_forward_shapes(self):
        mlp = Mlp.initialize([3, 5, 2], np.random.default_rng(2))
        y, _ = mlp.forward(np.ones(3))
        assert y.shape == (2,)
        y, _ = mlp.forward(np.ones((7, 3)))
        assert y.shape == (7, 2)

    def test_forward_matches_manual(self):
        """tanh 隐藏层、恒等输出层"""
        mlp = Mlp.initialize([2, 3, 1], np.random.default_rng(3))
        x = np.array([0.3, -1.2])
        h = np.tanh(mlp.weights[0] @ x + mlp.biases[0])
        expected = mlp.weights[1] @ h + mlp.biases[1]
        y, _ = mlp.forward(x)
        assert np.allclose(y, expected, atol=1e-15)

    def test_zero_network(self):
        mlp = Mlp.zeros([3, 4, 2])
        y, _ = mlp.forward(np.random.default_rng(4).normal(size=(5, 3)))
        assert np.array_equal(y, np.zeros((5, 2)))

    def test_input_mismatch(self):
        mlp = Mlp.zeros([3, 4, 2])
        with pytest.raises(DimensionMismatchError):
            mlp.forward(np.ones(4))

    def test_parameter_gradients(self):
        """反向传播与中心差分一致"""
        rng = np.random.default_rng(5)
        mlp = Mlp.initialize([4, 8, 8, 2], rng)
        x = rng.normal(size=(6, 4))
        w = rng.normal(size=(6, 2))

        def loss():
            y, _ = mlp.forward(x)
            return float(np.sum(w * y))

        _, tape = mlp.forward(x)
        _, grads = mlp.backward(tape, w)
        assert finite_difference_error(loss, mlp.parameters(), grads) < 1e-6

    def test_input_gradient(self):
        rng = np.random.default_rng(6)
        mlp = Mlp.initialize([3, 5, 1], rng)
        x = rng.normal(size=3)
        _, tape = mlp.forward(x)
        dx, _ = mlp.backward(tape, np.ones(1))
        h = 1e-6
        numeric = np.array([
            (mlp.forward(x + h * e)[0][0] - mlp.forward(x - h * e)[0][0]) / (2 * h) for e in np.eye(3)
        ])
        assert np.allclose(dx, numeric, atol=1e-8)

    def test_parameters_are_live(self):
        """parameters() 返回的是网络自身的数组"""
        mlp = Mlp.zeros([2, 2, 1])
        mlp.parameters()[0] += 1.0
        assert np.all(mlp.weights[0] == 1.0)

    def test_snapshot_roundtrip(self):
        mlp = Mlp.initialize([3, 4, 2], np.random.default_rng(7))
        restored = Mlp.from_snapshot(mlp.to_snapshot())
        for a, b in zip(mlp.parameters(), restored.parameters()):
            assert np.array_equal(a, b)

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            Mlp([2, 3], [np.zeros((2, 3))], [np.zeros(3)])
        with pytest.raises(ValueError):
            Mlp([2], [], [])


class TestGaussianHead:
    """测试高斯头"""

    def test_logprob_standard_normal(self):
        """标准正态在 0 处的对数密度"""
        value = gaussian_logprob(np.zeros(1), np.zeros(1), np.zeros(1))
        assert value == pytest.approx(-0.5 * np.log(2 * np.pi))

    def test_logprob_matches_scipy(self):
        from scipy.stats import norm

        mean, log_std, action = np.array([0.3, -0.1]), np.array([-0.5, 0.2]), np.array([1.0, 0.4])
        expected = np.sum(norm.logpdf(action, loc=mean, scale=np.exp(log_std)))
        assert gaussian_logprob(mean, log_std, action) == pytest.approx(expected)

    def test_entropy(self):
        assert gaussian_entropy(np.zeros(1)) == pytest.approx(0.5 * np.log(2 * np.pi * np.e))

    def test_sample_statistics(self):
        head = GaussianHead(1, np.array([np.log(0.5)]))
        out = np.full((20000, 1), 0.7)
        samples = head.sample(out, np.random.default_rng(8))
        assert abs(samples.mean() - 0.7) < 0.02
        assert abs(samples.std() - 0.5) < 0.02

    @pytest.mark.parametrize("mean,log_std", [(0.0, 0.0), (0.3, np.log(0.5)), (-1.2, np.log(2.0))])
    def test_density_integrates_to_one(self, mean, log_std):
        """梯形法积分密度为 1"""
        from scipy.integrate import trapezoid

        std = np.exp(log_std)
        grid = np.linspace(mean - 12.0 * std, mean + 12.0 * std, 40001)[:, None]
        density = np.exp(gaussian_logprob(np.array([mean]), np.array([log_std]), grid))
        assert trapezoid(density, grid[:, 0]) == pytest.approx(1.0, abs=1e-6)

    def test_mean_action(self):
        head = GaussianHead(1)
        assert np.array_equal(head.mean_action(np.array([[0.25]])), [[0.25]])

    def test_logprob_grad(self):
        """对均值和 log_std 的梯度与中心差分一致"""
        rng = np.random.default_rng(9)
        head = GaussianHead(2, rng.normal(size=2) * 0.3)
        out = rng.normal(size=(5, 2))
        action = rng.normal(size=(5, 2))
        d_out, (d_log_std,) = head.log_prob_grad(out, action)
        weights = rng.normal(size=5)

        def loss():
            return float(np.sum(weights * head.log_prob(out, action)))

        grads = [weights[:, None] * d_out, np.sum(weights[:, None] * d_log_std, axis=0)]
        assert finite_difference_error(loss, [out, head.log_std], grads) < 1e-7


class TestBetaHead:
    """测试 Beta 头"""

    def test_zero_preactivation_mean(self):
        """α = β 时均值为 0"""
        head = BetaHead(1)
        assert head.trunk_outputs() == 2
        assert beta_mean(np.zeros(2))[0] == pytest.approx(0.0)

    def test_logprob_matches_scipy(self):
        """仿射 Beta 密度 = Beta((a+1)/2) / 2"""
        from scipy.stats import beta as beta_dist

        pre = np.array([0.4, -0.3])
        alpha, b = 1.0 + np.log1p(np.exp(0.4)), 1.0 + np.log1p(np.exp(-0.3))
        action = np.array([0.2])
        expected = beta_dist.logpdf(0.6, alpha, b) - np.log(2.0)
        assert beta_logprob(pre, action) == pytest.approx(expected)

    def test_endpoints_are_finite(self):
        """端点 ±1 的对数概率有限"""
        pre = np.array([[2.0, 2.0], [2.0, 2.0]])
        values = beta_logprob(pre, np.array([[-1.0], [1.0]]))
        assert np.all(np.isfinite(values))

    @pytest.mark.parametrize("pre", [[0.4, -0.3], [2.0, 1.0], [-1.0, 3.0]])
    def test_density_integrates_to_one(self, pre):
        """[-1, 1] 上梯形法积分密度为 1（含雅可比项）"""
        from scipy.integrate import trapezoid

        grid = np.linspace(-1.0, 1.0, 200001)[:, None]
        density = np.exp(beta_logprob(np.array(pre), grid))
        assert trapezoid(density, grid[:, 0]) == pytest.approx(1.0, abs=1e-4)

    def test_sample_mean_matches_formula(self):
        """蒙特卡洛均值接近 (α - β) / (α + β)"""
        pre = np.tile([0.8, -0.5], (100000, 1))
        samples = beta_sample(pre, np.random.default_rng(13))
        expected = beta_mean(np.array([0.8, -0.5]))[0]
        assert expected > 0.0
        assert abs(samples.mean() - expected) < 0.02

    def test_samples_in_range(self):
        head = BetaHead(1)
        samples = head.sample(np.random.default_rng(10).normal(size=(1000, 2)), np.random.default_rng(11))
        assert np.all(samples >= -1.0) and np.all(samples <= 1.0)

    def test_logprob_and_entropy_grads(self):
        rng = np.random.default_rng(12)
        head = BetaHead(1)
        pre = rng.normal(size=(6, 2))
        action = rng.uniform(-0.9, 0.9, size=(6, 1))
        d_pre, _ = head.log_prob_grad(pre, action)
        assert finite_difference_error(lambda: float(np.sum(head.log_prob(pre, action))), [pre], [d_pre]) < 1e-7

        e_pre, _ = head.entropy_grad(pre)
        assert finite_difference_error(lambda: float(np.sum(head.entropy(pre))), [pre], [e_pre]) < 1e-7


class TestMakeHead:
    def test_kinds(self):
        assert isinstance(make_head(HeadKind.GAUSSIAN, 1), GaussianHead)
        assert isinstance(make_head(HeadKind.BETA, 1), BetaHead)


class TestAdam:
    """测试 Adam"""

    def test_first_step(self):
        """首步为 -lr·g/(|g|+eps)"""
        assert adam_first_step_error() < 1e-12

    def test_zero_gradient_is_noop(self):
        params = [np.ones(3)]
        state = AdamState.zeros_like(params)
        adam_step(params, [np.zeros(3)], state, 1e-3)
        assert np.array_equal(params[0], np.ones(3))
        assert state.step == 1

    def test_minimizes_quadratic(self):
        params = [np.array([3.0, -2.0])]
        state = AdamState.zeros_like(params)
        for _ in range(2000):
            adam_step(params, [2.0 * params[0]], state, 0.05)
        assert np.all(np.abs(params[0]) < 0.05)

    def test_non_finite_gradient(self):
        params = [np.ones(2)]
        with pytest.raises(DivergenceError):
            adam_step(params, [np.array([np.inf, 0.0])], AdamState.zeros_like(params), 1e-3)

    def test_shape_mismatch(self):
        params = [np.ones(2)]
        with pytest.raises(ValueError):
            adam_step(params, [np.ones(3)], AdamState.zeros_like(params), 1e-3)


def _meta() -> CheckpointMeta:
    return CheckpointMeta(
        env_kind=EnvKind.POINT_RACER,
        n_train=2,
        flags=ModeFlags(aux_obs=AuxObs.COMPETITIVE),
        obs_layout=ObsLayout(proprio_dim=1, aux_dim=4, aux_kind=AuxKind.COMPETITIVE),
        critic_input_dim=5,
        mode="2A-Sh-Decent-Comp",
    )


class TestParamSet:
    """测试参数集合与检查点"""

    def test_build_dimensions(self):
        params = ParamSet.build(5, 7, 1, HeadKind.GAUSSIAN, [16, 16], np.random.default_rng(13))
        assert params.obs_dim == 5
        assert params.critic_dim == 7
        assert params.actor.layer_dims == [5, 16, 16, 1]
        assert params.critic.layer_dims == [7, 16, 16, 1]
        assert np.array_equal(params.head.log_std, [0.0])

    def test_initial_actions_near_zero(self):
        params = ParamSet.build(3, 3, 1, HeadKind.GAUSSIAN, [64, 64], np.random.default_rng(14))
        mean = params.mean_action(np.random.default_rng(15).normal(size=(10, 3)))
        assert np.all(np.abs(mean) < 0.1)

    def test_act_logprob_consistent(self):
        params = ParamSet.build(3, 3, 1, HeadKind.BETA, [8], np.random.default_rng(16))
        obs = np.random.default_rng(17).normal(size=(4, 3))
        actions, logp = params.act(obs, np.random.default_rng(18))
        assert actions.shape == (4, 1)
        assert np.allclose(logp, params.log_prob(obs, actions))

    def test_head_mismatch(self):
        with pytest.raises(ValueError):
            ParamSet(Mlp.zeros([2, 2]), GaussianHead(1), Mlp.zeros([2, 1]))

    @pytest.mark.parametrize("head_kind", [HeadKind.GAUSSIAN, HeadKind.BETA])
    def test_checkpoint_roundtrip(self, tmp_path, head_kind):
        """保存后读回，参数与优化器状态逐位一致"""
        rng = np.random.default_rng(19)
        params = ParamSet.build(5, 5, 1, head_kind, [8, 8], rng)
        grads = [rng.normal(size=p.shape) for p in params.actor_parameters()]
        adam_step(params.actor_parameters(), grads, params.adam_actor, 1e-3)

        path = save_checkpoint(str(tmp_path / "ckpt" / "checkpoint.json"), _meta(), [params, params.copy()])
        meta, loaded = load_checkpoint(path)

        assert meta == _meta()
        assert len(loaded) == 2
        assert loaded[0].head.kind is head_kind
        for a, b in zip(params.actor_parameters() + params.critic_parameters(),
                        loaded[0].actor_parameters() + loaded[0].critic_parameters()):
            assert np.array_equal(a, b)
        assert loaded[0].adam_actor.step == 1
        for a, b in zip(params.adam_actor.m, loaded[0].adam_actor.m):
            assert np.array_equal(a, b)

    def test_unknown_version(self, tmp_path):
        params = ParamSet.build(5, 5, 1, HeadKind.GAUSSIAN, [4], np.random.default_rng(20))
        path = save_checkpoint(str(tmp_path / "checkpoint.json"), _meta(), [params])
        document = json.loads(open(path, encoding="utf-8").read())
        document["format_version"] = 99
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f)
        with pytest.raises(ValueError):
            load_checkpoint(path)
