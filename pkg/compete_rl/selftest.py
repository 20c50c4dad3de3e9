#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
不变量自检
GAE 递推对照、有限差分梯度、观测性质、评估补零维度、Adam 首步与噪声统计
"""

from typing import Callable, List, Sequence, Tuple

import numpy as np

from compete_rl.env.observation import aux_block, competitive_obs, observation_layout
from compete_rl.env.race import AgentPhys, RaceState
from compete_rl.models.schema import AuxKind, AuxObs, EnvKind, PpoConfig
from compete_rl.nn.adam import AdamState, adam_step
from compete_rl.nn.heads import GaussianHead
from compete_rl.nn.mlp import Mlp
from compete_rl.nn.params import ParamSet
from compete_rl.orchestrator.evaluation import evaluation_layout
from compete_rl.orchestrator.modes import BASELINE_MODES, resolve_cell
from compete_rl.ppo.gae import compute_gae, compute_gae_reference
from compete_rl.ppo.update import PpoBatch, actor_loss_and_grads, critic_loss_and_grads

FD_STEP = 1e-5
GRAD_LAYERS = [4, 8, 8, 1]


def gae_oracle_error(instances: int = 1000, seed: int = 0) -> float:
    """随机实例上递推 GAE 与双重求和的最大绝对误差"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        T = int(rng.integers(1, 21))
        rewards = rng.normal(size=T)
        values = rng.normal(size=T)
        dones = (rng.random(T) < 0.2).astype(np.float64)
        gamma, lam = rng.random(), rng.random()
        bootstrap = rng.normal()
        adv, _ = compute_gae(rewards, values, dones, bootstrap, gamma, lam)
        ref = compute_gae_reference(rewards, values, dones, bootstrap, gamma, lam)
        worst = max(worst, float(np.max(np.abs(adv - ref))))
    return worst


def finite_difference_error(loss_fn: Callable[[], float], params: Sequence[np.ndarray],
                            grads: Sequence[np.ndarray], h: float = FD_STEP) -> float:
    """
    解析梯度与中心差分的相对误差 ||a - n|| / (||a|| + ||n||)

    Args:
        loss_fn: 按参数当前值计算损失
        params: 参数数组（原地扰动后恢复）
        grads: 同序的解析梯度
        h: 差分步长

    Returns:
        float: 相对误差
    """
    analytic, numeric = [], []
    for p, g in zip(params, grads):
        flat = p.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + h
            plus = loss_fn()
            flat[k] = original - h
            minus = loss_fn()
            flat[k] = original
            numeric.append((plus - minus) / (2.0 * h))
        analytic.extend(np.asarray(g, dtype=np.float64).reshape(-1))
    a, n = np.asarray(analytic), np.asarray(numeric)
    scale = np.linalg.norm(a) + np.linalg.norm(n)
    return float(np.linalg.norm(a - n) / max(scale, 1e-12))


def random_gradient_problem(rng: np.random.Generator, batch: int = 16) -> Tuple[ParamSet, PpoBatch]:
    """4-8-8-1 actor/critic 与一个随机批次；概率比远离裁剪边界"""
    actor = Mlp.initialize(GRAD_LAYERS, rng)
    critic = Mlp.initialize(GRAD_LAYERS, rng)
    for p in actor.parameters() + critic.parameters():
        p += 0.1 * rng.standard_normal(p.shape)
    head = GaussianHead(1, rng.uniform(-0.5, 0.0, size=1))
    params = ParamSet(actor, head, critic)

    obs = rng.normal(size=(batch, GRAD_LAYERS[0]))
    mean, _ = actor.forward(obs)
    actions = mean + np.exp(head.log_std) * rng.normal(size=mean.shape)
    logp = head.log_prob(mean, actions)
    # 一半样本在裁剪区间内，另一半远在区间外
    shift = np.where(rng.random(batch) < 0.5, rng.uniform(-0.1, 0.1, batch),
                     rng.choice([-0.8, 0.8], batch))
    data = PpoBatch(
        obs=obs,
        critic_obs=rng.normal(size=(batch, GRAD_LAYERS[0])),
        actions=actions,
        logp_old=logp - shift,
        advantages=rng.normal(size=batch),
        returns=rng.normal(size=batch),
    )
    return params, data


def gradient_errors(points: int = 100, seed: int = 0) -> Tuple[float, float]:
    """
    价值损失与裁剪代理目标的有限差分相对误差

    Returns:
        Tuple[float, float]: (价值损失最大误差, 策略损失最大误差)
    """
    rng = np.random.default_rng(seed)
    config = PpoConfig()
    worst_value, worst_policy = 0.0, 0.0
    for _ in range(points):
        params, batch = random_gradient_problem(rng)

        _, grads = critic_loss_and_grads(params, batch, config)
        err = finite_difference_error(lambda: critic_loss_and_grads(params, batch, config)[0],
                                      params.critic_parameters(), grads)
        worst_value = max(worst_value, err)

        _, grads = actor_loss_and_grads(params, batch, config)
        err = finite_difference_error(lambda: actor_loss_and_grads(params, batch, config)[0],
                                      params.actor_parameters(), grads)
        worst_policy = max(worst_policy, err)
    return worst_value, worst_policy


def random_state(rng: np.random.Generator, n_agents: int) -> RaceState:
    agents = tuple(
        AgentPhys(x=float(rng.normal(scale=10.0)), v=float(rng.normal(scale=2.0)), stamina=float(rng.random()))
        for _ in range(n_agents)
    )
    return RaceState(agents=agents, t=0)


def observation_violations(states: int = 10000, seed: int = 0) -> List[str]:
    """
    竞争观测的反对称与自身为零

    Returns:
        List[str]: 违反项描述，空列表表示全部满足
    """
    rng = np.random.default_rng(seed)
    problems = []
    for k in range(states):
        n = 1 + k % 5
        state = random_state(rng, n)
        blocks = np.stack([competitive_obs(state, i).reshape(n, 2) for i in range(n)])
        for i in range(n):
            if blocks[i, i, 0] != 0.0 or blocks[i, i, 1] != 0.0:
                problems.append(f"state {k}: self block of agent {i} is not zero")
            for j in range(n):
                if not np.array_equal(blocks[i, j], -blocks[j, i]):
                    problems.append(f"state {k}: o[{i}][{j}] != -o[{j}][{i}]")
        if len(problems) > 10:
            break
    return problems


def padding_violations(max_agents: int = 5) -> List[str]:
    """每个基线模式的评估观测维度 = proprio_dim + 2·n_train（有辅助块时）"""
    problems = []
    for kind in EnvKind:
        for name in BASELINE_MODES:
            for n in range(1, max_agents + 1):
                flags, n_train = resolve_cell(name, n)
                layout = evaluation_layout(kind, flags, n_train)
                has_aux = flags.aux_obs is not AuxObs.NONE
                expected = kind.proprio_dim + (2 * n_train if has_aux else 0)
                if layout.total_dim != expected:
                    problems.append(f"{kind.value}/{name}/N={n}: dim {layout.total_dim} != {expected}")
                if has_aux and layout.aux_kind is not AuxKind.ZERO_PAD:
                    problems.append(f"{kind.value}/{name}/N={n}: aux block is not zero padded")
    return problems


def adam_first_step_error(seed: int = 0, lr: float = 1e-3) -> float:
    """首步更新应为 -lr·g/(|g|+eps)"""
    rng = np.random.default_rng(seed)
    params = [rng.normal(size=(3, 4)), rng.normal(size=4)]
    grads = [rng.normal(size=(3, 4)), rng.normal(size=4)]
    before = [p.copy() for p in params]
    state = AdamState.zeros_like(params)
    adam_step(params, grads, state, lr)
    worst = 0.0
    for p, p0, g in zip(params, before, grads):
        expected = p0 - lr * g / (np.abs(g) + state.eps)
        worst = max(worst, float(np.max(np.abs(p - expected))))
    return worst


def noise_statistics(samples: int = 10000, n_agents: int = 3, seed: int = 0,
                     noise_std: float = 1.0) -> Tuple[float, float, int]:
    """
    噪声辅助块在全部坐标上的样本均值与方差

    Returns:
        Tuple[float, float, int]: (均值, 方差, 样本坐标数)
    """
    rng = np.random.default_rng(seed)
    layout = observation_layout(EnvKind.STAMINA_RACER, AuxKind.NOISE, n_aux_agents=n_agents)
    state = random_state(np.random.default_rng(seed + 1), n_agents)
    draws = np.stack([aux_block(state, k % n_agents, layout, rng, noise_std) for k in range(samples)])
    return float(draws.mean()), float(draws.var()), int(draws.size)


class SelfTester:
    """不变量自检器"""

    def __init__(self, quick: bool = False):
        """
        初始化自检器

        Args:
            quick: 缩小实例数量（仅用于快速冒烟）
        """
        self.quick = quick

    def check_gae(self) -> bool:
        print("🧪 GAE 递推与双重求和对照...")
        error = gae_oracle_error(100 if self.quick else 1000)
        ok = error < 1e-12
        print(f"{'✅' if ok else '❌'} 最大误差 {error:.3e}")
        return ok

    def check_gradients(self) -> bool:
        print("🧪 有限差分梯度检查 (4-8-8-1)...")
        value_err, policy_err = gradient_errors(10 if self.quick else 100)
        ok = value_err < 1e-5 and policy_err < 1e-5
        print(f"{'✅' if ok else '❌'} 价值损失 {value_err:.3e}, 裁剪代理目标 {policy_err:.3e}")
        return ok

    def check_observations(self) -> bool:
        print("🧪 竞争观测反对称与自身为零...")
        problems = observation_violations(1000 if self.quick else 10000)
        for problem in problems[:5]:
            print(f"   {problem}")
        print(f"{'✅' if not problems else '❌'} 违反 {len(problems)} 项")
        return not problems

    def check_padding(self) -> bool:
        print("🧪 评估补零维度...")
        problems = padding_violations()
        for problem in problems[:5]:
            print(f"   {problem}")
        print(f"{'✅' if not problems else '❌'} 违反 {len(problems)} 项")
        return not problems

    def check_adam(self) -> bool:
        print("🧪 Adam 首步...")
        error = adam_first_step_error()
        ok = error < 1e-12
        print(f"{'✅' if ok else '❌'} 最大误差 {error:.3e}")
        return ok

    def check_noise(self) -> bool:
        print("🧪 噪声辅助块统计...")
        mean, var, n = noise_statistics()
        ok = abs(mean) < 3.0 / np.sqrt(n) and abs(var - 1.0) < 0.05
        print(f"{'✅' if ok else '❌'} mean={mean:.5f} (界 {3.0 / np.sqrt(n):.5f}), var={var:.4f}")
        return ok

    def run_all(self) -> bool:
        """运行全部自检，返回是否全部通过"""
        print("🚀 开始运行不变量自检\n")
        print("=" * 60)
        checks = [
            ("GAE对照", self.check_gae),
            ("梯度检查", self.check_gradients),
            ("观测性质", self.check_observations),
            ("评估补零", self.check_padding),
            ("Adam首步", self.check_adam),
            ("噪声统计", self.check_noise),
        ]
        results = []
        for name, check in checks:
            print(f"\n📋 {name}:")
            print("-" * 40)
            try:
                results.append((name, check()))
            except Exception as e:
                print(f"❌ {name} 异常: {e}")
                results.append((name, False))

        print("\n" + "=" * 60)
        passed = sum(1 for _, ok in results if ok)
        for name, ok in results:
            print(f"{name:12} {'✅ 通过' if ok else '❌ 失败'}")
        print("-" * 60)
        print(f"总计: {passed}/{len(results)} 通过")
        return passed == len(results)


def run_selftest(quick: bool = False) -> int:
    """运行自检并返回退出码"""
    return 0 if SelfTester(quick=quick).run_all() else 1


if __name__ == "__main__":
    raise SystemExit(run_selftest())
