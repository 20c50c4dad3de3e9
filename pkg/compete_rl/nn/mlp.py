#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
tanh 多层感知机
前向保存逐层激活记录，反向按记录做精确的链式求导（float64）
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from compete_rl.models.errors import DimensionMismatchError
from compete_rl.models.schema import MlpSnapshot


@dataclass
class MlpTape:
    """前向激活记录"""
    mlp: "Mlp"
    # 每一层仿射变换的输入，形状 (B, fan_in)；layer_inputs[k+1] 即第 k 层的 tanh 输出
    layer_inputs: List[np.ndarray]
    squeeze: bool


class Mlp:
    """隐藏层 tanh、输出层恒等的全连接网络"""

    def __init__(self, layer_dims: Sequence[int], weights: List[np.ndarray], biases: List[np.ndarray]):
        """
        初始化网络

        Args:
            layer_dims: [输入, 隐藏..., 输出]
            weights: 每层 (fan_out, fan_in) 矩阵
            biases: 每层 (fan_out,) 向量
        """
        self.layer_dims = [int(d) for d in layer_dims]
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self._check_shapes()

    def _check_shapes(self):
        if len(self.layer_dims) < 2:
            raise ValueError(f"layer_dims 至少需要输入和输出两项: {self.layer_dims}")
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("权重/偏置层数与 layer_dims 不一致")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_dims[k + 1], self.layer_dims[k])
            if w.shape != expected or b.shape != (expected[0],):
                raise ValueError(f"第 {k} 层形状错误: W{w.shape} b{b.shape}, 期望 W{expected}")

    @classmethod
    def initialize(cls, layer_dims: Sequence[int], rng: np.random.Generator,
                   output_scale: float = 1.0) -> "Mlp":
        """
        均匀初始化 U(-sqrt(1/fan_in), sqrt(1/fan_in))，偏置为零

        Args:
            layer_dims: 各层宽度
            rng: 初始化随机源
            output_scale: 输出层权重的缩放

        Returns:
            Mlp: 新网络
        """
        weights, biases = [], []
        n_layers = len(layer_dims) - 1
        for k in range(n_layers):
            fan_in, fan_out = layer_dims[k], layer_dims[k + 1]
            bound = np.sqrt(1.0 / fan_in)
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            if k == n_layers - 1:
                w = w * output_scale
            weights.append(w)
            biases.append(np.zeros(fan_out))
        return cls(layer_dims, weights, biases)

    @classmethod
    def zeros(cls, layer_dims: Sequence[int]) -> "Mlp":
        """全零网络"""
        weights = [np.zeros((layer_dims[k + 1], layer_dims[k])) for k in range(len(layer_dims) - 1)]
        biases = [np.zeros(layer_dims[k + 1]) for k in range(len(layer_dims) - 1)]
        return cls(layer_dims, weights, biases)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def parameters(self) -> List[np.ndarray]:
        """参数列表，顺序为 W0, b0, W1, b1, ..."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, MlpTape]:
        """
        前向计算

        Args:
            x: 形状 (d,) 或 (B, d)

        Returns:
            Tuple[np.ndarray, MlpTape]: 输出与激活记录
        """
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        a = x.reshape(1, -1) if squeeze else x
        if a.ndim != 2 or a.shape[1] != self.input_dim:
            raise DimensionMismatchError(f"输入维度 {x.shape} 与网络输入 {self.input_dim} 不一致")

        layer_inputs = []
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            layer_inputs.append(a)
            z = a @ w.T + b
            a = np.tanh(z) if k < last else z

        y = a[0] if squeeze else a
        return y, MlpTape(mlp=self, layer_inputs=layer_inputs, squeeze=squeeze)

    def backward(self, tape: MlpTape, dy: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """
        反向传播 y·dy 的梯度

        Args:
            tape: 同一网络的前向记录
            dy: 与输出同形状的上游梯度

        Returns:
            Tuple[np.ndarray, List[np.ndarray]]: 对输入的梯度、与 parameters() 同序的参数梯度
        """
        g = np.asarray(dy, dtype=np.float64)
        g = g.reshape(1, -1) if tape.squeeze else g

        grads: List[Optional[np.ndarray]] = [None] * (2 * len(self.weights))
        for k in range(len(self.weights) - 1, -1, -1):
            a_in = tape.layer_inputs[k]
            grads[2 * k] = g.T @ a_in
            grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.weights[k]
            if k > 0:
                # a_in 是上一层的 tanh 输出
                g = g * (1.0 - a_in * a_in)

        dx = g[0] if tape.squeeze else g
        return dx, grads

    def copy(self) -> "Mlp":
        return Mlp(self.layer_dims, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def to_snapshot(self) -> MlpSnapshot:
        return MlpSnapshot(
            layer_dims=list(self.layer_dims),
            weights=[w.tolist() for w in self.weights],
            biases=[b.tolist() for b in self.biases],
        )

    @classmethod
    def from_snapshot(cls, snapshot: MlpSnapshot) -> "Mlp":
        dims = snapshot.layer_dims
        weights = [np.array(w, dtype=np.float64).reshape(dims[k + 1], dims[k]) for k, w in enumerate(snapshot.weights)]
        return cls(dims, weights, [np.array(b, dtype=np.float64) for b in snapshot.biases])


def mlp_forward(mlp: Mlp, x: np.ndarray) -> Tuple[np.ndarray, MlpTape]:
    """前向计算（函数形式）"""
    return mlp.forward(x)


def mlp_backward(tape: MlpTape, dy: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """反向传播（函数形式）"""
    return tape.mlp.backward(tape, dy)
