#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
神经网络模块
tanh MLP、策略分布头、Adam 与参数检查点
"""

from .mlp import (
    Mlp,
    MlpTape,
    mlp_forward,
    mlp_backward
)

from .heads import (
    GaussianHead,
    BetaHead,
    make_head,
    gaussian_logprob,
    gaussian_sample,
    gaussian_entropy,
    beta_params,
    beta_logprob,
    beta_sample,
    beta_mean,
    beta_entropy
)

from .adam import (
    AdamState,
    adam_step
)

from .params import (
    ParamSet,
    save_checkpoint,
    load_checkpoint
)

__all__ = [
    'Mlp',
    'MlpTape',
    'mlp_forward',
    'mlp_backward',

    'GaussianHead',
    'BetaHead',
    'make_head',
    'gaussian_logprob',
    'gaussian_sample',
    'gaussian_entropy',
    'beta_params',
    'beta_logprob',
    'beta_sample',
    'beta_mean',
    'beta_entropy',

    'AdamState',
    'adam_step',

    'ParamSet',
    'save_checkpoint',
    'load_checkpoint'
]
