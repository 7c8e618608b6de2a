"""Minimal differentiable substrate: tensors, dense networks, Adam, densities."""

from .autograd import Tensor, as_tensor, backprop, concat, is_grad_enabled, no_grad, parameter
from .checkpoint import FORMAT_NAME, FORMAT_VERSION, load_checkpoint, save_checkpoint
from .distributions import (
    PROB_EPS,
    GaussParams,
    bern_logpmf,
    gauss_logpdf,
    gauss_reparam,
    kl_diag_gauss,
    kl_standard_normal,
)
from .layers import ACTIVATIONS, Layer, Mlp, glorot_uniform, mlp_forward, parameter_vector
from .optim import AdamOptimizer, OptimizerState, adam_step

__all__ = [
    "ACTIVATIONS",
    "FORMAT_NAME",
    "FORMAT_VERSION",
    "PROB_EPS",
    "AdamOptimizer",
    "GaussParams",
    "Layer",
    "Mlp",
    "OptimizerState",
    "Tensor",
    "adam_step",
    "as_tensor",
    "backprop",
    "bern_logpmf",
    "concat",
    "gauss_logpdf",
    "gauss_reparam",
    "glorot_uniform",
    "is_grad_enabled",
    "kl_diag_gauss",
    "kl_standard_normal",
    "load_checkpoint",
    "mlp_forward",
    "no_grad",
    "parameter",
    "parameter_vector",
    "save_checkpoint",
]
