"""Diagonal Gaussian and Bernoulli terms of the variational objective."""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..exceptions import ShapeError
from .autograd import Tensor, as_tensor

LOG_2PI = math.log(2.0 * math.pi)

# Probabilities are clamped to [PROB_EPS, 1 - PROB_EPS] before taking logs
PROB_EPS = 1e-6

TensorLike = Union[Tensor, np.ndarray, float]


@dataclass
class GaussParams:
    """Mean and log-variance of a diagonal Gaussian (last axis is the dimension)."""

    mu: Tensor
    log_var: Tensor

    def __post_init__(self):
        self.mu = as_tensor(self.mu)
        self.log_var = as_tensor(self.log_var)
        if self.mu.shape != self.log_var.shape:
            raise ShapeError(
                f"mean shape {self.mu.shape} differs from log-variance shape {self.log_var.shape}"
            )

    @classmethod
    def standard(cls, shape) -> "GaussParams":
        return cls(mu=Tensor(np.zeros(shape)), log_var=Tensor(np.zeros(shape)))

    @classmethod
    def from_head(cls, head: Tensor, dim: int) -> "GaussParams":
        """Split a network output of width 2*dim into mean and log-variance."""
        if head.shape[-1] != 2 * dim:
            raise ShapeError(f"expected a head of width {2 * dim}, got {head.shape[-1]}")
        return cls(mu=head.columns(0, dim), log_var=head.columns(dim, 2 * dim))

    @property
    def variance(self) -> np.ndarray:
        return np.exp(self.log_var.data)


def _check_finite(*values: Tensor) -> None:
    for value in values:
        if not np.all(np.isfinite(value.data)):
            raise ValueError("non-finite input to a log-density")


def gauss_reparam(p: GaussParams, noise: TensorLike) -> Tensor:
    """mu + exp(0.5 * log_var) * noise, differentiable in mu and log_var."""
    noise = as_tensor(noise)
    if noise.shape != p.mu.shape:
        raise ShapeError(f"noise shape {noise.shape} differs from mean shape {p.mu.shape}")
    return p.mu + (p.log_var * 0.5).exp() * noise


def kl_diag_gauss(q: GaussParams, p: GaussParams) -> Tensor:
    """
    KL(q || p) between diagonal Gaussians, summed over the last axis.

    Returns a scalar tensor for 1-D parameters and one value per row for
    batched parameters.
    """
    if q.mu.shape != p.mu.shape:
        raise ShapeError(f"KL between shapes {q.mu.shape} and {p.mu.shape}")
    var_q = q.log_var.exp()
    inv_var_p = (-p.log_var).exp()
    terms = (p.log_var - q.log_var + (var_q + (q.mu - p.mu).square()) * inv_var_p - 1.0) * 0.5
    return terms.sum(axis=-1)


def kl_standard_normal(q: GaussParams) -> Tensor:
    """KL(q || N(0, I)), summed over the last axis."""
    terms = (q.log_var.exp() + q.mu.square() - q.log_var - 1.0) * 0.5
    return terms.sum(axis=-1)


def gauss_logpdf(x: TensorLike, p: GaussParams) -> Tensor:
    """Elementwise log N(x; mu, exp(log_var))."""
    x = as_tensor(x)
    _check_finite(x, p.mu, p.log_var)
    return ((x - p.mu).square() * (-p.log_var).exp() + p.log_var + LOG_2PI) * -0.5


def bern_logpmf(x: TensorLike, prob: TensorLike) -> Tensor:
    """Elementwise log Bernoulli mass with the probability clamped away from 0 and 1."""
    x, prob = as_tensor(x), as_tensor(prob)
    _check_finite(x, prob)
    clamped = prob.clip(PROB_EPS, 1.0 - PROB_EPS)
    return x * clamped.log() + (1.0 - x) * (1.0 - clamped).log()
