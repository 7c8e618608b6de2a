"""Synthetic data from the linear simulation model."""

from .generator import generate, true_ace, variable_rng
from .scm import COVARIATES, LATENTS, VARIABLE_ORDER, ScmSpec

__all__ = [
    "COVARIATES",
    "LATENTS",
    "VARIABLE_ORDER",
    "ScmSpec",
    "generate",
    "true_ace",
    "variable_rng",
]
