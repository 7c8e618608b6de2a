"""The CIV.VAE representation model."""

from .config import CivVaeConfig
from .network import (
    OUTCOME_NETWORKS,
    VARIANCE_FLOOR,
    CivVaeModel,
    OutcomeHead,
    init_model,
    network_layout,
    stream_rng,
)
from .objective import LossBreakdown, NoiseDraw, compute_objective, objective
from .representations import estimate_ace, extract_representations
from .trainer import CivVaeTrainer, fit_civvae, load_model, train

__all__ = [
    "OUTCOME_NETWORKS",
    "VARIANCE_FLOOR",
    "CivVaeConfig",
    "CivVaeModel",
    "CivVaeTrainer",
    "LossBreakdown",
    "NoiseDraw",
    "OutcomeHead",
    "compute_objective",
    "estimate_ace",
    "extract_representations",
    "fit_civvae",
    "init_model",
    "load_model",
    "network_layout",
    "objective",
    "stream_rng",
    "train",
]
