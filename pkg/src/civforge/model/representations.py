"""Representation extraction and the downstream ACE estimate."""

from typing import Optional, Tuple

import numpy as np

from ..data.dataset import Dataset
from ..data.transforms import TransformRecord
from ..estimation import EstimateResult, wald_civ
from ..exceptions import ShapeError
from ..nn import gauss_reparam, no_grad
from .network import NOISE_STREAM, CivVaeModel, stream_rng


def extract_representations(
    model: CivVaeModel,
    x: np.ndarray,
    sample: Optional[bool] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Z_T from the encoder q(Z_T|X) and Z_C from the conditional prior p(Z_C|X).

    Args:
        model: Trained model
        x: Standardized covariate matrix (n x d)
        sample: Draw from the distributions instead of taking their means
            (defaults to config.sample_representations)
        rng: Generator for sampled extraction (defaults to the model's noise stream)

    Returns:
        (z_t of shape n x dim_zt, z_c of shape n x dim_zc)

    Raises:
        ShapeError: x has the wrong number of columns
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.x_dim:
        raise ShapeError(f"expected {model.x_dim} covariate columns, got shape {x.shape}")
    if sample is None:
        sample = model.config.sample_representations

    with no_grad():
        q_zt, _, p_zc = model.encode(x)
        if not sample:
            return q_zt.mu.numpy(), p_zc.mu.numpy()
        rng = rng or stream_rng(model.config.seed, NOISE_STREAM)
        z_t = gauss_reparam(q_zt, rng.standard_normal(q_zt.mu.shape))
        z_c = gauss_reparam(p_zc, rng.standard_normal(p_zc.mu.shape))
        return z_t.numpy(), z_c.numpy()


def estimate_ace(
    model: CivVaeModel,
    dataset: Dataset,
    transform: Optional[TransformRecord] = None,
    sample: Optional[bool] = None,
    rng: Optional[np.random.Generator] = None,
) -> EstimateResult:
    """
    ACE with Z_T as the conditional instrument and Z_C as its conditioning set.

    Args:
        model: Trained model
        dataset: Data on the original scale
        transform: Standardization used in training; the effect is converted
            back to outcome units with it
        sample: Sampled instead of mean representations

    Returns:
        EstimateResult in outcome units, with epsilon_ace when the dataset
        carries a true ACE
    """
    transform = transform or TransformRecord()
    standardized = transform.apply(dataset)
    z_t, z_c = extract_representations(model, standardized.x, sample=sample, rng=rng)
    result = wald_civ(z_t, z_c, standardized.t, standardized.y)
    return result.scaled(transform.scale_effect(1.0)).with_truth(dataset.true_ace)
