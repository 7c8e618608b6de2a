"""Seeded sampling from an ScmSpec."""

import logging
from typing import Dict

import numpy as np

from ..data.dataset import Dataset
from ..exceptions import SimulationError
from .scm import COVARIATES, LATENTS, VARIABLE_ORDER, ScmSpec

logger = logging.getLogger(__name__)

# Spawn-key namespace of the per-variable streams; model streams use 1
DATA_STREAMS = 0


def variable_rng(seed: int, name: str) -> np.random.Generator:
    """
    Independent PCG64 stream for one variable.

    The stream key is the variable's index in VARIABLE_ORDER, so adding a
    draw to one variable never shifts the values of another.
    """
    key = VARIABLE_ORDER.index(name)
    sequence = np.random.SeedSequence(seed, spawn_key=(DATA_STREAMS, key))
    return np.random.Generator(np.random.PCG64(sequence))


def _logistic(values: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-values))


def generate(
    spec: ScmSpec, n: int, seed: int, keep_latents: bool = False
) -> Dataset:
    """
    Sample n units from the structural equations.

    Args:
        spec: Coefficients and noise scales
        n: Sample size (at least 2)
        seed: Base seed; identical (spec, n, seed) gives identical output
        keep_latents: Attach U, U1..U4 to the returned dataset

    Returns:
        Dataset with covariates S, X1..X5, binary T, continuous Y and
        true_ace set from the outcome equation

    Raises:
        SimulationError: n < 2 or a malformed/non-finite spec
    """
    if n < 2:
        raise SimulationError(f"sample size must be at least 2, got {n}")
    spec.check()

    values: Dict[str, np.ndarray] = {}
    for name in VARIABLE_ORDER:
        rng = variable_rng(seed, name)
        if name == "T":
            logit = spec.treatment_intercept + sum(
                weight * values[source] for source, weight in spec.treatment_weights.items()
            )
            values[name] = (rng.random(n) < _logistic(logit)).astype(np.float64)
            continue

        value = np.full(n, spec.intercepts.get(name, 0.0))
        if name in spec.base_noise:
            value = value + spec.scale(spec.base_noise[name]) * rng.standard_normal(n)
        for source, coef in spec.coefficients.get(name, {}).items():
            value = value + coef * values[source]
        if name in spec.extra_noise:
            value = value + spec.scale(spec.extra_noise[name]) * rng.standard_normal(n)
        if name == "Y":
            value = value + spec.scale(spec.outcome_noise) * rng.standard_normal(n)
        values[name] = value

    logger.debug("generated n=%d seed=%d treated=%.3f", n, seed, values["T"].mean())
    return Dataset(
        x=np.column_stack([values[name] for name in COVARIATES]),
        columns=list(COVARIATES),
        t=values["T"],
        y=values["Y"],
        true_ace=true_ace(spec),
        provenance=f"simulation spec={spec.spec_id} n={n} seed={seed}",
        latents={name: values[name] for name in LATENTS} if keep_latents else None,
    )


def true_ace(spec: ScmSpec) -> float:
    """The coefficient of T in the outcome equation."""
    return spec.true_ace
