"""Least squares and instrumental-variable effect estimators."""

from .iv import (
    MIN_DENOMINATOR,
    WEAK_F,
    EstimateResult,
    ace_error,
    first_stage_f,
    naive_ols_ace,
    two_stage_ace,
    wald_civ,
)
from .ols import CONDITION_LIMIT, OlsFit, ols, ols_fit, residualize

__all__ = [
    "CONDITION_LIMIT",
    "MIN_DENOMINATOR",
    "WEAK_F",
    "EstimateResult",
    "OlsFit",
    "ace_error",
    "first_stage_f",
    "naive_ols_ace",
    "ols",
    "ols_fit",
    "residualize",
    "two_stage_ace",
    "wald_civ",
]
