"""Ordinary least squares by QR decomposition."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import RankDeficiencyError, ShapeError

# Designs with a larger 2-norm condition number are rejected
CONDITION_LIMIT = 1e10


@dataclass
class OlsFit:
    """Coefficients (intercept first) with fitted values and residuals."""

    coef: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    @property
    def n_params(self) -> int:
        return self.coef.shape[0]


def as_matrix(values: Optional[np.ndarray], n: Optional[int] = None) -> np.ndarray:
    """Coerce None, a vector or a matrix to an n x k float matrix."""
    if values is None:
        if n is None:
            raise ShapeError("cannot infer the row count of an empty matrix")
        return np.empty((n, 0))
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise ShapeError(f"expected a vector or matrix, got shape {matrix.shape}")
    return matrix


def ols_fit(design: np.ndarray, target: np.ndarray, intercept: bool = True) -> OlsFit:
    """
    Least-squares fit of target on design.

    Args:
        design: n x k regressors (no constant column)
        target: Length-n response
        intercept: Prepend a constant column

    Returns:
        OlsFit with the intercept as coef[0] when requested

    Raises:
        ShapeError: Row counts differ
        RankDeficiencyError: n <= number of coefficients, or the design's
            condition number exceeds CONDITION_LIMIT
    """
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    x = as_matrix(design, target.shape[0])
    if x.shape[0] != target.shape[0]:
        raise ShapeError(f"design has {x.shape[0]} rows but target has {target.shape[0]}")
    if intercept:
        x = np.column_stack([np.ones(x.shape[0]), x])
    n, k = x.shape
    if k == 0:
        raise ShapeError("regression needs at least one column")
    if n <= k:
        raise RankDeficiencyError(f"{n} observations cannot identify {k} coefficients")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(target))):
        raise ValueError("non-finite values in regression inputs")

    condition = np.linalg.cond(x)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise RankDeficiencyError(
            f"design is rank deficient (condition number {condition:.3g} > {CONDITION_LIMIT:.0e})"
        )

    q, r = np.linalg.qr(x, mode="reduced")
    coef = np.linalg.solve(r, q.T @ target)
    fitted = x @ coef
    return OlsFit(coef=coef, fitted=fitted, residuals=target - fitted)


def ols(design: np.ndarray, target: np.ndarray, intercept: bool = True) -> np.ndarray:
    """Least-squares coefficients, intercept first."""
    return ols_fit(design, target, intercept=intercept).coef


def residualize(values: np.ndarray, controls: np.ndarray) -> np.ndarray:
    """Residuals of values after regressing on controls plus a constant."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    controls = as_matrix(controls, values.shape[0])
    if controls.shape[1] == 0:
        return values - values.mean()
    return ols_fit(controls, values).residuals
