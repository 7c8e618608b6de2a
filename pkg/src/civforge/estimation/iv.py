"""Conditional Wald / two-stage least squares estimators of the ACE."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..exceptions import ShapeError, WeakInstrumentError
from .ols import as_matrix, ols_fit, residualize

logger = logging.getLogger(__name__)

# |effect of the instrument on T| below this is treated as no instrument
MIN_DENOMINATOR = 1e-8

# Rule-of-thumb threshold for a weak first stage
WEAK_F = 10.0


def ace_error(estimate: float, truth: float) -> float:
    """Absolute error |estimate - truth|."""
    return abs(estimate - truth)


@dataclass
class EstimateResult:
    """An ACE estimate as numerator / denominator with diagnostics."""

    ace: float
    numerator: float
    denominator: float
    first_stage_f: float
    n: int
    epsilon_ace: Optional[float] = None
    method: str = "wald_civ"

    def __post_init__(self):
        if self.denominator == 0:
            raise WeakInstrumentError("an estimate cannot have a zero denominator")
        ratio = self.numerator / self.denominator
        if not math.isclose(self.ace, ratio, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"ace {self.ace} differs from numerator/denominator {ratio}")

    def with_truth(self, true_ace: Optional[float]) -> "EstimateResult":
        """Copy with epsilon_ace filled in (unchanged when truth is None)."""
        if true_ace is None:
            return self
        values = asdict(self)
        values["epsilon_ace"] = ace_error(self.ace, true_ace)
        return EstimateResult(**values)

    def scaled(self, factor: float) -> "EstimateResult":
        """Rescale the effect (numerator and ace) by a nonzero factor."""
        values = asdict(self)
        values["ace"] = self.ace * factor
        values["numerator"] = self.numerator * factor
        values["epsilon_ace"] = None
        return EstimateResult(**values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_rows(*arrays: np.ndarray) -> int:
    rows = {array.shape[0] for array in arrays}
    if len(rows) != 1:
        raise ShapeError(f"inconsistent row counts: {sorted(rows)}")
    return rows.pop()


def first_stage_f(s: np.ndarray, w: np.ndarray, t: np.ndarray) -> float:
    """
    F statistic for the instruments in the regression of t on [s, w].

    Compares the residual sum of squares with and without the instruments.
    """
    n, p = s.shape
    unrestricted = ols_fit(np.column_stack([s, w]), t)
    restricted_rss = float(np.sum(residualize(t, w) ** 2))
    dof = n - unrestricted.n_params
    if unrestricted.rss <= 0.0:
        return math.inf
    return ((restricted_rss - unrestricted.rss) / p) / (unrestricted.rss / dof)


def _projection_parts(s: np.ndarray, w: np.ndarray, t: np.ndarray, y: np.ndarray):
    """Numerator and denominator of the two-stage form after partialling out w."""
    t_hat = ols_fit(np.column_stack([s, w]), t).fitted
    t_hat_perp = residualize(t_hat, w)
    n = t.shape[0]
    return float(t_hat_perp @ y) / n, float(t_hat_perp @ t) / n


def two_stage_ace(
    s: np.ndarray, w: Optional[np.ndarray], t: np.ndarray, y: np.ndarray
) -> float:
    """
    2SLS coefficient of t: regress y on the first-stage fit and w.

    Computed in the partialled-out form, which equals the coefficient of the
    fitted treatment in ols([t_hat, w] -> y).
    """
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    s, w = as_matrix(s), as_matrix(w, t.shape[0])
    _check_rows(s, w, t, y)
    numerator, denominator = _projection_parts(s, w, t, y)
    if abs(denominator) < MIN_DENOMINATOR:
        raise WeakInstrumentError(f"first-stage effect {denominator:.3g} is numerically zero")
    return numerator / denominator


def wald_civ(
    s: np.ndarray,
    w: Optional[np.ndarray],
    t: np.ndarray,
    y: np.ndarray,
    true_ace: Optional[float] = None,
) -> EstimateResult:
    """
    Conditional IV estimate of the effect of t on y.

    For a single instrument the estimate is the ratio of the instrument's
    coefficient in ols([s, w] -> y) to its coefficient in ols([s, w] -> t).
    For several instruments the two-stage projection form is used; it reduces
    to the ratio when s has one column.

    Args:
        s: n x p instrument matrix (or vector), p >= 1
        w: n x q conditioning matrix; None or q = 0 for no conditioning
        t: Treatment (0/1 is used as numeric)
        y: Outcome
        true_ace: Ground truth, fills epsilon_ace when given

    Returns:
        EstimateResult

    Raises:
        ShapeError: Row counts differ or s has no columns
        WeakInstrumentError: |denominator| < MIN_DENOMINATOR
        RankDeficiencyError: From the underlying regressions
    """
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    s = as_matrix(s)
    w = as_matrix(w, t.shape[0])
    n = _check_rows(s, w, t, y)
    if s.shape[1] < 1:
        raise ShapeError("at least one instrument column is required")

    if s.shape[1] == 1:
        design = np.column_stack([s, w])
        numerator = float(ols_fit(design, y).coef[1])
        denominator = float(ols_fit(design, t).coef[1])
    else:
        numerator, denominator = _projection_parts(s, w, t, y)

    if abs(denominator) < MIN_DENOMINATOR:
        raise WeakInstrumentError(
            f"instrument has no detectable effect on the treatment (denominator {denominator:.3g})"
        )
    f_stat = first_stage_f(s, w, t)
    if f_stat < WEAK_F:
        logger.warning("weak first stage: F = %.2f < %.0f", f_stat, WEAK_F)

    result = EstimateResult(
        ace=numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        first_stage_f=f_stat,
        n=n,
    )
    return result.with_truth(true_ace)


def naive_ols_ace(
    t: np.ndarray, y: np.ndarray, true_ace: Optional[float] = None
) -> EstimateResult:
    """Coefficient of t in the regression of y on t alone."""
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = _check_rows(t.reshape(-1, 1), y.reshape(-1, 1))
    coef = float(ols_fit(t, y).coef[1])
    result = EstimateResult(
        ace=coef,
        numerator=coef,
        denominator=1.0,
        first_stage_f=math.nan,
        n=n,
        method="naive_ols",
    )
    return result.with_truth(true_ace)
