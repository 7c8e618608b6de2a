"""Column standardization with an invertible record."""

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import SchemaError
from .dataset import ColumnKind, Dataset

# Standard deviations at or below this are treated as zero variance
_MIN_SD = 1e-12


@dataclass
class TransformRecord:
    """Means and standard deviations used to z-score a dataset."""

    means: Dict[str, float] = field(default_factory=dict)
    sds: Dict[str, float] = field(default_factory=dict)
    outcome_mean: float = 0.0
    outcome_sd: float = 1.0
    outcome_standardized: bool = False

    def apply(self, dataset: Dataset) -> Dataset:
        """Standardize new data with the stored statistics."""
        x = dataset.x.copy()
        for name, mean in self.means.items():
            if name not in dataset.columns:
                raise SchemaError(f"column {name} recorded in the transform is missing")
            index = dataset.columns.index(name)
            x[:, index] = (x[:, index] - mean) / self.sds[name]
        y = dataset.y
        if self.outcome_standardized:
            y = (y - self.outcome_mean) / self.outcome_sd
        return replace(dataset, x=x, y=y)

    def unstandardize(self, dataset: Dataset) -> Dataset:
        """Invert apply()."""
        x = dataset.x.copy()
        for name, mean in self.means.items():
            index = dataset.columns.index(name)
            x[:, index] = x[:, index] * self.sds[name] + mean
        y = dataset.y
        if self.outcome_standardized:
            y = y * self.outcome_sd + self.outcome_mean
        return replace(dataset, x=x, y=y)

    def scale_effect(self, ace: float) -> float:
        """Convert an effect on the standardized outcome back to outcome units."""
        return ace * self.outcome_sd if self.outcome_standardized else ace

    def to_dict(self) -> dict:
        return {
            "means": dict(self.means),
            "sds": dict(self.sds),
            "outcome_mean": self.outcome_mean,
            "outcome_sd": self.outcome_sd,
            "outcome_standardized": self.outcome_standardized,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TransformRecord":
        return cls(
            means={k: float(v) for k, v in payload.get("means", {}).items()},
            sds={k: float(v) for k, v in payload.get("sds", {}).items()},
            outcome_mean=float(payload.get("outcome_mean", 0.0)),
            outcome_sd=float(payload.get("outcome_sd", 1.0)),
            outcome_standardized=bool(payload.get("outcome_standardized", False)),
        )


def _moments(values: np.ndarray, name: str) -> Tuple[float, float]:
    mean = float(np.mean(values))
    sd = float(np.std(values))
    if sd <= _MIN_SD:
        raise SchemaError(f"column {name} has zero variance and cannot be standardized")
    return mean, sd


def standardize(
    dataset: Dataset, record: Optional[TransformRecord] = None
) -> Tuple[Dataset, TransformRecord]:
    """
    Z-score continuous covariates and a continuous outcome.

    Binary columns and the treatment are left untouched. Standard deviations
    use the population convention (ddof=0).

    Args:
        dataset: Dataset to transform
        record: Existing statistics to reuse instead of estimating new ones

    Returns:
        The standardized dataset and the record that inverts it

    Raises:
        SchemaError: A continuous column has zero variance
    """
    if record is not None:
        return record.apply(dataset), record

    record = TransformRecord()
    for index, (name, kind) in enumerate(zip(dataset.columns, dataset.x_kinds)):
        if kind == ColumnKind.CONTINUOUS.value:
            record.means[name], record.sds[name] = _moments(dataset.x[:, index], name)
    if dataset.outcome_kind == ColumnKind.CONTINUOUS.value:
        record.outcome_mean, record.outcome_sd = _moments(dataset.y, dataset.outcome_name)
        record.outcome_standardized = True
    return record.apply(dataset), record
