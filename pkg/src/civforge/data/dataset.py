"""In-memory dataset container shared by the generator, loader and model."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..exceptions import SchemaError


class ColumnKind(str, Enum):
    """Likelihood family of a column."""

    CONTINUOUS = "continuous"
    BINARY = "binary"
    CATEGORICAL = "categorical"  # schema-level only; expanded to binary on load


@dataclass
class Dataset:
    """Covariates X, binary treatment T and outcome Y for n units."""

    x: np.ndarray
    columns: List[str]
    t: np.ndarray
    y: np.ndarray
    x_kinds: List[str] = field(default_factory=list)
    outcome_kind: str = ColumnKind.CONTINUOUS.value
    true_ace: Optional[float] = None
    provenance: str = ""
    treatment_name: str = "T"
    outcome_name: str = "Y"
    # Only filled for simulated data when latents are requested
    latents: Optional[Dict[str, np.ndarray]] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        self.y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if self.x.ndim != 2:
            raise SchemaError(f"covariate matrix must be 2-D, got shape {self.x.shape}")
        if not self.x_kinds:
            self.x_kinds = [ColumnKind.CONTINUOUS.value] * self.x.shape[1]
        n = self.x.shape[0]
        if len(self.columns) != self.x.shape[1] or len(self.x_kinds) != self.x.shape[1]:
            raise SchemaError(
                f"{self.x.shape[1]} covariate columns but {len(self.columns)} names "
                f"and {len(self.x_kinds)} kinds"
            )
        if self.t.shape[0] != n or self.y.shape[0] != n:
            raise SchemaError(
                f"column lengths differ: x has {n} rows, t {self.t.shape[0]}, y {self.y.shape[0]}"
            )
        if not np.all(np.isin(self.t, (0.0, 1.0))):
            raise SchemaError("treatment must be coded 0/1")
        for name, values in (("x", self.x), ("t", self.t), ("y", self.y)):
            if not np.all(np.isfinite(values)):
                raise SchemaError(f"missing or non-finite values in {name}")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def column(self, name: str) -> np.ndarray:
        """A covariate, treatment or outcome column by name."""
        if name == self.treatment_name:
            return self.t
        if name == self.outcome_name:
            return self.y
        try:
            return self.x[:, self.columns.index(name)]
        except ValueError:
            raise SchemaError(f"unknown column {name}")

    def columns_matrix(self, names: List[str]) -> np.ndarray:
        """Stack named columns into an n x len(names) matrix."""
        if not names:
            return np.empty((self.n, 0))
        return np.column_stack([self.column(name) for name in names])

    def subset(self, rows: np.ndarray) -> "Dataset":
        """Row subset (used for mini-batches)."""
        latents = None
        if self.latents is not None:
            latents = {name: values[rows] for name, values in self.latents.items()}
        return replace(self, x=self.x[rows], t=self.t[rows], y=self.y[rows], latents=latents)

    def to_frame(self) -> pd.DataFrame:
        """Covariates followed by treatment and outcome."""
        frame = pd.DataFrame(self.x, columns=self.columns)
        frame[self.treatment_name] = self.t
        frame[self.outcome_name] = self.y
        return frame
