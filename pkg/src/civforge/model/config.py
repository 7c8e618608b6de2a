"""CIV.VAE hyperparameters."""

from typing import List, Literal

from pydantic import BaseModel, Field, field_validator

from ..data.dataset import ColumnKind, Dataset

LikelihoodKind = Literal["continuous", "binary"]


class CivVaeConfig(BaseModel):
    """
    Model and training settings.

    Defaults follow the simulated-data setup (dim_zc=3); use for_real_data()
    for the two-dimensional conditioning representation.
    """

    dim_zt: int = Field(default=1, ge=1, description="Width of the instrument representation")
    dim_zc: int = Field(default=3, ge=1, description="Width of the conditioning representation")
    hidden_dim: int = Field(default=200, ge=1)
    hidden_layers: int = Field(default=2, ge=1)
    epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=256, ge=1)
    learning_rate: float = Field(default=0.001, gt=0)
    alpha: float = Field(default=1.0, ge=0, description="Weight of the treatment predictor")
    beta: float = Field(default=1.0, ge=0, description="Weight of the outcome predictor")
    outcome_kind: LikelihoodKind = "continuous"
    x_kinds: List[LikelihoodKind] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0)
    mc_samples: int = Field(default=1, ge=1)

    # Auxiliary predictors reuse the generative treatment/outcome heads
    share_predictors: bool = False
    # Add log p(T|Z_T,Z_C) and log p(Y|T,Z_C) to the evidence term
    generative_ty: bool = False
    # Draw representations instead of using distribution means
    sample_representations: bool = False

    @field_validator("x_kinds", mode="before")
    @classmethod
    def _categorical_is_expanded(cls, value):
        if isinstance(value, (list, tuple)) and ColumnKind.CATEGORICAL.value in value:
            raise ValueError("categorical columns must be one-hot encoded before training")
        return value

    @classmethod
    def for_simulation(cls, **overrides) -> "CivVaeConfig":
        return cls(**{"dim_zt": 1, "dim_zc": 3, **overrides})

    @classmethod
    def for_real_data(cls, **overrides) -> "CivVaeConfig":
        return cls(**{"dim_zt": 1, "dim_zc": 2, **overrides})

    def for_dataset(self, dataset: Dataset) -> "CivVaeConfig":
        """Copy with the likelihood kinds taken from a dataset."""
        return self.model_copy(
            update={"x_kinds": list(dataset.x_kinds), "outcome_kind": dataset.outcome_kind}
        )
