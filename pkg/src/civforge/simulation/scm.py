"""Linear structural causal model template for the simulated benchmark."""

import math
from typing import Dict, List

from pydantic import BaseModel, Field

from ..exceptions import SimulationError

LATENTS: List[str] = ["U", "U1", "U2", "U3", "U4"]
COVARIATES: List[str] = ["S", "X1", "X2", "X3", "X4", "X5"]

# Generation order; the index of a variable here is also its random stream key
VARIABLE_ORDER: List[str] = [*LATENTS, "X1", "X2", "X3", "S", "X4", "X5", "T", "Y"]


def _default_coefficients() -> Dict[str, Dict[str, float]]:
    return {
        "X1": {"U2": 0.5},
        "X2": {"U3": 0.5},
        "X3": {"U4": 0.5},
        "S": {"U1": 2.0, "X1": 1.5, "X2": 1.5},
        "Y": {"T": 2.0, "U": 2.0, "U3": 2.0, "U4": 2.0, "X4": 1.0, "X5": 1.0},
    }


class ScmSpec(BaseModel):
    """
    Coefficients and noise scales of the simulation equations.

    Every non-treatment variable V is generated as::

        V = intercepts[V] + base[V] * N(0, 1) + sum(coef * source) + extra[V] * N(0, 1)

    and the treatment as Bernoulli(logistic(treatment_intercept + sum(w * source))).
    Noise parameters are standard deviations unless ``second_param_is_sd`` is
    False, in which case they are variances.
    """

    spec_id: str = "default"
    intercepts: Dict[str, float] = Field(
        default_factory=lambda: {"X4": 1.0, "X5": 3.0, "Y": 2.0}
    )
    base_noise: Dict[str, float] = Field(
        default_factory=lambda: {
            name: 1.0 for name in [*LATENTS, "X1", "X2", "X3", "S", "X4", "X5"]
        }
    )
    extra_noise: Dict[str, float] = Field(
        default_factory=lambda: {"X1": 0.5, "X2": 0.5, "X3": 0.5, "S": 0.5}
    )
    coefficients: Dict[str, Dict[str, float]] = Field(default_factory=_default_coefficients)
    treatment_intercept: float = -2.0
    treatment_weights: Dict[str, float] = Field(
        default_factory=lambda: {"U": 1.0, "U1": 1.0, "X3": 1.0}
    )
    outcome_noise: float = 1.0
    second_param_is_sd: bool = True

    @property
    def true_ace(self) -> float:
        return self.coefficients.get("Y", {}).get("T", 0.0)

    def scale(self, param: float) -> float:
        """Convert a noise parameter to a standard deviation."""
        return param if self.second_param_is_sd else math.sqrt(param)

    def with_coefficient(self, target: str, source: str, value: float) -> "ScmSpec":
        """
        Copy of this spec with one edge weight changed.

        ``target == "T"`` edits the treatment logit weights.
        """
        if target == "T":
            weights = dict(self.treatment_weights)
            weights[source] = value
            spec = self.model_copy(update={"treatment_weights": weights})
        else:
            coefficients = {key: dict(row) for key, row in self.coefficients.items()}
            coefficients.setdefault(target, {})[source] = value
            spec = self.model_copy(update={"coefficients": coefficients})
        spec.check()
        return spec

    def check(self) -> None:
        """
        Validate the template structure and that every number is finite.

        Raises:
            SimulationError: Unknown variable, an edge against generation order,
                a negative noise parameter or a non-finite value
        """
        position = {name: index for index, name in enumerate(VARIABLE_ORDER)}
        edges = [
            (target, source, coef)
            for target, row in self.coefficients.items()
            for source, coef in row.items()
        ]
        edges += [("T", source, w) for source, w in self.treatment_weights.items()]
        for target, source, coef in edges:
            for name in (target, source):
                if name not in position:
                    raise SimulationError(
                        f"unknown variable {name} in coefficient {target}<-{source}"
                    )
            if position[source] >= position[target]:
                raise SimulationError(
                    f"coefficient {target}<-{source} goes against the generation order"
                )
            if not math.isfinite(coef):
                raise SimulationError(f"non-finite coefficient {target}<-{source}: {coef}")
        scalars = {
            "treatment_intercept": self.treatment_intercept,
            "outcome_noise": self.outcome_noise,
        }
        for table in ("intercepts", "base_noise", "extra_noise"):
            for name, value in getattr(self, table).items():
                if name not in position:
                    raise SimulationError(f"unknown variable {name} in {table}")
                scalars[f"{table}[{name}]"] = value
        for label, value in scalars.items():
            if not math.isfinite(value):
                raise SimulationError(f"non-finite value for {label}: {value}")
            if ("noise" in label) and value < 0:
                raise SimulationError(f"noise parameter {label} must be >= 0, got {value}")
