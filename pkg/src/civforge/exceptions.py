"""Exception types raised across civforge.

All of them derive from ValueError so callers that only care about "bad input"
can catch a single type.
"""

from typing import Any, Dict, List, Optional


class GraphError(ValueError):
    """Invalid graph description or graph query."""


class GraphSyntaxError(GraphError):
    """A graph file statement could not be parsed."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CycleError(GraphError):
    """The declared edges contain a directed cycle."""

    def __init__(self, cycle: List[str]):
        super().__init__(f"cycle detected: {' -> '.join(cycle)}")
        self.cycle = cycle


class CivConditionError(GraphError):
    """Arguments to a conditional-IV query violate its preconditions."""


class SimulationError(ValueError):
    """Invalid structural model specification or sample request."""


class ShapeError(ValueError):
    """Array dimensions do not line up."""


class GradientError(ValueError):
    """Reverse-mode differentiation or optimizer failure."""


class TrainingDivergedError(ValueError):
    """The training loss became non-finite."""

    def __init__(self, epoch: int, batch: int, breakdown: Optional[Dict[str, Any]] = None):
        detail = f" ({breakdown})" if breakdown else ""
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}{detail}")
        self.epoch = epoch
        self.batch = batch
        self.breakdown = breakdown or {}


class RankDeficiencyError(ValueError):
    """A regression design is rank deficient or under-determined."""


class WeakInstrumentError(ValueError):
    """The instrument has (numerically) no effect on the treatment."""


class SchemaError(ValueError):
    """A dataset does not match its schema."""


class BenchmarkConfigError(ValueError):
    """An experiment configuration is invalid."""


class CheckpointError(ValueError):
    """A checkpoint file is malformed or does not match the model."""


class NonFiniteLossError(GradientError):
    """The objective evaluated to NaN or infinity."""

    def __init__(self, breakdown: Dict[str, Any]):
        super().__init__(f"non-finite loss: {breakdown}")
        self.breakdown = breakdown
