"""Adam optimizer."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..exceptions import GradientError, ShapeError
from .autograd import Tensor

NamedParameters = Sequence[Tuple[str, Tensor]]


@dataclass
class OptimizerState:
    """First/second moment accumulators keyed by parameter path."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("moment decay rates must lie in [0, 1)")


def adam_step(
    state: OptimizerState, params: NamedParameters, grads: Sequence[np.ndarray]
) -> OptimizerState:
    """
    One bias-corrected Adam update, applied to the parameters in place.

    Args:
        state: Optimizer state; its step counter is incremented
        params: (path, tensor) pairs
        grads: Gradients aligned with params

    Returns:
        The updated state

    Raises:
        ShapeError: Counts or shapes of params and grads differ
        GradientError: A gradient contains NaN or infinity
    """
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameters but {len(grads)} gradients")
    for (name, tensor), grad in zip(params, grads):
        if np.shape(grad) != tensor.shape:
            raise ShapeError(
                f"gradient for {name} has shape {np.shape(grad)}, expected {tensor.shape}"
            )
        if not np.all(np.isfinite(grad)):
            raise GradientError(f"non-finite gradient for {name}")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for (name, tensor), grad in zip(params, grads):
        m = state.m.get(name, np.zeros_like(tensor.data))
        v = state.v.get(name, np.zeros_like(tensor.data))
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.m[name], state.v[name] = m, v
        m_hat = m / correction1
        v_hat = v / correction2
        tensor.data = tensor.data - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


class AdamOptimizer:
    """Adam over a fixed list of named parameters."""

    def __init__(self, params: NamedParameters, learning_rate: float = 0.001, **kwargs):
        self.params: List[Tuple[str, Tensor]] = list(params)
        self.state = OptimizerState(learning_rate=learning_rate, **kwargs)

    @property
    def tensors(self) -> List[Tensor]:
        return [tensor for _, tensor in self.params]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        adam_step(self.state, self.params, grads)
