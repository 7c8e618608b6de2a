"""Dense feed-forward networks."""

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ShapeError
from .autograd import Tensor, as_tensor, parameter

# Registry of supported activations
ACTIVATIONS: Dict[str, Callable[[Tensor], Tensor]] = {
    "elu": Tensor.elu,
    "softplus": Tensor.softplus,
    "sigmoid": Tensor.sigmoid,
    "identity": Tensor.identity,
}


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class Layer:
    """Affine map followed by an activation: act(x @ weight + bias)."""

    weight: Tensor
    bias: Tensor
    activation: str = "identity"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"Unknown activation: {self.activation}. "
                f"Available: {', '.join(sorted(ACTIVATIONS))}"
            )
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match weight shape {self.weight.shape}"
            )

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    def __call__(self, inputs: Tensor) -> Tensor:
        return ACTIVATIONS[self.activation](inputs @ self.weight + self.bias)


class Mlp:
    """A stack of dense layers whose dimensions chain."""

    def __init__(self, layers: List[Layer]):
        if not layers:
            raise ShapeError("an Mlp needs at least one layer")
        for index, (left, right) in enumerate(zip(layers, layers[1:])):
            if left.out_dim != right.in_dim:
                raise ShapeError(
                    f"layer {index} outputs {left.out_dim} features "
                    f"but layer {index + 1} expects {right.in_dim}"
                )
        self.layers = layers

    @classmethod
    def build(
        cls,
        sizes: Sequence[int],
        rng: np.random.Generator,
        hidden_activation: str = "elu",
        output_activation: str = "identity",
    ) -> "Mlp":
        """
        Glorot-uniform initialised network with zero biases.

        Args:
            sizes: Layer widths from input to output, e.g. [6, 200, 200, 2]
            rng: Generator consumed in layer order
            hidden_activation: Activation of every layer but the last
            output_activation: Activation of the last layer
        """
        if len(sizes) < 2 or min(sizes) < 1:
            raise ShapeError(f"invalid layer sizes {list(sizes)}")
        layers = []
        for index, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
            last = index == len(sizes) - 2
            layers.append(
                Layer(
                    weight=parameter(glorot_uniform(fan_in, fan_out, rng)),
                    bias=parameter(np.zeros(fan_out)),
                    activation=output_activation if last else hidden_activation,
                )
            )
        return cls(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        """Named parameters, e.g. ``encoder_zt.layers.0.weight``."""
        named = []
        for index, layer in enumerate(self.layers):
            named.append((f"{prefix}layers.{index}.weight", layer.weight))
            named.append((f"{prefix}layers.{index}.bias", layer.bias))
        return named

    def __call__(self, inputs: Union[Tensor, np.ndarray]) -> Tensor:
        return mlp_forward(self, inputs)


def mlp_forward(net: Mlp, inputs: Union[Tensor, np.ndarray, Sequence[float]]) -> Tensor:
    """
    Apply the network to a vector or a batch of row vectors.

    Raises:
        ShapeError: Input width differs from the network's input dimension
        ValueError: Input contains NaN or infinity
    """
    x = as_tensor(inputs)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ShapeError(f"expected input width {net.in_dim}, got shape {tuple(x.shape)}")
    if not np.all(np.isfinite(x.data)):
        raise ValueError("non-finite values in network input")
    for layer in net.layers:
        x = layer(x)
    return x.reshape(-1) if single else x


def network_shapes(net: Mlp) -> List[Tuple[int, int]]:
    return [(layer.in_dim, layer.out_dim) for layer in net.layers]


def parameter_vector(nets: Sequence[Mlp]) -> np.ndarray:
    """All parameters flattened, for byte-level comparisons."""
    arrays = [tensor.data.ravel() for net in nets for _, tensor in net.parameters()]
    return np.concatenate(arrays) if arrays else np.empty(0)
