"""JSON checkpoint container for named networks.

See docs/CHECKPOINT_FORMAT.md for the layout.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from ..exceptions import CheckpointError
from .autograd import parameter
from .layers import ACTIVATIONS, Layer, Mlp

FORMAT_NAME = "civforge-checkpoint"
FORMAT_VERSION = 1


def _encode_network(net: Mlp) -> Dict[str, Any]:
    return {
        "layers": [
            {
                "in": layer.in_dim,
                "out": layer.out_dim,
                "activation": layer.activation,
                # Row-major; json writes the shortest repr that reloads exactly
                "weight": layer.weight.data.ravel(order="C").tolist(),
                "bias": layer.bias.data.tolist(),
            }
            for layer in net.layers
        ]
    }


def _decode_network(name: str, payload: Dict[str, Any]) -> Mlp:
    layers = []
    for index, entry in enumerate(payload.get("layers", [])):
        where = f"{name}.layers.{index}"
        try:
            rows, cols = int(entry["in"]), int(entry["out"])
            weight = np.asarray(entry["weight"], dtype=np.float64)
            bias = np.asarray(entry["bias"], dtype=np.float64)
            activation = entry["activation"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"{where}: malformed layer entry ({exc})")
        if activation not in ACTIVATIONS:
            raise CheckpointError(f"{where}: unknown activation {activation}")
        if weight.size != rows * cols or bias.shape != (cols,):
            raise CheckpointError(
                f"{where}: expected {rows}x{cols} weights and {cols} biases, "
                f"found {weight.size} and {bias.size}"
            )
        if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
            raise CheckpointError(f"{where}: non-finite parameter values")
        layers.append(
            Layer(
                weight=parameter(weight.reshape(rows, cols)),
                bias=parameter(bias),
                activation=activation,
            )
        )
    if not layers:
        raise CheckpointError(f"network {name} has no layers")
    return Mlp(layers)


def save_checkpoint(
    path: Union[str, Path], networks: Dict[str, Mlp], header: Dict[str, Any]
) -> Path:
    """
    Write networks and a header to a JSON checkpoint.

    Args:
        path: Output file
        networks: Networks by name; written in sorted name order
        header: JSON-serialisable metadata (config, transforms, ...)

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "header": header,
        "networks": {name: _encode_network(networks[name]) for name in sorted(networks)},
    }
    for name in document["networks"]:
        for layer in document["networks"][name]["layers"]:
            if not all(math.isfinite(value) for value in layer["weight"] + layer["bias"]):
                raise CheckpointError(f"refusing to save non-finite parameters in {name}")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=1)
        handle.write("\n")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, Mlp]]:
    """
    Read a checkpoint written by save_checkpoint.

    Returns:
        (header, networks by name)

    Raises:
        CheckpointError: Wrong format tag, unsupported version or malformed layers
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint {path} does not exist")
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint {path} is not valid JSON: {exc}")

    if not isinstance(document, dict) or document.get("format") != FORMAT_NAME:
        raise CheckpointError(f"{path} is not a {FORMAT_NAME} file")
    if document.get("version") != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {document.get('version')} (expected {FORMAT_VERSION})"
        )
    networks = {
        name: _decode_network(name, payload)
        for name, payload in document.get("networks", {}).items()
    }
    return document.get("header", {}), networks
