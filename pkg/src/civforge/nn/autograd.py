"""Tape-based reverse-mode differentiation over float64 numpy arrays.

Every operation on a :class:`Tensor` that needs gradients records its inputs
and a closure mapping the output gradient to input gradients. ``backprop``
walks that record in reverse topological order.
"""

from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import GradientError, ShapeError

ArrayLike = Union["Tensor", np.ndarray, float, int]
GradFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_grad_enabled = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable recording inside the block (inference, extraction)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A float64 array that can record how it was computed."""

    __slots__ = ("data", "requires_grad", "recorded", "_parents", "_grad_fn")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: Tuple["Tensor", ...] = (),
        _grad_fn: Optional[GradFn] = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.recorded = _grad_enabled
        self._parents = _parents
        self._grad_fn = _grad_fn

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.item())

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        other = as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return _record(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
        )

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) + self

    def __neg__(self) -> "Tensor":
        return _record(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return self + (-as_tensor(other))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) + (-self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        other = as_tensor(other)
        a, b = self.data, other.data
        return _record(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
        )

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) * self

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        other = as_tensor(other)
        a, b = self.data, other.data
        return _record(
            a / b,
            (self, other),
            lambda g: (_unbroadcast(g / b, a.shape), _unbroadcast(-g * a / (b * b), b.shape)),
        )

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return as_tensor(other) / self

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        other = as_tensor(other)
        a, b = self.data, other.data
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
        return _record(a @ b, (self, other), lambda g: (g @ b.T, a.T @ g))

    def square(self) -> "Tensor":
        a = self.data
        return _record(a * a, (self,), lambda g: (2.0 * a * g,))

    # -- reductions -------------------------------------------------------

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape

        def grad_fn(g: np.ndarray):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return _record(self.data.sum(axis=axis, keepdims=keepdims), (self,), grad_fn)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- elementwise functions --------------------------------------------

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return _record(out, (self,), lambda g: (g * out,))

    def log(self) -> "Tensor":
        a = self.data
        return _record(np.log(a), (self,), lambda g: (g / a,))

    def elu(self) -> "Tensor":
        a = self.data
        negative = np.expm1(np.minimum(a, 0.0))
        out = np.where(a > 0, a, negative)
        return _record(out, (self,), lambda g: (g * np.where(a > 0, 1.0, negative + 1.0),))

    def softplus(self) -> "Tensor":
        a = self.data
        return _record(np.logaddexp(0.0, a), (self,), lambda g: (g * _sigmoid(a),))

    def sigmoid(self) -> "Tensor":
        out = _sigmoid(self.data)
        return _record(out, (self,), lambda g: (g * out * (1.0 - out),))

    def clip(self, lo: float, hi: float) -> "Tensor":
        a = self.data
        inside = (a >= lo) & (a <= hi)
        return _record(np.clip(a, lo, hi), (self,), lambda g: (g * inside,))

    def identity(self) -> "Tensor":
        return self

    # -- indexing ---------------------------------------------------------

    def reshape(self, *shape: int) -> "Tensor":
        original = self.shape
        return _record(self.data.reshape(shape), (self,), lambda g: (g.reshape(original),))

    def columns(self, start: int, stop: int) -> "Tensor":
        """Columns ``start:stop`` of a 2-D tensor."""
        shape = self.shape

        def grad_fn(g: np.ndarray):
            full = np.zeros(shape)
            full[:, start:stop] = g
            return (full,)

        return _record(self.data[:, start:stop], (self,), grad_fn)


def _sigmoid(a: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data) -> Tensor:
    """A leaf tensor that receives gradients."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def _record(data: np.ndarray, parents: Tuple[Tensor, ...], grad_fn: GradFn) -> Tensor:
    if _grad_enabled and any(parent.requires_grad for parent in parents):
        return Tensor(data, requires_grad=True, _parents=parents, _grad_fn=grad_fn)
    return Tensor(data)


def concat(tensors: Sequence[ArrayLike], axis: int = 1) -> Tensor:
    """Concatenate 2-D tensors along columns (or rows with axis=0)."""
    tensors = [as_tensor(tensor) for tensor in tensors]
    sizes = [tensor.shape[axis] for tensor in tensors]
    bounds = np.cumsum([0, *sizes])

    def grad_fn(g: np.ndarray):
        return tuple(
            np.take(g, np.arange(lo, hi), axis=axis) for lo, hi in zip(bounds, bounds[1:])
        )

    data = np.concatenate([tensor.data for tensor in tensors], axis=axis)
    return _record(data, tuple(tensors), grad_fn)


def _topological(loss: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        stack.extend((parent, False) for parent in node._parents if id(parent) not in visited)
    return order


def backprop(loss: Tensor, params: Sequence[Tensor]) -> List[np.ndarray]:
    """
    Gradients of a scalar loss with respect to ``params``.

    Args:
        loss: Scalar tensor built with recording enabled
        params: Leaf tensors to differentiate against

    Returns:
        One gradient array per parameter, same shape; zeros for parameters the
        loss does not depend on

    Raises:
        GradientError: The loss was computed under no_grad() or is not a scalar
    """
    if not isinstance(loss, Tensor) or not loss.recorded:
        raise GradientError("no recorded pass: the loss was computed with recording disabled")
    if loss.data.size != 1:
        raise GradientError(f"backprop needs a scalar loss, got shape {loss.shape}")

    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_topological(loss)):
        grad = grads.get(id(node))
        if grad is None or node._grad_fn is None:
            continue
        for parent, parent_grad in zip(node._parents, node._grad_fn(grad)):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = grads[key] + parent_grad if key in grads else parent_grad
    return [np.array(grads.get(id(p), np.zeros_like(p.data)), dtype=np.float64) for p in params]
