"""Dense float64 tensors with reverse-mode automatic differentiation

Every model equation is composed from the functions at the bottom of this
module. Graphs are dynamic: each call records a Function node on its output,
and ``backward`` walks the nodes reachable from a scalar loss once, in
reverse creation order.
"""

import itertools
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp, softmax

from fauforensics.errors import DimensionError, LabelError, NumericDomainError, UsageError

logger = logging.getLogger(__name__)

DTYPE = np.float64

ArrayLike = Union[np.ndarray, float, int, Sequence[float], Sequence[Sequence[float]]]

_creation_counter = itertools.count()


class Tensor:
    """
    N-dimensional float64 array with optional gradient tracking

    Leaf tensors (parameters, inputs) have no creator node; tensors produced
    by an operation keep a reference to the Function that made them.
    """

    __slots__ = ('data', 'requires_grad', 'grad', 'name', '_node', '_consumed')

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._node: Optional['Function'] = None
        self._consumed = False

    @classmethod
    def _from_node(cls, data: np.ndarray, node: Optional['Function']) -> 'Tensor':
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = node is not None
        out.grad = None
        out.name = None
        out._node = node
        out._consumed = False
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def item(self) -> float:
        if self.data.size != 1:
            raise UsageError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=DTYPE).reshape(self.shape)
        else:
            self.grad += grad.reshape(self.shape)

    def backward(self) -> None:
        backward(self)

    def __matmul__(self, other: 'Tensor') -> 'Tensor':
        return matmul(self, other)

    def __add__(self, other: 'Tensor') -> 'Tensor':
        return add(self, other)

    def __mul__(self, other: Union['Tensor', float]) -> 'Tensor':
        if isinstance(other, Tensor):
            return mul(self, other)
        return mul_const(self, float(other))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{flag}{label})"


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class Function:
    """
    A recorded operation: its inputs, saved activations and creation order

    Subclasses implement ``forward`` on raw arrays and ``backward`` that maps
    the gradient of the output to one gradient per input (None when an input
    needs none).
    """

    def __init__(self, *inputs: Tensor):
        self.inputs = inputs
        self.saved: tuple = ()
        self.order = next(_creation_counter)
        self.consumed = False

    def forward(self, *arrays: np.ndarray, **kwargs) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs) -> Tensor:
        fn = cls(*inputs)
        out = fn.forward(*(t.data for t in inputs), **kwargs)
        if any(t.requires_grad for t in inputs):
            return Tensor._from_node(out, fn)
        return Tensor._from_node(out, None)


class Graph:
    """Nodes reachable from a root tensor, in creation (topological) order"""

    def __init__(self, root: Tensor):
        self.root = root
        self.nodes: List[Function] = []
        if root._node is None:
            return
        seen = set()
        stack = [root._node]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            self.nodes.append(node)
            for inp in node.inputs:
                if inp._node is not None and id(inp._node) not in seen:
                    stack.append(inp._node)
        self.nodes.sort(key=lambda n: n.order)

    def backward(self, seed: np.ndarray) -> None:
        if self.root._consumed or any(node.consumed for node in self.nodes):
            raise UsageError("Graph already consumed by a previous backward(); run forward again")
        self.root._consumed = True
        if not self.nodes:
            self.root._accumulate(seed)
            return

        pending: Dict[int, np.ndarray] = {id(self.root._node): seed}
        for node in reversed(self.nodes):
            grad = pending.pop(id(node), None)
            node.consumed = True
            if grad is None:
                node.saved = ()
                continue
            input_grads = node.backward(grad)
            node.saved = ()
            for inp, g in zip(node.inputs, input_grads):
                if g is None or not inp.requires_grad:
                    continue
                if inp._node is None:
                    inp._accumulate(g)
                else:
                    key = id(inp._node)
                    if key in pending:
                        pending[key] = pending[key] + g
                    else:
                        pending[key] = g
        logger.debug(f"Backward visited {len(self.nodes)} nodes")


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable requires_grad leaf"""
    if loss.size != 1:
        raise UsageError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise UsageError("backward() called on a tensor that does not require gradients")
    Graph(loss).backward(np.ones_like(loss.data))


def finite_diff_grad(f: Callable[[], float], theta: Tensor, h: float = 1e-5) -> np.ndarray:
    """
    Central-difference gradient of a scalar function of theta's buffer

    f is re-evaluated with theta.data perturbed in place; the buffer is
    restored bit-exactly after each coordinate.
    """
    return finite_diff_coords(f, theta, range(theta.size), h)


def finite_diff_coords(f: Callable[[], float], theta: Tensor, coords, h: float = 1e-5) -> np.ndarray:
    """Central differences restricted to the given flat coordinates"""
    if h <= 0:
        raise UsageError(f"Finite-difference step must be positive, got {h}")
    coords = list(coords)
    flat = theta.data.reshape(-1)
    grad = np.zeros(len(coords), dtype=DTYPE)
    for i, idx in enumerate(coords):
        original = flat[idx]
        flat[idx] = original + h
        f_plus = f()
        flat[idx] = original - h
        f_minus = f()
        flat[idx] = original
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    if len(coords) == theta.size and coords == list(range(theta.size)):
        return grad.reshape(theta.shape)
    return grad


def _require_2d(name: str, x: np.ndarray) -> None:
    if x.ndim != 2:
        raise DimensionError(f"{name} expects a 2-D tensor, got shape {x.shape}")


def _require_finite(name: str, x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise NumericDomainError(f"{name} received non-finite values")


class MatMul(Function):
    def forward(self, a, b):
        _require_2d('matmul', a)
        _require_2d('matmul', b)
        if a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
        self.saved = (a, b)
        return a @ b

    def backward(self, grad):
        a, b = self.saved
        return grad @ b.T, a.T @ grad


class Add(Function):
    def forward(self, a, b):
        if a.shape != b.shape:
            raise DimensionError(f"add shape mismatch: {a.shape} + {b.shape}")
        return a + b

    def backward(self, grad):
        return grad, grad


class Mul(Function):
    def forward(self, a, b):
        if a.shape != b.shape:
            raise DimensionError(f"mul shape mismatch: {a.shape} * {b.shape}")
        self.saved = (a, b)
        return a * b

    def backward(self, grad):
        a, b = self.saved
        return grad * b, grad * a


class MulConst(Function):
    def forward(self, x, c):
        self.saved = (c,)
        return x * c

    def backward(self, grad):
        (c,) = self.saved
        return (grad * c,)


class Scale(Function):
    def forward(self, x, s):
        if s.size != 1:
            raise DimensionError(f"scale factor must be a single value, got shape {s.shape}")
        self.saved = (x, s)
        return x * s.reshape(())

    def backward(self, grad):
        x, s = self.saved
        return grad * s.reshape(()), np.array(np.sum(grad * x)).reshape(s.shape)


class SoftmaxRows(Function):
    def forward(self, x):
        _require_2d('softmax_rows', x)
        _require_finite('softmax_rows', x)
        y = softmax(x, axis=1)
        self.saved = (y,)
        return y

    def backward(self, grad):
        (y,) = self.saved
        dot = np.sum(grad * y, axis=1, keepdims=True)
        return (y * (grad - dot),)


class Linear(Function):
    def forward(self, x, w, b):
        _require_2d('linear weight', w)
        if x.ndim not in (1, 2):
            raise DimensionError(f"linear expects a 1-D or 2-D input, got shape {x.shape}")
        if x.shape[-1] != w.shape[0]:
            raise DimensionError(f"linear shape mismatch: input {x.shape} vs weight {w.shape}")
        if b.shape != (w.shape[1],):
            raise DimensionError(f"linear bias shape {b.shape} does not match weight {w.shape}")
        self.saved = (x, w)
        return x @ w + b

    def backward(self, grad):
        x, w = self.saved
        x2 = np.atleast_2d(x)
        g2 = np.atleast_2d(grad)
        dx = (g2 @ w.T).reshape(x.shape)
        return dx, x2.T @ g2, g2.sum(axis=0)


class ReLU(Function):
    def forward(self, x):
        mask = x > 0
        self.saved = (mask,)
        return np.where(mask, x, 0.0)

    def backward(self, grad):
        (mask,) = self.saved
        return (grad * mask,)


class Reshape(Function):
    def forward(self, x, shape):
        shape = tuple(shape)
        if int(np.prod(shape)) != x.size:
            raise DimensionError(f"cannot reshape {x.shape} to {shape}")
        self.saved = (x.shape,)
        return x.reshape(shape)

    def backward(self, grad):
        (shape,) = self.saved
        return (grad.reshape(shape),)


class Transpose(Function):
    def forward(self, x):
        _require_2d('transpose', x)
        return x.T.copy()

    def backward(self, grad):
        return (grad.T,)


class Stack(Function):
    def forward(self, *arrays):
        shapes = {a.shape for a in arrays}
        if len(shapes) != 1:
            raise DimensionError(f"stack needs equal shapes, got {sorted(shapes)}")
        return np.stack(arrays, axis=0)

    def backward(self, grad):
        return tuple(grad[i] for i in range(grad.shape[0]))


class Concat(Function):
    def forward(self, *arrays):
        if any(a.ndim != 1 for a in arrays):
            raise DimensionError("concat expects 1-D tensors")
        self.saved = (tuple(a.size for a in arrays),)
        return np.concatenate(arrays)

    def backward(self, grad):
        (sizes,) = self.saved
        return tuple(np.split(grad, np.cumsum(sizes)[:-1]))


class MeanRows(Function):
    def forward(self, x):
        _require_2d('mean_rows', x)
        self.saved = (x.shape,)
        return x.mean(axis=0)

    def backward(self, grad):
        (shape,) = self.saved
        return (np.broadcast_to(grad / shape[0], shape).copy(),)


class ReduceSum(Function):
    def forward(self, x):
        self.saved = (x.shape,)
        return np.array(x.sum())

    def backward(self, grad):
        (shape,) = self.saved
        return (np.full(shape, float(grad)),)


class CrossEntropy(Function):
    def forward(self, logits, labels):
        _require_2d('cross_entropy', logits)
        labels = np.asarray(labels, dtype=np.int64)
        batch, classes = logits.shape
        if labels.shape != (batch,):
            raise DimensionError(f"cross_entropy got {labels.shape[0] if labels.ndim else 0} labels for {batch} rows")
        if np.any(labels < 0) or np.any(labels >= classes):
            raise LabelError(f"labels must lie in [0, {classes}), got {labels.tolist()}")
        _require_finite('cross_entropy', logits)
        lse = logsumexp(logits, axis=1)
        picked = logits[np.arange(batch), labels]
        self.saved = (logits, labels, lse)
        return np.array(np.mean(lse - picked))

    def backward(self, grad):
        logits, labels, lse = self.saved
        batch = logits.shape[0]
        probs = np.exp(logits - lse[:, None])
        probs[np.arange(batch), labels] -= 1.0
        return (probs * (float(grad) / batch),)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return MatMul.apply(a, b)


def add(a: Tensor, b: Tensor) -> Tensor:
    return Add.apply(a, b)


def mul(a: Tensor, b: Tensor) -> Tensor:
    return Mul.apply(a, b)


def mul_const(x: Tensor, c: float) -> Tensor:
    return MulConst.apply(x, c=float(c))


def scale(x: Tensor, s: Tensor) -> Tensor:
    return Scale.apply(x, s)


def softmax_rows(x: Tensor) -> Tensor:
    return SoftmaxRows.apply(x)


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return Linear.apply(x, w, b)


def relu(x: Tensor) -> Tensor:
    return ReLU.apply(x)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(x, shape=tuple(shape))


def flatten(x: Tensor) -> Tensor:
    """Row-major flatten of a 2-D tensor"""
    _require_2d('flatten', x.data)
    return Reshape.apply(x, shape=(x.size,))


def transpose(x: Tensor) -> Tensor:
    return Transpose.apply(x)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    if not tensors:
        raise UsageError("stack needs at least one tensor")
    return Stack.apply(*tensors)


def concat(tensors: Sequence[Tensor]) -> Tensor:
    if not tensors:
        raise UsageError("concat needs at least one tensor")
    return Concat.apply(*tensors)


def mean_rows(x: Tensor) -> Tensor:
    return MeanRows.apply(x)


def reduce_sum(x: Tensor) -> Tensor:
    return ReduceSum.apply(x)


def cross_entropy(logits: Tensor, labels: Union[Sequence[int], np.ndarray]) -> Tensor:
    """Batch-mean of -log softmax(logits)[label]"""
    return CrossEntropy.apply(logits, labels=labels)
