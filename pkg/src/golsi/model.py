"""Fully connected feed-forward networks with exact backpropagation.

Parameters live in one flat float64 vector, layer-major: for each layer the
weight matrix (fan_in x fan_out, row-major) followed by its bias vector.
Logistic regression is the zero-hidden-layer case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from golsi.data import Dataset

ERROR_NUGGET = 1e-4

ACTIVATIONS = ("sigmoid", "tanh", "identity")
LOSSES = ("bce", "mse")


class NumericError(ArithmeticError):
    """A non-finite value appeared during a forward or backward pass."""

    def __init__(self, message: str, layer: Optional[int] = None):
        super().__init__(message)
        self.layer = layer


@dataclass(frozen=True)
class Architecture:
    layer_widths: Tuple[int, ...]
    hidden_activation: str = "sigmoid"
    # Only used by MSE networks; BCE always applies the sigmoid inside the loss.
    output_activation: str = "sigmoid"
    loss_kind: str = "bce"
    init_std: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if len(self.layer_widths) < 2 or min(self.layer_widths) < 1:
            raise ValueError(f"invalid layer widths {self.layer_widths}")
        if self.hidden_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.hidden_activation!r}")
        if self.output_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.output_activation!r}")
        if self.loss_kind not in LOSSES:
            raise ValueError(f"unknown loss {self.loss_kind!r}")

    @property
    def input_dim(self) -> int:
        return self.layer_widths[0]

    @property
    def output_dim(self) -> int:
        return self.layer_widths[-1]

    @property
    def shapes(self) -> List[Tuple[int, int]]:
        w = self.layer_widths
        return list(zip(w[:-1], w[1:]))

    @property
    def n_params(self) -> int:
        return sum((fan_in + 1) * fan_out for fan_in, fan_out in self.shapes)

    def with_input_dim(self, input_dim: int) -> "Architecture":
        return Architecture(
            (input_dim,) + self.layer_widths[1:],
            self.hidden_activation,
            self.output_activation,
            self.loss_kind,
            self.init_std,
            self.name,
        )


PRESETS = {
    "LogR": Architecture((30, 2), "sigmoid", "sigmoid", "bce", 1.0, "LogR"),
    "NetPI": Architecture((30, 32, 2), "sigmoid", "sigmoid", "bce", 1.0, "NetPI"),
    "NetPII": Architecture((30, 32, 2), "sigmoid", "sigmoid", "mse", 1.0, "NetPII"),
    "NetI": Architecture((784, 800, 10), "sigmoid", "sigmoid", "bce", 1.0, "NetI"),
    "NetII": Architecture(
        (784, 1000, 500, 250, 10), "tanh", "tanh", "mse", math.sqrt(0.1), "NetII"
    ),
}


def preset(name: str, **overrides) -> Architecture:
    try:
        base = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown architecture preset {name!r}; choose from {sorted(PRESETS)}") from None
    if not overrides:
        return base
    kw = dict(
        layer_widths=base.layer_widths,
        hidden_activation=base.hidden_activation,
        output_activation=base.output_activation,
        loss_kind=base.loss_kind,
        init_std=base.init_std,
        name=base.name,
    )
    kw.update(overrides)
    return Architecture(**kw)


def deep_netpi(hidden_layers: int = 10, width: int = 32) -> Architecture:
    return Architecture(
        (30,) + (width,) * hidden_layers + (2,), "sigmoid", "sigmoid", "bce", 1.0,
        f"NetPI-deep{hidden_layers}",
    )


def init_params(a: Architecture, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal(a.n_params) * a.init_std


def unflatten(a: Architecture, x: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Views of ``x`` as per-layer (W, b) pairs; no copies are made."""
    x = np.asarray(x)
    if x.shape != (a.n_params,):
        raise ValueError(f"parameter vector has shape {x.shape}, expected ({a.n_params},)")
    layers, pos = [], 0
    for fan_in, fan_out in a.shapes:
        W = x[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = x[pos : pos + fan_out]
        pos += fan_out
        layers.append((W, b))
    return layers


def flatten(layers: Sequence[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in layers])


def _sigmoid(z):
    # tanh form avoids exp overflow for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _act(kind, z):
    if kind == "sigmoid":
        return _sigmoid(z)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _act_grad(kind, z, h):
    if kind == "sigmoid":
        return h * (1.0 - h)
    if kind == "tanh":
        return 1.0 - h * h
    return np.ones_like(z)


@dataclass
class EvalResult:
    loss: float
    gradient: np.ndarray
    batch_used: np.ndarray = field(repr=False)


def _forward(a: Architecture, layers, X):
    hs, zs = [X], []
    h = X
    last = len(layers) - 1
    for i, (W, b) in enumerate(layers):
        with np.errstate(over="ignore", invalid="ignore"):
            z = h @ W + b
        if not np.all(np.isfinite(z)):
            raise NumericError(f"non-finite pre-activation in layer {i + 1}", layer=i + 1)
        zs.append(z)
        if i < last:
            h = _act(a.hidden_activation, z)
            hs.append(h)
    return hs, zs


def _output(a: Architecture, z):
    if a.loss_kind == "bce":
        return _sigmoid(z)
    return _act(a.output_activation, z)


def evaluate(a: Architecture, x: np.ndarray, d: Dataset, batch) -> EvalResult:
    """Mean loss and its exact gradient over the (possibly repeating) ``batch`` rows."""
    batch = np.asarray(batch, dtype=np.int64)
    if batch.size == 0:
        raise ValueError("empty batch")
    layers = unflatten(a, x)
    X = d.inputs[batch]
    T = d.targets[batch]
    if X.shape[1] != a.input_dim or T.shape[1] != a.output_dim:
        raise ValueError(
            f"dataset dims ({X.shape[1]}, {T.shape[1]}) do not match architecture "
            f"({a.input_dim}, {a.output_dim})"
        )
    hs, zs = _forward(a, layers, X)
    z = zs[-1]
    n, k = z.shape
    if a.loss_kind == "bce":
        # log(1 + e^z) - t z  ==  -[t log s + (1 - t) log(1 - s)]
        per = np.logaddexp(0.0, z) - T * z
        delta = (_sigmoid(z) - T) / (n * k)
    else:
        y = _act(a.output_activation, z)
        r = y - T
        per = r * r
        delta = 2.0 * r * _act_grad(a.output_activation, z, y) / (n * k)
    loss = float(per.sum() / (n * k))
    if not math.isfinite(loss):
        raise NumericError("non-finite loss", layer=len(layers))

    grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        grads[i] = (hs[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ W.T) * _act_grad(a.hidden_activation, zs[i - 1], hs[i])
    g = flatten(grads)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient")
    return EvalResult(loss, g, batch)


def predict(a: Architecture, x: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    layers = unflatten(a, x)
    _, zs = _forward(a, layers, inputs)
    return _output(a, zs[-1])


def loss_value(a: Architecture, x: np.ndarray, d: Dataset, batch=None) -> float:
    """Forward-only mean loss; ``batch=None`` uses every row."""
    X = d.inputs if batch is None else d.inputs[np.asarray(batch, dtype=np.int64)]
    T = d.targets if batch is None else d.targets[np.asarray(batch, dtype=np.int64)]
    _, zs = _forward(a, unflatten(a, x), X)
    z = zs[-1]
    if a.loss_kind == "bce":
        per = np.logaddexp(0.0, z) - T * z
    else:
        per = (_act(a.output_activation, z) - T) ** 2
    return float(per.mean())


def classification_error(a: Architecture, x: np.ndarray, d: Dataset, subsample=None) -> float:
    """Misclassified fraction plus :data:`ERROR_NUGGET`, so zero error reads 1e-4."""
    if subsample is not None:
        d = d.subset(subsample)
    if d.M == 0:
        return float("nan")
    out = predict(a, x, d.inputs)
    if d.output_dim == 1:
        wrong = (out[:, 0] > 0.5) != (d.targets[:, 0] > 0.5)
    else:
        wrong = out.argmax(axis=1) != d.targets.argmax(axis=1)
    return float(wrong.mean()) + ERROR_NUGGET
