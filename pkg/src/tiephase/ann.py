"""Two-layer fully connected network that cleans up retrieved phase maps.

The network maps a flattened phase map x (row vector) to
y = tanh(x W1 + B1) W2 + B2 in float64. It starts as an identity-like
pass-through and is trained by plain gradient descent on the squared
reconstruction error against the exact phase maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField


class TrainingDiverged(RuntimeError):
    """Raised when the batch loss stops being finite during training."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Network:
    """Parameters of the two-layer map y = tanh(x W1 + B1) W2 + B2."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        w1, b1, w2, b2 = (_frozen(v) for v in (self.w1, self.b1, self.w2, self.b2))
        inputs, hidden = w1.shape
        if b1.shape != (hidden,) or w2.shape[0] != hidden or b2.shape != (w2.shape[1],):
            raise ValueError("layer shapes are inconsistent")
        for arr in (w1, b1, w2, b2):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network parameters must be finite")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", b2)

    @property
    def inputs(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    @property
    def outputs(self) -> int:
        return self.w2.shape[1]


@dataclass(frozen=True)
class Gradients:
    """Loss gradients, one array per parameter block of Network."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent schedule.

    The training set is reshuffled every epoch from shuffle_seed and split
    into batches of batch_size; the pair count must be a multiple of
    batch_size. batch_count, when given, additionally pins the expected
    number of batches per epoch.
    """

    learning_rate: float = 0.5
    epochs: int = 50
    batch_size: int = 50
    batch_count: int | None = None
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be at least 1")
        if self.batch_count is not None and self.batch_count < 1:
            raise ValueError("batch count must be at least 1")


def init_network(size: int, hidden: int | None = None) -> Network:
    """Identity-like start for `size` inputs and outputs.

    W1 is a rectangular diagonal of ones, W2 its transpose and both biases
    zero, so the initial map is y = tanh(x) when hidden == size. hidden
    defaults to size.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    h = size if hidden is None else hidden
    if h < 1:
        raise ValueError("hidden size must be at least 1")
    w1 = np.zeros((size, h))
    np.fill_diagonal(w1, 1.0)
    return Network(w1=w1, b1=np.zeros(h), w2=w1.T.copy(), b2=np.zeros(size))


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Network output for one flattened map (row-vector convention)."""
    x = np.asarray(x, dtype=np.float64)
    return np.tanh(x @ net.w1 + net.b1) @ net.w2 + net.b2


def loss(y: np.ndarray, target: np.ndarray) -> float:
    """Squared reconstruction error summed over the map components."""
    diff = np.asarray(target, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return float(np.sum(diff * diff))


def backward(net: Network, x: np.ndarray, target: np.ndarray) -> Gradients:
    """Exact gradients of loss(forward(net, x), target) for one example."""
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    hidden = np.tanh(x @ net.w1 + net.b1)
    y = hidden @ net.w2 + net.b2
    dy = 2.0 * (y - target)
    dhidden = (dy @ net.w2.T) * (1.0 - hidden * hidden)
    return Gradients(
        w1=np.outer(x, dhidden),
        b1=dhidden,
        w2=np.outer(hidden, dy),
        b2=dy,
    )


def apply_update(net: Network, grads: Gradients, learning_rate: float) -> Network:
    """One plain gradient-descent step; returns the updated network."""
    return Network(
        w1=net.w1 - learning_rate * grads.w1,
        b1=net.b1 - learning_rate * grads.b1,
        w2=net.w2 - learning_rate * grads.w2,
        b2=net.b2 - learning_rate * grads.b2,
    )


def train(net: Network, inputs: np.ndarray, targets: np.ndarray,
          config: TrainConfig) -> tuple[Network, list[float]]:
    """Gradient descent over shuffled batches.

    Each update applies the summed batch gradient scaled by
    8 / (batch_size * hidden). The tanh features are bounded by one, so
    the output layer's curvature never exceeds batch_size * hidden and
    dividing by that product is stable for any data at rates up to one;
    measured feature spectra sit an order of magnitude below that worst
    case, and the factor 8 buys the corresponding speedup while keeping
    a factor of a few in reserve. The scaling leaves the usable rate
    range independent of batch size and map resolution, so one rate
    works from toy grids up to full-size maps. The history records the
    per-epoch mean of the per-pair summed-square losses.

    Raises
    ------
    TrainingDiverged
        If the loss stops being finite; the learning rate must then be
        lowered explicitly rather than clamped behind the scenes.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape != targets.shape:
        raise ValueError("inputs and targets must be matching 2-D arrays")
    n = inputs.shape[0]
    if n == 0 or n % config.batch_size != 0:
        raise ValueError(f"pair count {n} is not a multiple of batch size {config.batch_size}")
    if config.batch_count is not None and n != config.batch_size * config.batch_count:
        raise ValueError(
            f"pair count {n} does not equal batch_size {config.batch_size} "
            f"x batch_count {config.batch_count}"
        )
    if inputs.shape[1] != net.inputs:
        raise ValueError(f"network expects {net.inputs} inputs, data has {inputs.shape[1]}")

    w1, b1 = net.w1.copy(), net.b1.copy()
    w2, b2 = net.w2.copy(), net.b2.copy()
    lr = config.learning_rate
    norm = config.batch_size * net.hidden / 8.0
    rng = np.random.default_rng(config.shuffle_seed)
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, tb = inputs[idx], targets[idx]
            # a diverging run overflows to inf before the finite check trips
            with np.errstate(over="ignore", invalid="ignore"):
                hidden = np.tanh(xb @ w1 + b1)
                yb = hidden @ w2 + b2
                diff = yb - tb
                batch_loss = float(np.sum(diff * diff))
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(
                    f"loss became non-finite in epoch {epoch}; lower the learning rate"
                )
            epoch_loss += batch_loss
            dy = (2.0 / norm) * diff
            dhidden = (dy @ w2.T) * (1.0 - hidden * hidden)
            w2 -= lr * (hidden.T @ dy)
            b2 -= lr * dy.sum(axis=0)
            w1 -= lr * (xb.T @ dhidden)
            b1 -= lr * dhidden.sum(axis=0)
        history.append(epoch_loss / n)
    return Network(w1=w1, b1=b1, w2=w2, b2=b2), history


def adjust(net: Network, phase: ScalarField) -> ScalarField:
    """Run a phase map through the network, preserving its geometry."""
    if net.inputs != phase.m * phase.m:
        raise ValueError(
            f"network expects {net.inputs} inputs, map has {phase.m * phase.m} pixels"
        )
    y = forward(net, phase.data.ravel())
    return ScalarField(phase.m, phase.a, y.reshape(phase.m, phase.m))
