"""Fixed-architecture feed-forward classifier: ReLU hidden layers with dropout, softmax output."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import log_softmax, softmax

from .base import TrainedModel, check_training_data

HIDDEN = (64, 16)


@dataclass(frozen=True)
class MlpParams:
    dropout_rate: float = 0.2
    epochs: int = 60
    learning_rate: float = 0.01
    batch_size: int = 32
    momentum: float = 0.9
    weight_decay: float = 0.0
    standardize: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")


def param_count(input_dim, n_classes=4, hidden=HIDDEN):
    """Weights plus biases per dense layer."""
    sizes = [input_dim, *hidden, n_classes]
    return [sizes[i + 1] * (sizes[i] + 1) for i in range(len(sizes) - 1)]


def init_weights(input_dim, n_classes, rng, hidden=HIDDEN):
    """He-normal weights, zero biases; returns [W1, b1, W2, b2, W3, b3]."""
    sizes = [input_dim, *hidden, n_classes]
    out = []
    for i in range(len(sizes) - 1):
        out.append(rng.normal(0.0, np.sqrt(2.0 / sizes[i]), size=(sizes[i], sizes[i + 1])))
        out.append(np.zeros(sizes[i + 1]))
    return out


def forward(weights, X, masks=None):
    """Logits and the cached activations.  ``masks`` are pre-scaled dropout masks."""
    acts = [X]
    h = X
    n_layers = len(weights) // 2
    for layer in range(n_layers - 1):
        W, b = weights[2 * layer], weights[2 * layer + 1]
        h = np.maximum(h @ W + b, 0.0)
        if masks is not None:
            h = h * masks[layer]
        acts.append(h)
    logits = h @ weights[-2] + weights[-1]
    return logits, acts


def loss_and_grad(weights, X, y, masks=None):
    """Mean softmax cross-entropy and its gradient for every weight array."""
    logits, acts = forward(weights, X, masks)
    n = len(y)
    loss = float(-log_softmax(logits, axis=1)[np.arange(n), y].mean())
    delta = softmax(logits, axis=1)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = [None] * len(weights)
    n_layers = len(weights) // 2
    for layer in range(n_layers - 1, -1, -1):
        a = acts[layer]
        grads[2 * layer] = a.T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ weights[2 * layer].T
            # acts[layer] is relu output times mask: zero exactly where the unit was off or dropped
            scale = masks[layer - 1] if masks is not None else 1.0
            delta = delta * (a > 0) * scale
    return loss, grads


class MlpModel(TrainedModel):
    kind = "mlp"

    def weights(self):
        return [self.arrays[f"w{i}"] for i in range(6)]

    def _proba(self, X):
        Z = (X - self.arrays["mean"]) / self.arrays["scale"]
        logits, _ = forward(self.weights(), Z)
        return softmax(logits, axis=1)


def train_mlp(X, y, params: MlpParams = MlpParams(), n_classes=None) -> MlpModel:
    """Mini-batch SGD with momentum; inverted dropout after each hidden layer.

    With ``standardize`` on, inputs are centred and scaled by statistics of
    the rows passed here (the training fold).
    """
    X, y, k = check_training_data(X, y, n_classes)
    if params.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean = np.zeros(X.shape[1])
        scale = np.ones(X.shape[1])
    Z = (X - mean) / scale
    rng = np.random.default_rng(params.seed)
    weights = init_weights(X.shape[1], k, rng)
    velocity = [np.zeros_like(w) for w in weights]
    keep = 1.0 - params.dropout_rate
    losses = []
    for _ in range(params.epochs):
        order = rng.permutation(len(y))
        total = 0.0
        for s in range(0, len(y), params.batch_size):
            rows = order[s:s + params.batch_size]
            masks = None
            if params.dropout_rate > 0:
                masks = [(rng.random((len(rows), h)) < keep) / keep for h in HIDDEN]
            loss, grads = loss_and_grad(weights, Z[rows], y[rows], masks)
            total += loss * len(rows)
            for i, g in enumerate(grads):
                if params.weight_decay and i % 2 == 0:
                    g = g + params.weight_decay * weights[i]
                velocity[i] = params.momentum * velocity[i] - params.learning_rate * g
                weights[i] = weights[i] + velocity[i]
        losses.append(total / len(y))
    arrays = {f"w{i}": w for i, w in enumerate(weights)}
    arrays.update(mean=mean, scale=scale, train_loss=np.array(losses))
    return MlpModel(asdict(params), arrays, X.shape[1], k)
