"""Small feedforward networks in plain numpy.

ReLU hidden layers, a linear output layer, squared-error loss and Adam.
This is the learner behind the value predictor, the argument predictor,
the pairwise selector and the toy classifier.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, NumericalError, TrainingError

_MAGIC = b"LINITMLP"


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    output_dim: int
    hidden_layers: tuple[int, ...] = (200, 200)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        if self.input_dim < 1 or self.output_dim < 1 or any(h < 1 for h in self.hidden_layers):
            raise InputError(f"all layer widths must be >= 1: {self}")

    @property
    def layer_dims(self) -> list[int]:
        return [self.input_dim, *self.hidden_layers, self.output_dim]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InputError("learning_rate must be positive")
        if not 0 <= self.validation_fraction < 1:
            raise InputError("validation_fraction must lie in [0, 1)")
        if self.batch_size < 1 or self.epochs < 0:
            raise InputError("batch_size must be >= 1 and epochs >= 0")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0


@dataclass
class MlpModel:
    spec: MlpSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    adam: AdamState | None = None

    def params(self) -> list[np.ndarray]:
        """Parameters in declared order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class TrainHistory:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)


def init_model(spec: MlpSpec) -> MlpModel:
    """Glorot-uniform weights, zero biases, deterministic in ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    dims = spec.layer_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(spec, weights, biases)


def _as_batch(model, inputs):
    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.spec.input_dim:
        raise InputError(f"input has shape {np.shape(inputs)}, model expects dim {model.spec.input_dim}")
    return x, single


def forward(model: MlpModel, inputs) -> np.ndarray:
    x, single = _as_batch(model, inputs)
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def _forward_cached(model, x):
    acts = [x]
    pre = []
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i < last else z
        acts.append(h)
    return acts, pre


def _backprop(model, acts, pre, d_out):
    """Push d(loss)/d(output) back through the net; returns (param grads, d(loss)/d(input))."""
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    delta = d_out
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        delta = delta @ model.weights[i].T
        if i > 0:
            delta = delta * (pre[i - 1] > 0)
    grads = []
    for gw, gb in zip(grads_w, grads_b):
        grads.extend((gw, gb))
    return grads, delta


def backward(model: MlpModel, batch_inputs, batch_targets) -> tuple[list[np.ndarray], float]:
    """Mean-over-batch squared error (1/B)·sum ||yhat - y||^2 and its exact parameter gradients.

    Gradients come back in the order of ``MlpModel.params()``.
    """
    x, _ = _as_batch(model, batch_inputs)
    if x.shape[0] == 0:
        raise InputError("empty batch")
    y = np.asarray(batch_targets, dtype=float).reshape(x.shape[0], -1)
    if y.shape[1] != model.spec.output_dim:
        raise InputError(f"targets have dim {y.shape[1]}, model outputs {model.spec.output_dim}")
    acts, pre = _forward_cached(model, x)
    resid = acts[-1] - y
    n = x.shape[0]
    # overflow shows up as a non-finite loss, which train() reports
    with np.errstate(over="ignore", invalid="ignore"):
        loss = float(np.sum(resid * resid) / n)
        grads, _ = _backprop(model, acts, pre, 2.0 * resid / n)
    return grads, loss


def input_gradient(model: MlpModel, inputs, output_weights=None) -> np.ndarray:
    """Gradient of ``output_weights · forward(inputs)`` with respect to the input.

    For a scalar-output model the weights default to 1.
    """
    x, single = _as_batch(model, inputs)
    acts, pre = _forward_cached(model, x)
    if output_weights is None:
        if model.spec.output_dim != 1:
            raise InputError("output_weights required for a vector-output model")
        output_weights = np.ones(1)
    d_out = np.broadcast_to(np.asarray(output_weights, dtype=float), acts[-1].shape)
    _, d_in = _backprop(model, acts, pre, d_out)
    return d_in[0] if single else d_in


def adam_step(model: MlpModel, grads: list[np.ndarray], config: TrainConfig) -> MlpModel:
    """One bias-corrected Adam update, in place."""
    params = model.params()
    if len(grads) != len(params) or any(g.shape != p.shape for g, p in zip(grads, params)):
        raise InputError("gradient structure does not match model parameters")
    if model.adam is None:
        model.adam = AdamState([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])
    st = model.adam
    st.step += 1
    b1, b2 = config.adam_beta1, config.adam_beta2
    c1 = 1.0 - b1**st.step
    c2 = 1.0 - b2**st.step
    for p, g, m, v in zip(params, grads, st.m, st.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.adam_eps)
    return model


def mse(model: MlpModel, inputs, targets) -> float:
    pred = forward(model, np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).reshape(pred.shape)
    return float(np.sum((pred - y) ** 2) / pred.shape[0])


def split_dataset(inputs, targets, config: TrainConfig):
    """Shuffle once and carve the validation set from the head."""
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(targets, dtype=float).reshape(x.shape[0], -1)
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(x.shape[0])
    n_val = int(round(config.validation_fraction * x.shape[0]))
    val, tr = order[:n_val], order[n_val:]
    return (x[tr], y[tr]), (x[val], y[val]), rng


def train(model: MlpModel, inputs, targets, config: TrainConfig) -> tuple[MlpModel, TrainHistory]:
    """Mini-batch Adam on squared error. Losses are recorded after every epoch."""
    x = np.asarray(inputs, dtype=float)
    if x.shape[0] < 2:
        raise InputError("need at least 2 training examples")
    history = TrainHistory()
    if config.epochs == 0:
        return model, history
    (xt, yt), (xv, yv), rng = split_dataset(x, targets, config)
    if xt.shape[0] == 0:
        raise InputError("validation split leaves no training data")
    n = xt.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            grads, loss = backward(model, xt[idx], yt[idx])
            if not np.isfinite(loss):
                raise NumericalError("non-finite training loss", index=epoch)
            adam_step(model, grads, config)
        history.train_mse.append(mse(model, xt, yt))
        if xv.shape[0]:
            history.val_mse.append(mse(model, xv, yv))
        if not np.isfinite(history.train_mse[-1]):
            raise NumericalError("non-finite training loss", index=epoch)
    return model, history


def make_blobs(n: int, rng, dim: int = 2, center: float = 1.0, std: float = 0.5):
    """Two Gaussian blobs at ±(center, ..., center); labels +1 / -1 in equal proportion."""
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    points = labels[:, None] * center + std * rng.standard_normal((n, dim))
    return points, labels


def accuracy(model: MlpModel, points, labels) -> float:
    scores = forward(model, points).reshape(-1)
    return float(np.mean(np.sign(scores) == np.asarray(labels)))


def train_classifier(points, labels, spec: MlpSpec, config: TrainConfig, min_accuracy: float = 0.95):
    """Fit a scalar logit by regressing on ±1 targets; checks accuracy on the held-out split."""
    if spec.output_dim != 1:
        raise InputError("classifier must have a scalar output")
    if set(np.unique(labels)) - {1.0, -1.0}:
        raise InputError("labels must be +1 / -1")
    model = init_model(spec)
    model, history = train(model, points, labels, config)
    (_, _), (xv, yv), _ = split_dataset(points, labels, config)
    acc = accuracy(model, xv, yv.reshape(-1)) if xv.shape[0] else accuracy(model, points, labels)
    if acc < min_accuracy:
        raise TrainingError(f"classifier accuracy {acc:.3f} below {min_accuracy}; try another seed")
    return model, history, acc


def save_model(model: MlpModel, path, extra: dict | None = None) -> None:
    """Write magic, a little-endian u32 header length, a JSON header, then float64 LE parameters."""
    header = {
        "format": 1,
        "layer_dims": model.spec.layer_dims,
        "seed": model.spec.seed,
        "order": [f"{kind}{i}" for i in range(len(model.weights)) for kind in ("W", "b")],
        "shapes": [list(p.shape) for p in model.params()],
        "dtype": "<f8",
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True).encode()
    body = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in model.params())
    Path(path).write_bytes(_MAGIC + struct.pack("<I", len(blob)) + blob + body)


def load_model(path) -> tuple[MlpModel, dict]:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise InputError(f"{path} is not a model file")
    (hlen,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12:12 + hlen])
    dims = header["layer_dims"]
    spec = MlpSpec(dims[0], dims[-1], tuple(dims[1:-1]), header["seed"])
    flat = np.frombuffer(raw[12 + hlen:], dtype="<f8")
    params, pos = [], 0
    for shape in header["shapes"]:
        size = int(np.prod(shape))
        params.append(flat[pos:pos + size].reshape(shape).astype(float))
        pos += size
    if pos != flat.size:
        raise InputError(f"{path}: parameter payload size mismatch")
    return MlpModel(spec, params[0::2], params[1::2]), header["extra"]
