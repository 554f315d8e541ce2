"""Feed-forward networks trained with explicit backpropagation.

Every layer computes ``q = p @ W.T + b`` followed by an elementwise
activation (or a row-wise softmax on the output layer). Weights have shape
``(out_dim, in_dim)``; biases ``(out_dim,)``.
"""
import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, NonFiniteLoss
from .numerics import as_matrix, derive_seed, glorot_uniform, make_rng, matmul

PROB_CLAMP = 1e-7


class Activation(enum.Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"
    LINEAR = "linear"


class Loss(enum.Enum):
    CATEGORICAL_CROSSENTROPY = "categorical_crossentropy"
    BINARY_CROSSENTROPY = "binary_crossentropy"
    MSE = "mse"


class Optimizer(enum.Enum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: Activation

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got {self.in_dim}->{self.out_dim}")
        object.__setattr__(self, "activation", Activation(self.activation))


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i, (a, b) in enumerate(zip(layers, layers[1:])):
            if a.out_dim != b.in_dim:
                raise DimensionMismatch(f"layer {i} outputs {a.out_dim} but layer {i + 1} expects {b.in_dim}")
        for layer in layers[:-1]:
            if layer.activation is Activation.SOFTMAX:
                raise ValueError("softmax is only allowed on the final layer")
        object.__setattr__(self, "layers", layers)

    @classmethod
    def chain(cls, dims, hidden=Activation.RELU, output=Activation.LINEAR):
        """Spec for dims[0] -> dims[1] -> ... with one activation for hidden layers."""
        n = len(dims) - 1
        return cls(tuple(
            LayerSpec(dims[i], dims[i + 1], output if i == n - 1 else hidden) for i in range(n)
        ))

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    def dims(self):
        return [(l.in_dim, l.out_dim) for l in self.layers]


@dataclass
class NetworkParams:
    weights: list
    biases: list

    def copy(self):
        return NetworkParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def arrays(self):
        """Weights and biases interleaved, layer by layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def check(self, spec):
        if len(self.weights) != len(spec.layers) or len(self.biases) != len(spec.layers):
            raise DimensionMismatch("parameter count does not match the network layout")
        for i, (layer, w, b) in enumerate(zip(spec.layers, self.weights, self.biases)):
            if w.shape != (layer.out_dim, layer.in_dim) or b.shape != (layer.out_dim,):
                raise DimensionMismatch(f"layer {i}: W{w.shape}, b{b.shape} do not fit {layer}")

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def equals(self, other):
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))


def init_params(spec, rng):
    return NetworkParams(
        [glorot_uniform(rng, l.in_dim, l.out_dim) for l in spec.layers],
        [np.zeros(l.out_dim) for l in spec.layers],
    )


# --------------------------------------------------------------------------
# Activations
# --------------------------------------------------------------------------
def sigmoid(q):
    return 0.5 * (1.0 + np.tanh(0.5 * q))


def softmax(q):
    z = q - q.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def activate(kind, q):
    if kind is Activation.RELU:
        return np.maximum(q, 0.0)
    if kind is Activation.SIGMOID:
        return sigmoid(q)
    if kind is Activation.SOFTMAX:
        return softmax(q)
    return q


def activation_grad(kind, q, a):
    """Elementwise derivative of the activation; softmax is handled by the loss."""
    if kind is Activation.RELU:
        return (q > 0).astype(np.float64)
    if kind is Activation.SIGMOID:
        return a * (1.0 - a)
    if kind is Activation.LINEAR:
        return np.ones_like(q)
    raise ValueError("softmax has no elementwise derivative")


# --------------------------------------------------------------------------
# Forward / loss / backward
# --------------------------------------------------------------------------
@dataclass
class ForwardCache:
    inputs: list = field(default_factory=list)       # p fed into each layer
    pre: list = field(default_factory=list)          # q of each layer
    post: list = field(default_factory=list)         # activation of each layer

    @property
    def output(self):
        return self.post[-1]


def forward(spec, params, x):
    x = as_matrix(x, "input")
    if x.shape[1] != spec.in_dim:
        raise DimensionMismatch(f"input has {x.shape[1]} columns, network expects {spec.in_dim}")
    cache = ForwardCache()
    p = x
    for layer, w, b in zip(spec.layers, params.weights, params.biases):
        q = matmul(p, w.T) + b
        a = activate(layer.activation, q)
        cache.inputs.append(p)
        cache.pre.append(q)
        cache.post.append(a)
        p = a
    return cache


def predict_output(spec, params, x):
    return forward(spec, params, x).output


def loss_value(loss, predictions, targets):
    """Mean loss over the batch.

    Cross-entropy clamps probabilities to [1e-7, 1 - 1e-7]. Binary
    cross-entropy and MSE average over every entry, which equals the
    per-sample mean for single-column outputs.
    """
    loss = Loss(loss)
    p = as_matrix(predictions, "predictions")
    y = as_matrix(targets, "targets")
    if p.shape != y.shape:
        raise DimensionMismatch(f"predictions {p.shape} vs targets {y.shape}")
    if loss is Loss.MSE:
        with np.errstate(over="ignore"):
            return float(np.mean((p - y) ** 2))
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    if loss is Loss.CATEGORICAL_CROSSENTROPY:
        return float(-np.mean(np.sum(y * np.log(pc), axis=1)))
    return float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))


def _output_delta(layer, loss, q, a, y):
    """dLoss/dq for the output layer."""
    batch = a.shape[0]
    if layer.activation is Activation.SOFTMAX:
        if loss is not Loss.CATEGORICAL_CROSSENTROPY:
            raise ValueError("softmax output requires categorical cross-entropy")
        return (a - y) / batch
    if loss is Loss.CATEGORICAL_CROSSENTROPY:
        raise ValueError("categorical cross-entropy requires a softmax output")
    if loss is Loss.BINARY_CROSSENTROPY and layer.activation is Activation.SIGMOID:
        return (a - y) / a.size
    if loss is Loss.MSE:
        dl_da = 2.0 * (a - y) / a.size
    else:
        pc = np.clip(a, PROB_CLAMP, 1.0 - PROB_CLAMP)
        inside = (a > PROB_CLAMP) & (a < 1.0 - PROB_CLAMP)
        dl_da = np.where(inside, (pc - y) / (pc * (1.0 - pc)), 0.0) / a.size
    return dl_da * activation_grad(layer.activation, q, a)


def backward(spec, params, cache, targets, loss):
    """Exact gradients of the mean batch loss, returned as NetworkParams."""
    loss = Loss(loss)
    y = as_matrix(targets, "targets")
    if y.shape != cache.output.shape:
        raise DimensionMismatch(f"targets {y.shape} vs output {cache.output.shape}")
    n = len(spec.layers)
    gw, gb = [None] * n, [None] * n
    delta = _output_delta(spec.layers[-1], loss, cache.pre[-1], cache.post[-1], y)
    for i in range(n - 1, -1, -1):
        gw[i] = delta.T @ cache.inputs[i]
        gb[i] = delta.sum(axis=0)
        if i > 0:
            layer = spec.layers[i - 1]
            delta = (delta @ params.weights[i]) * activation_grad(layer.activation, cache.pre[i - 1], cache.post[i - 1])
    return NetworkParams(gw, gb)


# --------------------------------------------------------------------------
# Training
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class TrainConfig:
    loss: Loss = Loss.CATEGORICAL_CROSSENTROPY
    optimizer: Optimizer = Optimizer.ADAM
    learning_rate: float = 1e-3
    epochs: int = 300
    batch_size: int = 8
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "loss", Loss(self.loss))
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def describe(self):
        return {
            "loss": self.loss.value, "optimizer": self.optimizer.value,
            "learning_rate": self.learning_rate, "epochs": self.epochs,
            "batch_size": self.batch_size, "seed": self.seed,
        }


@dataclass
class TrainResult:
    params: NetworkParams
    history: list


def train(spec, config, x, y, params=None):
    """Mini-batch training with per-epoch shuffling.

    Initialisation and shuffling draw from streams derived from
    ``config.seed``, so identical inputs give bit-identical parameters.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"x has {x.shape[0]} rows, y has {y.shape[0]}")
    if y.shape[1] != spec.out_dim:
        raise DimensionMismatch(f"targets have {y.shape[1]} columns, network outputs {spec.out_dim}")
    n = x.shape[0]
    if config.batch_size > n:
        raise ValueError(f"batch_size {config.batch_size} exceeds {n} training rows")
    if params is None:
        params = init_params(spec, make_rng(derive_seed(config.seed, "init")))
    else:
        params = params.copy()
        params.check(spec)
    shuffle_rng = make_rng(derive_seed(config.seed, "shuffle"))

    arrays = params.arrays()
    moments = [(np.zeros_like(a), np.zeros_like(a)) for a in arrays]
    step = 0
    history = []
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = x[idx], y[idx]
            try:
                cache = forward(spec, params, xb)
            except FloatingPointError:
                raise NonFiniteLoss(epoch, float("nan")) from None
            total += loss_value(config.loss, cache.output, yb) * len(idx)
            grads = backward(spec, params, cache, yb, config.loss).arrays()
            step += 1
            if config.optimizer is Optimizer.ADAM:
                for a, g, (m, v) in zip(arrays, grads, moments):
                    kernels.adam_update(a, g, m, v, config.learning_rate, config.beta1,
                                        config.beta2, config.adam_eps, step)
            else:
                for a, g in zip(arrays, grads):
                    a -= config.learning_rate * g
        mean = total / n
        if not np.isfinite(mean) or not params.is_finite():
            raise NonFiniteLoss(epoch, mean)
        history.append(mean)
    return TrainResult(params, history)


# --------------------------------------------------------------------------
# Gradient verification
# --------------------------------------------------------------------------
@dataclass
class GradCheckReport:
    passed: bool
    max_rel_error: float
    n_checked: int
    tolerance: float
    worst: tuple = ()   # (array index, flat entry index)
    kink_retries: int = 0     # entries re-checked with a smaller step
    kink_straddles: int = 0   # entries still crossing a kink at the smallest step


MIN_FD_STEP = 1e-8


def _relu_pattern(spec, cache):
    return [q > 0 for layer, q in zip(spec.layers, cache.pre) if layer.activation is Activation.RELU]


def _central_difference(spec, params, flat, k, h, x, y, loss, base_pattern):
    orig = flat[k]
    values, crossed = [], False
    for step in (h, -h):
        flat[k] = orig + step
        c = forward(spec, params, x)
        values.append(loss_value(loss, c.output, y))
        crossed = crossed or any(not np.array_equal(a, b) for a, b in zip(_relu_pattern(spec, c), base_pattern))
    flat[k] = orig
    return (values[0] - values[1]) / (2 * h), crossed


def relative_error(analytic, numeric, floor=1e-6):
    """|a - n| / max(|a|, |n|, floor); the floor keeps near-zero pairs from blowing up."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def random_targets(spec, loss, n, rng):
    if loss is Loss.CATEGORICAL_CROSSENTROPY:
        y = np.zeros((n, spec.out_dim))
        y[np.arange(n), rng.integers(0, spec.out_dim, n)] = 1.0
        return y
    if loss is Loss.BINARY_CROSSENTROPY:
        return rng.integers(0, 2, size=(n, spec.out_dim)).astype(float)
    return rng.uniform(0.0, 1.0, size=(n, spec.out_dim))


def gradient_check(spec, loss, n_samples=5, tolerance=1e-4, seed=0, eps=1e-5,
                   max_entries=None, params=None, x=None, y=None):
    """Compare backprop against central differences at a seeded random point.

    ``max_entries`` caps the entries checked per weight/bias array (a seeded
    random subset); ``None`` checks every entry.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be > 0")
    loss = Loss(loss)
    rng = make_rng(seed)
    if params is None:
        params = init_params(spec, rng)
        # small random biases so ReLU units sit away from the kink at zero
        for b in params.biases:
            b[:] = rng.uniform(-0.1, 0.1, size=b.shape)
    if x is None:
        x = rng.uniform(0.0, 1.0, size=(n_samples, spec.in_dim))
    if y is None:
        y = random_targets(spec, loss, x.shape[0], rng)

    cache = forward(spec, params, x)
    analytic = backward(spec, params, cache, y, loss).arrays()
    base_pattern = _relu_pattern(spec, cache)
    arrays = params.arrays()
    worst, worst_at, checked, retried, straddled = 0.0, (), 0, 0, 0
    for ai, (arr, grad) in enumerate(zip(arrays, analytic)):
        flat = arr.reshape(-1)
        entries = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            entries = np.sort(rng.choice(flat.size, size=max_entries, replace=False))
        for k in entries:
            # a step that flips any ReLU on/off makes the difference quotient
            # straddle a kink; shrink the step for that entry until it does not
            h = eps
            while True:
                numeric, crossed = _central_difference(spec, params, flat, k, h, x, y, loss, base_pattern)
                if not crossed or h <= MIN_FD_STEP:
                    break
                h /= 10
            retried += h < eps
            straddled += crossed
            err = relative_error(grad.reshape(-1)[k], numeric)
            checked += 1
            if err > worst:
                worst, worst_at = err, (ai, int(k))
    return GradCheckReport(bool(worst < tolerance), float(worst), checked, tolerance, worst_at, int(retried),
                           int(straddled))


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------
PARAMS_FORMAT = "care2vec.network/1"


def params_to_dict(spec, params):
    return {
        "format": PARAMS_FORMAT,
        "layers": [
            {
                "in_dim": l.in_dim,
                "out_dim": l.out_dim,
                "activation": l.activation.value,
                "weights": w.reshape(-1).tolist(),
                "bias": b.tolist(),
            }
            for l, w, b in zip(spec.layers, params.weights, params.biases)
        ],
    }


def params_from_dict(doc):
    if doc.get("format") != PARAMS_FORMAT:
        raise ValueError(f"unsupported parameter format {doc.get('format')!r}")
    layers, ws, bs = [], [], []
    for entry in doc["layers"]:
        layer = LayerSpec(entry["in_dim"], entry["out_dim"], Activation(entry["activation"]))
        layers.append(layer)
        ws.append(np.array(entry["weights"], dtype=np.float64).reshape(layer.out_dim, layer.in_dim))
        bs.append(np.array(entry["bias"], dtype=np.float64))
    spec = NetworkSpec(tuple(layers))
    params = NetworkParams(ws, bs)
    params.check(spec)
    return spec, params


def dumps_params(spec, params):
    return json.dumps(params_to_dict(spec, params))


def loads_params(text):
    return params_from_dict(json.loads(text))
