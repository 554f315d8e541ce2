"""Symmetric dense autoencoder used as the Care2Vec embedding stage."""
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidDim
from .neural import (
    Activation,
    LayerSpec,
    Loss,
    NetworkParams,
    NetworkSpec,
    TrainConfig,
    forward,
    params_from_dict,
    params_to_dict,
    train,
)
from .numerics import as_matrix

INPUT_DIM = 205
HIDDEN_DIMS = (200, 100, 50)
ENCODING_DIMS = (4, 8, 16, 32)

AE_TRAIN_DEFAULTS = TrainConfig(loss=Loss.MSE, epochs=500)


@dataclass(frozen=True)
class AutoencoderSpec:
    encoding_dim: int
    input_dim: int = INPUT_DIM
    hidden_dims: tuple = HIDDEN_DIMS

    @property
    def off_grid(self):
        return self.encoding_dim not in ENCODING_DIMS

    def network(self):
        return build_autoencoder(self.encoding_dim, self.input_dim, self.hidden_dims)


def build_autoencoder(d, input_dim=INPUT_DIM, hidden_dims=HIDDEN_DIMS):
    """input -> 200 -> 100 -> 50 -> d -> 50 -> 100 -> 200 -> input.

    Hidden layers use ReLU, the code layer is linear and the reconstruction
    layer is a sigmoid (inputs are scaled into [0, 1]).
    """
    if not 1 <= d < hidden_dims[-1]:
        raise InvalidDim(f"encoding dim must satisfy 1 <= d < {hidden_dims[-1]}, got {d}")
    if d not in ENCODING_DIMS:
        warnings.warn(f"encoding dim {d} is outside the grid {ENCODING_DIMS}", stacklevel=2)
    down = (input_dim, *hidden_dims, d)
    up = down[::-1]
    layers = []
    for i in range(len(down) - 1):
        act = Activation.LINEAR if i == len(down) - 2 else Activation.RELU
        layers.append(LayerSpec(down[i], down[i + 1], act))
    for i in range(len(up) - 1):
        act = Activation.SIGMOID if i == len(up) - 2 else Activation.RELU
        layers.append(LayerSpec(up[i], up[i + 1], act))
    return NetworkSpec(tuple(layers))


@dataclass
class FittedEncoder:
    spec: NetworkSpec          # encoder half only
    params: NetworkParams
    encoding_dim: int
    preprocess: object = None  # PreprocessState in force when fitted
    history: tuple = ()

    @property
    def input_dim(self):
        return self.spec.in_dim

    def to_json(self):
        doc = params_to_dict(self.spec, self.params)
        doc["encoding_dim"] = self.encoding_dim
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        spec, params = params_from_dict(doc)
        return cls(spec, params, int(doc["encoding_dim"]))


def encoder_half(spec):
    n = len(spec.layers) // 2
    return NetworkSpec(spec.layers[:n])


def fit_encoder(ae_spec, train_x, config=AE_TRAIN_DEFAULTS, preprocess=None):
    """Train the full autoencoder to reconstruct ``train_x``; keep the encoder."""
    train_x = as_matrix(train_x, "train_x")
    if train_x.shape[1] != ae_spec.input_dim:
        raise DimensionMismatch(f"autoencoder expects {ae_spec.input_dim} columns, got {train_x.shape[1]}")
    if config.loss is not Loss.MSE:
        raise ValueError("the autoencoder is trained with MSE loss")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        full = ae_spec.network()
    result = train(full, config, train_x, train_x)
    n = len(full.layers) // 2
    params = NetworkParams(result.params.weights[:n], result.params.biases[:n])
    return FittedEncoder(encoder_half(full), params, ae_spec.encoding_dim, preprocess, tuple(result.history))


def encode(enc, x):
    x = as_matrix(x, "x")
    if x.shape[1] != enc.input_dim:
        raise DimensionMismatch(f"encoder expects {enc.input_dim} columns, got {x.shape[1]}")
    return forward(enc.spec, enc.params, x).output


def reconstruction_mse(spec, params, x):
    out = forward(spec, params, x).output
    return float(np.mean((out - x) ** 2))
