import warnings

import numpy as np
import pytest

from care2vec.autoencoder import (
    AutoencoderSpec,
    FittedEncoder,
    build_autoencoder,
    encode,
    fit_encoder,
    reconstruction_mse,
)
from care2vec.errors import DimensionMismatch, InvalidDim
from care2vec.neural import Activation, forward, init_params
from care2vec.numerics import make_rng


def test_d32_layer_dims():
    spec = build_autoencoder(32)
    assert [l.out_dim for l in spec.layers] == [200, 100, 50, 32, 50, 100, 200, 205]
    assert spec.in_dim == 205
    acts = [l.activation for l in spec.layers]
    assert acts[3] is Activation.LINEAR and acts[-1] is Activation.SIGMOID
    assert all(a is Activation.RELU for i, a in enumerate(acts) if i not in (3, 7))


def test_d4_code_layer():
    assert build_autoencoder(4).layers[3].out_dim == 4


@pytest.mark.parametrize("d", [0, 50, -3])
def test_invalid_dims(d):
    with pytest.raises(InvalidDim):
        build_autoencoder(d)


def test_off_grid_warns_but_builds():
    with pytest.warns(UserWarning):
        spec = build_autoencoder(12)
    assert spec.layers[3].out_dim == 12
    assert AutoencoderSpec(12).off_grid and not AutoencoderSpec(16).off_grid


@pytest.mark.parametrize("d", [4, 8, 16, 32])
def test_mirror_symmetry(d):
    dims = [(l.in_dim, l.out_dim) for l in build_autoencoder(d).layers]
    assert dims[4:] == [(b, a) for a, b in reversed(dims[:4])]


def _x(n=24, seed=0):
    return make_rng(seed).integers(0, 2, size=(n, 205)).astype(float)


def test_wrong_width(quick_ae):
    with pytest.raises(DimensionMismatch):
        fit_encoder(AutoencoderSpec(8), np.zeros((10, 204)), quick_ae)


def test_fit_is_deterministic(quick_ae):
    a = fit_encoder(AutoencoderSpec(8), _x(), quick_ae)
    b = fit_encoder(AutoencoderSpec(8), _x(), quick_ae)
    assert a.params.equals(b.params)
    np.testing.assert_array_equal(encode(a, _x(5, 1)), encode(b, _x(5, 1)))


def test_encode_shape_and_width_check(quick_ae):
    enc = fit_encoder(AutoencoderSpec(4), _x(), quick_ae)
    assert encode(enc, _x(7, 2)).shape == (7, 4)
    with pytest.raises(DimensionMismatch):
        encode(enc, np.zeros((2, 200)))


def test_encode_is_per_row(quick_ae):
    enc = fit_encoder(AutoencoderSpec(16), _x(), quick_ae)
    x = _x(6, 3)
    rows = np.vstack([encode(enc, x[i:i + 1]) for i in range(6)])
    assert np.max(np.abs(encode(enc, x) - rows)) < 1e-12


def test_encoder_is_first_half_of_full_network():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        full = build_autoencoder(8)
    params = init_params(full, make_rng(5))
    enc = FittedEncoder(
        type(full)(full.layers[:4]),
        type(params)(params.weights[:4], params.biases[:4]),
        8,
    )
    x = _x(4, 6)
    np.testing.assert_array_equal(encode(enc, x), forward(full, params, x).post[3])


def test_json_round_trip(quick_ae):
    enc = fit_encoder(AutoencoderSpec(4), _x(), quick_ae)
    back = FittedEncoder.from_json(enc.to_json())
    np.testing.assert_array_equal(encode(back, _x(3, 9)), encode(enc, _x(3, 9)))


def test_training_reduces_loss_and_beats_column_mean():
    from care2vec.neural import Loss, TrainConfig, train
    rng = make_rng(7)
    # structured binary data: three prototypes with 5% bit flips
    protos = rng.integers(0, 2, size=(3, 205))
    x = protos[rng.integers(0, 3, size=40)].astype(float)
    flips = rng.uniform(size=x.shape) < 0.05
    x[flips] = 1 - x[flips]
    spec = build_autoencoder(8)
    res = train(spec, TrainConfig(loss=Loss.MSE, epochs=60, seed=1), x, x)
    assert res.history[-1] < res.history[0]
    baseline = float(np.mean((x - x.mean(axis=0)) ** 2))
    assert reconstruction_mse(spec, res.params, x) < baseline
