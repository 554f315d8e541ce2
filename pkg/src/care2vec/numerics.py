"""Dense float64 matrix helpers and seeded random streams.

Matrices are plain 2-D ``float64`` numpy arrays. Random streams come from
numpy's PCG64 bit generator, whose output for a given seed is fixed and
platform independent; child streams for folds, grid cells and training
stages are derived with :func:`derive_seed` rather than shared.
"""
import zlib

import numpy as np

from .errors import DimensionMismatch

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"


def as_matrix(a, name="matrix"):
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    return m


def check_finite(a, name="matrix"):
    if not np.all(np.isfinite(a)):
        raise FloatingPointError(f"{name} contains non-finite values")
    return a


def identity(n):
    return np.eye(n, dtype=np.float64)


def matmul(a, b):
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        product = a @ b
    return check_finite(product, "product")


def make_rng(seed):
    """Return a PCG64 generator for a 64-bit unsigned seed."""
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed)))


def derive_seed(seed, *keys):
    """Deterministically derive an independent 64-bit child seed.

    ``keys`` may be ints or strings (strings are mapped through CRC-32) and
    become the SeedSequence spawn key, so ``derive_seed(s, "fold", 3)``
    never collides with ``derive_seed(s, "fold", 4)`` or with ``s`` itself.
    """
    spawn_key = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in keys)
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=spawn_key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _seed_sequence(seed):
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)


def glorot_uniform(rng, fan_in, fan_out):
    """Weights of shape (fan_out, fan_in) drawn from U[-L, L], L = sqrt(6 / (fan_in + fan_out))."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError("fan_in and fan_out must be >= 1")
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))
