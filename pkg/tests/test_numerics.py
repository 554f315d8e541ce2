import numpy as np
import pytest

from care2vec.errors import DimensionMismatch
from care2vec.numerics import derive_seed, glorot_uniform, identity, make_rng, matmul


class TestMatmul:
    def test_identity(self):
        m = make_rng(1).normal(size=(3, 5))
        np.testing.assert_array_equal(matmul(identity(3), m), m)

    def test_hand_arithmetic(self):
        # 1*5 + 2*6 = 17, 3*5 + 4*6 = 39
        np.testing.assert_array_equal(matmul([[1, 2], [3, 4]], [[5], [6]]), [[17.0], [39.0]])

    def test_associativity(self):
        rng = make_rng(7)
        a, b, c = (rng.normal(size=(4, 4)) for _ in range(3))
        assert np.max(np.abs(matmul(matmul(a, b), c) - matmul(a, matmul(b, c)))) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_non_finite_rejected(self):
        with pytest.raises(FloatingPointError):
            matmul([[1e308, 1e308]], [[1e308], [1e308]])


class TestGlorot:
    def test_unit_bound(self):
        w = glorot_uniform(make_rng(0), 3, 3)
        assert w.shape == (3, 3)
        assert np.all(np.abs(w) <= 1.0)

    def test_deterministic(self):
        a = glorot_uniform(make_rng(5), 20, 10)
        b = glorot_uniform(make_rng(5), 20, 10)
        np.testing.assert_array_equal(a, b)

    def test_mean_within_three_standard_errors(self):
        w = glorot_uniform(make_rng(11), 200, 100).ravel()[:10000]
        limit = np.sqrt(6 / 300)
        se = (limit / np.sqrt(3)) / np.sqrt(w.size)  # sd of U[-L, L] is L / sqrt(3)
        assert abs(w.mean()) < 3 * se
        assert np.all(np.abs(w) <= limit)

    def test_rejects_zero_fan(self):
        with pytest.raises(ValueError):
            glorot_uniform(make_rng(0), 0, 3)


class TestRng:
    def test_stream_equality(self):
        a = make_rng(123).random(1000)
        b = make_rng(123).random(1000)
        np.testing.assert_array_equal(a, b)

    def test_known_stream_prefix(self):
        # frozen values; a change here means reports are no longer reproducible
        expected = [0.6758313379812818, 0.21432320123825765, 0.3094520308816917]
        assert make_rng(2024).random(3).tolist() == expected
        assert derive_seed(9, "fold", 3) == 3784431166846295127

    def test_derived_seeds_are_distinct_and_stable(self):
        seeds = {derive_seed(9, "fold", i) for i in range(50)}
        assert len(seeds) == 50
        assert derive_seed(9, "fold", 3) == derive_seed(9, "fold", 3)
        assert derive_seed(9, "fold", 3) != derive_seed(10, "fold", 3)

    def test_seed_required(self):
        with pytest.raises(ValueError):
            make_rng(None)
