"""Hot inner loops, each with a compiled-loop and a vectorized-numpy version.

``split_gains`` and ``adam_update`` are bound to the implementation picked by
:mod:`care2vec._accel`. Both variants stay importable so tests and the
benchmark can compare them directly.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

GINI = 0
ENTROPY = 1


# --------------------------------------------------------------------------
# CART split search
# --------------------------------------------------------------------------
@njit
def _impurity(counts, total, criterion):
    if criterion == GINI:
        s = 0.0
        for c in counts:
            p = c / total
            s += p * p
        return 1.0 - s
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * np.log2(p)
    return h


@njit
def _split_gains_loop(x, y, n_classes, criterion):
    n, n_feat = x.shape
    gains = np.full((n_feat, max(n - 1, 0)), -np.inf)
    thresholds = np.zeros((n_feat, max(n - 1, 0)))
    total = np.zeros(n_classes)
    for i in range(n):
        total[y[i]] += 1.0
    parent = _impurity(total, float(n), criterion)
    left = np.zeros(n_classes)
    right = np.zeros(n_classes)
    for f in range(n_feat):
        col = x[:, f].copy()
        order = np.argsort(col)
        left[:] = 0.0
        right[:] = total
        for i in range(n - 1):
            k = y[order[i]]
            left[k] += 1.0
            right[k] -= 1.0
            a = col[order[i]]
            b = col[order[i + 1]]
            if a < b:
                n_left = float(i + 1)
                n_right = float(n - i - 1)
                child = (n_left * _impurity(left, n_left, criterion)
                         + n_right * _impurity(right, n_right, criterion)) / n
                gains[f, i] = parent - child
                thresholds[f, i] = 0.5 * (a + b)
    return gains, thresholds


def _impurity_rows(counts, totals, criterion):
    p = counts / totals[:, None]
    if criterion == GINI:
        return 1.0 - np.sum(p * p, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -np.sum(terms, axis=1)


def _split_gains_numpy(x, y, n_classes, criterion):
    n, n_feat = x.shape
    gains = np.full((n_feat, max(n - 1, 0)), -np.inf)
    thresholds = np.zeros((n_feat, max(n - 1, 0)))
    if n < 2:
        return gains, thresholds
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    total = onehot.sum(axis=0)
    parent = _impurity_rows(total[None, :], np.array([float(n)]), criterion)[0]
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    for f in range(n_feat):
        order = np.argsort(x[:, f])
        col = x[order, f]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        child = (n_left * _impurity_rows(left, n_left, criterion)
                 + n_right * _impurity_rows(right, n_right, criterion)) / n
        valid = col[:-1] < col[1:]
        gains[f, valid] = parent - child[valid]
        thresholds[f, valid] = 0.5 * (col[:-1][valid] + col[1:][valid])
    return gains, thresholds


def split_gains_numba(x, y, n_classes, criterion):
    """Impurity decrease and midpoint threshold for every (feature, cut).

    Row ``f`` of both outputs is indexed by cut position in the sorted order
    of feature ``f``; positions that do not separate two distinct values hold
    ``-inf`` gain.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    return _split_gains_loop(x, y, int(n_classes), int(criterion))


def split_gains_numpy(x, y, n_classes, criterion):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    return _split_gains_numpy(x, y, int(n_classes), int(criterion))


# --------------------------------------------------------------------------
# Adam step
# --------------------------------------------------------------------------
@njit
def _adam_loop(param, grad, m, v, step, beta1, beta2, eps_hat):
    for i in range(param.size):
        g = grad[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * g
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
        param[i] -= step * m[i] / (np.sqrt(v[i]) + eps_hat)


def _adam_scalars(lr, beta1, beta2, eps, t):
    # bias corrections folded into the step size and epsilon
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    return lr * np.sqrt(c2) / c1, eps * np.sqrt(c2)


def adam_update_numba(param, grad, m, v, lr, beta1, beta2, eps, t):
    """In-place Adam update on same-shaped contiguous float64 arrays."""
    step, eps_hat = _adam_scalars(lr, beta1, beta2, eps, t)
    _adam_loop(param.reshape(-1), grad.reshape(-1), m.reshape(-1), v.reshape(-1),
               float(step), float(beta1), float(beta2), float(eps_hat))


def adam_update_numpy(param, grad, m, v, lr, beta1, beta2, eps, t):
    step, eps_hat = _adam_scalars(lr, beta1, beta2, eps, t)
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    param -= step * m / (np.sqrt(v) + eps_hat)


if USE_NUMBA:
    split_gains = split_gains_numba
    adam_update = adam_update_numba
else:
    split_gains = split_gains_numpy
    adam_update = adam_update_numpy
