"""CART classification tree grown by exhaustive recursive binary splitting."""
import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EmptyNode
from .numerics import as_matrix

# gains closer than this are treated as equal so tie-breaks are stable
TIE_TOL = 1e-12


class Criterion(enum.Enum):
    GINI = "gini"
    CROSS_ENTROPY = "cross_entropy"

    @property
    def code(self):
        return kernels.GINI if self is Criterion.GINI else kernels.ENTROPY


def gini(class_counts):
    c = np.asarray(class_counts, dtype=np.float64)
    total = c.sum()
    if total <= 0:
        raise EmptyNode("impurity of an empty node is undefined")
    p = c / total
    return float(1.0 - np.sum(p * p))


def cross_entropy(class_counts):
    c = np.asarray(class_counts, dtype=np.float64)
    total = c.sum()
    if total <= 0:
        raise EmptyNode("impurity of an empty node is undefined")
    p = c[c > 0] / total
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    threshold: float
    impurity_decrease: float


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple

    @property
    def majority_class(self):
        return int(np.argmax(self.class_counts))  # argmax picks the lowest index on ties

    @property
    def n_samples(self):
        return int(sum(self.class_counts))


@dataclass(frozen=True)
class Node:
    split: SplitCandidate
    left: object
    right: object
    class_counts: tuple


def best_split(x, y, criterion=Criterion.GINI, n_classes=None):
    """Best (feature, midpoint threshold) over all features, or None.

    Maximises weighted impurity decrease; among candidates within TIE_TOL of
    the best, the lowest feature index and then the lowest threshold win.
    """
    x = as_matrix(x, "x")
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] < 2:
        return None
    if n_classes is None:
        n_classes = int(y.max()) + 1
    gains, thresholds = kernels.split_gains(x, y, n_classes, Criterion(criterion).code)
    top = gains.max()
    if not top > TIE_TOL:
        return None
    hits = np.argwhere(gains >= top - TIE_TOL)
    # rows of argwhere are (feature, sorted position) in lexicographic order
    f, pos = hits[0]
    return SplitCandidate(int(f), float(thresholds[f, pos]), float(gains[f, pos]))


def fit_tree(x, y, criterion=Criterion.GINI, max_depth=None, min_samples_split=2, n_classes=None):
    x = as_matrix(x, "x")
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] != y.shape[0] or y.shape[0] < 1:
        raise DimensionMismatch(f"x has {x.shape[0]} rows, y has {y.shape[0]} labels")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    criterion = Criterion(criterion)
    return _grow(x, y, criterion, max_depth, min_samples_split, n_classes, 0)


def _grow(x, y, criterion, max_depth, min_split, n_classes, depth):
    counts = tuple(int(c) for c in np.bincount(y, minlength=n_classes))
    if (max_depth is not None and depth >= max_depth) or len(y) < min_split:
        return Leaf(counts)
    split = best_split(x, y, criterion, n_classes)
    if split is None:
        return Leaf(counts)
    go_left = x[:, split.feature_index] <= split.threshold
    return Node(
        split,
        _grow(x[go_left], y[go_left], criterion, max_depth, min_split, n_classes, depth + 1),
        _grow(x[~go_left], y[~go_left], criterion, max_depth, min_split, n_classes, depth + 1),
        counts,
    )


def _leaf_for(tree, row):
    node = tree
    while isinstance(node, Node):
        node = node.left if row[node.split.feature_index] <= node.split.threshold else node.right
    return node


def n_features_used(tree):
    if isinstance(tree, Leaf):
        return -1
    return max(tree.split.feature_index, n_features_used(tree.left), n_features_used(tree.right))


def _check_width(tree, x):
    x = as_matrix(x, "x")
    if n_features_used(tree) >= x.shape[1]:
        raise DimensionMismatch(f"tree splits on feature {n_features_used(tree)}, input has {x.shape[1]} columns")
    return x


def predict_tree(tree, x):
    x = _check_width(tree, x)
    return np.array([_leaf_for(tree, row).majority_class for row in x], dtype=np.int64)


def predict_proba(tree, x):
    x = _check_width(tree, x)
    out = []
    for row in x:
        counts = np.asarray(_leaf_for(tree, row).class_counts, dtype=np.float64)
        out.append(counts / counts.sum())
    return np.array(out)


def internal_nodes(tree):
    if isinstance(tree, Leaf):
        return []
    return [tree] + internal_nodes(tree.left) + internal_nodes(tree.right)


def depth(tree):
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.left), depth(tree.right))


def dump_tree(tree, feature_names=None, indent="  "):
    """Indented text rendering: one line per node with threshold and counts."""
    lines = []

    def name(i):
        return feature_names[i] if feature_names is not None else f"x[{i}]"

    def walk(node, level):
        pad = indent * level
        if isinstance(node, Leaf):
            lines.append(f"{pad}leaf class={node.majority_class} counts={list(node.class_counts)}")
            return
        s = node.split
        lines.append(f"{pad}if {name(s.feature_index)} <= {s.threshold:g} "
                     f"(decrease={s.impurity_decrease:.6f}, counts={list(node.class_counts)})")
        walk(node.left, level + 1)
        lines.append(f"{pad}else")
        walk(node.right, level + 1)

    walk(tree, 0)
    return "\n".join(lines) + "\n"
