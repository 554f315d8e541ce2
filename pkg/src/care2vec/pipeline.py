"""Care2Vec two-stage model, baseline recipes and the experiment grid.

Stage one fits the autoencoder on training features and keeps its encoder;
stage two trains a dense classifier on the encoder's output. The ANN and
decision-tree baselines are exposed as recipes with the same
``fit_predict(train, test, seed)`` interface used by cross-validation.
"""
import hashlib
import statistics
import warnings
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .autoencoder import (
    AE_TRAIN_DEFAULTS,
    ENCODING_DIMS,
    AutoencoderSpec,
    FittedEncoder,
    build_autoencoder,
    encode,
    fit_encoder,
)
from .dataset import Scheme, fit_apply_age_scaling, to_binary
from .errors import DimensionMismatch, StageError
from .evaluation import FoldOutput, cross_validate, kfold_split
from .neural import Activation, Loss, NetworkSpec, TrainConfig, forward
from .neural import train as train_network
from .numerics import RNG_ALGORITHM, derive_seed
from .tree import Criterion, fit_tree, predict_proba, predict_tree

DNN_NODES = (40, 100, 300)
DNN_LAYERS = (1, 2)
CLASSIFIER_TRAIN_DEFAULTS = TrainConfig(epochs=300)

LEAKAGE_PER_FOLD = "per_fold"
LEAKAGE_ALL_ROWS = "all_rows"

def classifier_spec(in_dim, nodes, layers, task):
    """in_dim -> nodes (ReLU) x layers -> 7-way softmax, or a single sigmoid for the binary task."""
    task = Scheme(task)
    if task is Scheme.MULTICLASS7:
        return NetworkSpec.chain((in_dim, *[nodes] * layers, 7), output=Activation.SOFTMAX)
    return NetworkSpec.chain((in_dim, *[nodes] * layers, 1), output=Activation.SIGMOID)

def task_loss(task):
    return Loss.CATEGORICAL_CROSSENTROPY if Scheme(task) is Scheme.MULTICLASS7 else Loss.BINARY_CROSSENTROPY

def targets_for(labels, task):
    labels = np.asarray(labels)
    if Scheme(task) is Scheme.MULTICLASS7:
        y = np.zeros((labels.size, 7))
        y[np.arange(labels.size), labels] = 1.0
        return y
    return labels.reshape(-1, 1).astype(np.float64)

def decode_output(out, task):
    """Labels and positive-class scores from network output."""
    if Scheme(task) is Scheme.MULTICLASS7:
        return np.argmax(out, axis=1).astype(np.int64), None
    scores = out[:, 0]
    return (scores >= 0.5).astype(np.int64), scores

def _fit_batch(config, n):
    # small folds (toy data) cannot fill a batch of the configured size
    return config if config.batch_size <= n else replace(config, batch_size=n)

# --------------------------------------------------------------------------
# Care2Vec
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class Care2VecConfig:
    encoding_dim: int = 32
    dnn_hidden_nodes: int = 300
    dnn_hidden_layers: int = 2
    task: Scheme = Scheme.MULTICLASS7
    ae_train: TrainConfig = AE_TRAIN_DEFAULTS
    dnn_train: TrainConfig = CLASSIFIER_TRAIN_DEFAULTS
    seed: int = 0
    extended: bool = False

    def __post_init__(self):
        object.__setattr__(self, "task", Scheme(self.task))
        if not self.extended:
            if self.encoding_dim not in ENCODING_DIMS:
                raise ValueError(f"encoding_dim {self.encoding_dim} not in {ENCODING_DIMS} (set extended=True)")
            if self.dnn_hidden_nodes not in DNN_NODES:
                raise ValueError(f"dnn_hidden_nodes {self.dnn_hidden_nodes} not in {DNN_NODES} (set extended=True)")
            if self.dnn_hidden_layers not in DNN_LAYERS:
                raise ValueError(f"dnn_hidden_layers {self.dnn_hidden_layers} not in {DNN_LAYERS} (set extended=True)")
        elif self.dnn_hidden_nodes < 1 or self.dnn_hidden_layers < 1:
            raise ValueError("classifier needs at least one hidden layer of one node")
        elif self.encoding_dim not in ENCODING_DIMS:
            warnings.warn(f"encoding dim {self.encoding_dim} is outside the grid {ENCODING_DIMS}", stacklevel=3)

    def describe(self):
        return {
            "method": "care2vec",
            "encoding_dim": self.encoding_dim,
            "nodes": self.dnn_hidden_nodes,
            "layers": self.dnn_hidden_layers,
            "task": self.task.value,
            "ae_train": self.ae_train.describe(),
            "dnn_train": self.dnn_train.describe(),
        }

@dataclass
class TrainedPipeline:
    encoder: FittedEncoder
    classifier_spec: NetworkSpec
    classifier_params: object
    preprocess: object
    config: Care2VecConfig
    dnn_history: tuple = ()

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.encoder.input_dim:
            raise DimensionMismatch(f"pipeline expects {self.encoder.input_dim} columns, got {x.shape[1]}")
        return x

    def embed(self, x):
        return encode(self.encoder, self._check(x))

    def output(self, x):
        return forward(self.classifier_spec, self.classifier_params, self.embed(x)).output

    def predict(self, x):
        """Argmax class (lowest index on ties), or score >= 0.5 for the binary task."""
        return decode_output(self.output(x), self.config.task)[0]

    def score(self, x):
        if self.config.task is not Scheme.BINARY:
            raise ValueError("score() is defined for the binary task")
        return self.output(x)[:, 0]

def fit_care2vec(cfg, train, preprocess=None, ae_rows=None):
    """Fit both stages on a preprocessed training set.

    ``ae_rows`` optionally replaces the autoencoder's training matrix
    (used by the all-rows leakage mode); labels are only ever read from
    ``train``.
    """
    if Scheme(train.scheme) is not cfg.task:
        raise ValueError(f"dataset scheme {train.scheme.value} does not match task {cfg.task.value}")
    ae_x = train.features if ae_rows is None else ae_rows
    ae_cfg = _fit_batch(replace(cfg.ae_train, seed=derive_seed(cfg.seed, "autoencoder")), ae_x.shape[0])
    try:
        enc = _cached_encoder(AutoencoderSpec(cfg.encoding_dim, input_dim=train.n_features), ae_x, ae_cfg)
    except Exception as exc:
        raise StageError("autoencoder", exc) from exc
    enc = replace(enc, preprocess=preprocess)

    emb = encode(enc, train.features)
    spec = classifier_spec(cfg.encoding_dim, cfg.dnn_hidden_nodes, cfg.dnn_hidden_layers, cfg.task)
    dnn_cfg = _fit_batch(
        replace(cfg.dnn_train, loss=task_loss(cfg.task), seed=derive_seed(cfg.seed, "classifier")), train.n_rows)
    try:
        result = train_network(spec, dnn_cfg, emb, targets_for(train.labels, cfg.task))
    except Exception as exc:
        raise StageError("classifier", exc) from exc
    return TrainedPipeline(enc, spec, result.params, preprocess, cfg, tuple(result.history))

# Encoder fitting is a pure function of (spec, rows, config). Grid cells that
# differ only in the classifier reuse the encoder instead of refitting it.
_ENCODER_CACHE = OrderedDict()
ENCODER_CACHE_SIZE = 64


def _cached_encoder(ae_spec, x, config):
    x = np.ascontiguousarray(x, dtype=np.float64)
    key = (ae_spec, config, x.shape, hashlib.sha256(x.tobytes()).hexdigest())
    if key in _ENCODER_CACHE:
        _ENCODER_CACHE.move_to_end(key)
        return _ENCODER_CACHE[key]
    enc = fit_encoder(ae_spec, x, config)
    _ENCODER_CACHE[key] = enc
    while len(_ENCODER_CACHE) > ENCODER_CACHE_SIZE:
        _ENCODER_CACHE.popitem(last=False)
    return enc


def clear_encoder_cache():
    _ENCODER_CACHE.clear()


# --------------------------------------------------------------------------
# Recipes for cross-validation
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class Care2VecRecipe:
    config: Care2VecConfig
    leakage: str = LEAKAGE_PER_FOLD

    def describe(self):
        d = self.config.describe()
        d["leakage"] = self.leakage
        return d

    def fit_predict(self, train, test, seed):
        state, train_s, (test_s,) = fit_apply_age_scaling(train, [test])
        ae_rows = None
        if self.leakage == LEAKAGE_ALL_ROWS:
            ae_rows = np.vstack([train_s.features, test_s.features])
        pipe = fit_care2vec(replace(self.config, seed=seed), train_s, state, ae_rows)
        labels, scores = decode_output(pipe.output(test_s.features), self.config.task)
        return FoldOutput(labels, scores)

@dataclass(frozen=True)
class AnnRecipe:
    nodes: int = 40
    layers: int = 1
    task: Scheme = Scheme.MULTICLASS7
    train_config: TrainConfig = CLASSIFIER_TRAIN_DEFAULTS

    def describe(self):
        return {"method": "ann", "nodes": self.nodes, "layers": self.layers,
                "task": Scheme(self.task).value, "train": self.train_config.describe()}

    def fit_predict(self, train, test, seed):
        _, train_s, (test_s,) = fit_apply_age_scaling(train, [test])
        spec = classifier_spec(train.n_features, self.nodes, self.layers, self.task)
        cfg = _fit_batch(replace(self.train_config, loss=task_loss(self.task), seed=seed), train.n_rows)
        params = train_network(spec, cfg, train_s.features, targets_for(train_s.labels, self.task)).params
        labels, scores = decode_output(forward(spec, params, test_s.features).output, self.task)
        return FoldOutput(labels, scores)

@dataclass(frozen=True)
class TreeRecipe:
    criterion: Criterion = Criterion.GINI
    max_depth: int | None = None
    min_samples_split: int = 2

    def describe(self):
        return {"method": "tree", "criterion": Criterion(self.criterion).value,
                "max_depth": self.max_depth, "min_samples_split": self.min_samples_split}

    def fit_predict(self, train, test, seed):
        n_classes = train.scheme.n_classes
        tree = fit_tree(train.features, train.labels, self.criterion, self.max_depth,
                        self.min_samples_split, n_classes=n_classes)
        labels = predict_tree(tree, test.features)
        scores = predict_proba(tree, test.features)[:, 1] if n_classes == 2 else None
        return FoldOutput(labels, scores)

# --------------------------------------------------------------------------
# Experiment grid
# --------------------------------------------------------------------------
TABLE1_NODES = (30, 40, 50, 100, 300)
TABLE2_ROWS = ((40, 1), (100, 1), (300, 1), (300, 2))
TABLE4_ANN_NODES = (40, 100, 300)

@dataclass(frozen=True)
class GridCell:
    table: int
    method: str           # "tree", "ann" or "care2vec"
    task: Scheme
    encoding_dim: int | None = None
    nodes: int | None = None
    layers: int | None = None

    @property
    def key(self):
        return (self.table, self.method, self.task.value, self.encoding_dim, self.nodes, self.layers)

    def label(self):
        if self.method == "tree":
            return "Decision tree (Gini)"
        if self.method == "ann":
            return f"ANN {self.nodes} nodes, {self.layers} layer(s)"
        return f"Care2Vec dim {self.encoding_dim}, {self.nodes} nodes, {self.layers} layer(s)"

def grid_cells(tables=(1, 2, 3, 4)):
    cells = []
    if 1 in tables:
        cells += [GridCell(1, "ann", Scheme.MULTICLASS7, nodes=n, layers=1) for n in TABLE1_NODES]
    if 2 in tables:
        cells += [GridCell(2, "care2vec", Scheme.MULTICLASS7, d, n, l)
                  for d in ENCODING_DIMS for n, l in TABLE2_ROWS]
    if 3 in tables:
        cells.append(GridCell(3, "tree", Scheme.MULTICLASS7))
    if 4 in tables:
        cells.append(GridCell(4, "tree", Scheme.BINARY))
        cells += [GridCell(4, "ann", Scheme.BINARY, nodes=n, layers=1) for n in TABLE4_ANN_NODES]
        cells += [GridCell(4, "care2vec", Scheme.BINARY, d, 300, 1) for d in ENCODING_DIMS]
    return cells

@dataclass(frozen=True)
class GridSettings:
    k: int = 10
    seeds: tuple = (0,)
    tables: tuple = (1, 2, 3, 4)
    leakage: str = LEAKAGE_PER_FOLD
    ae_train: TrainConfig = AE_TRAIN_DEFAULTS
    classifier_train: TrainConfig = CLASSIFIER_TRAIN_DEFAULTS
    tree_max_depth: int | None = None
    tree_min_samples_split: int = 2
    jobs: int = 1

    def describe(self):
        return {"k": self.k, "seeds": list(self.seeds), "leakage": self.leakage,
                "ae_train": self.ae_train.describe(), "classifier_train": self.classifier_train.describe(),
                "tree_max_depth": self.tree_max_depth, "tree_min_samples_split": self.tree_min_samples_split,
                "rng": RNG_ALGORITHM}

def recipe_for(cell, settings):
    if cell.method == "tree":
        return TreeRecipe(Criterion.GINI, settings.tree_max_depth, settings.tree_min_samples_split)
    if cell.method == "ann":
        return AnnRecipe(cell.nodes, cell.layers, cell.task, settings.classifier_train)
    cfg = Care2VecConfig(cell.encoding_dim, cell.nodes, cell.layers, cell.task,
                         settings.ae_train, settings.classifier_train)
    return Care2VecRecipe(cfg, settings.leakage)

@dataclass
class CellResult:
    cell: GridCell
    seed: int
    report: object = None
    error: str | None = None

@dataclass
class GridResult:
    settings: GridSettings
    results: list = field(default_factory=list)

    def cells(self):
        seen, out = set(), []
        for r in self.results:
            if r.cell.key not in seen:
                seen.add(r.cell.key)
                out.append(r.cell)
        return out

    def for_cell(self, cell):
        return [r for r in self.results if r.cell.key == cell.key]

    def summary(self, cell, metric="mean_cv_score"):
        """(median, min, max, n_ok) of a report metric over seeds; None when no seed succeeded."""
        vals = [getattr(r.report, metric) for r in self.for_cell(cell) if r.report is not None]
        vals = [v for v in vals if v is not None]
        if not vals:
            return None
        return statistics.median(vals), min(vals), max(vals), len(vals)

    @property
    def n_failed(self):
        return sum(r.error is not None for r in self.results)

def run_cell(cell, dataset, settings, seed):
    data = to_binary(dataset) if cell.task is Scheme.BINARY else dataset
    folds = kfold_split(data.n_rows, settings.k, seed)
    try:
        report = cross_validate(recipe_for(cell, settings), data, folds, seed=derive_seed(seed, *cell.key[:2]))
    except Exception as exc:  # recorded per cell; the grid carries on
        return CellResult(cell, seed, None, f"{type(exc).__name__}: {exc}")
    report.config["table"] = cell.table
    return CellResult(cell, seed, report)

def _run_batch(tasks):
    return [run_cell(*t) for t in tasks]


def _batches(tasks):
    """Group Care2Vec cells that share an encoder so one worker fits it once."""
    groups = OrderedDict()
    for i, (cell, _, _, seed) in enumerate(tasks):
        key = (seed, cell.table, cell.task, cell.encoding_dim) if cell.method == "care2vec" else i
        groups.setdefault(key, []).append(i)
    return list(groups.values())

def run_experiment_grid(dataset, settings=GridSettings(), cells=None):
    """Cross-validate every grid cell for every seed.

    All cells under one seed share the same fold assignment. Results are
    ordered by seed, then cell, whatever ``settings.jobs`` is.
    """
    if dataset.scheme is not Scheme.MULTICLASS7:
        raise ValueError("the grid starts from the multi-class dataset")
    cells = grid_cells(settings.tables) if cells is None else cells
    tasks = [(cell, dataset, settings, seed) for seed in settings.seeds for cell in cells]
    if settings.jobs > 1:
        batches = _batches(tasks)
        results = [None] * len(tasks)
        with ProcessPoolExecutor(max_workers=settings.jobs) as pool:
            for idx, out in zip(batches, pool.map(_run_batch, [[tasks[i] for i in b] for b in batches])):
                for i, r in zip(idx, out):
                    results[i] = r
    else:
        results = _run_batch(tasks)
    return GridResult(settings, results)

# --------------------------------------------------------------------------
# Architectures used anywhere in the package, for gradient verification
# --------------------------------------------------------------------------
def repo_architectures(input_dim=205):
    """(name, NetworkSpec, Loss) for every network the grids can train."""
    out = []
    for task in (Scheme.MULTICLASS7, Scheme.BINARY):
        for n in sorted(set(TABLE1_NODES) | set(TABLE4_ANN_NODES)):
            out.append((f"ann-{task.value}-{n}x1", classifier_spec(input_dim, n, 1, task), task_loss(task)))
    for d in ENCODING_DIMS:
        out.append((f"autoencoder-d{d}", build_autoencoder(d, input_dim), Loss.MSE))
    for task in (Scheme.MULTICLASS7, Scheme.BINARY):
        for d in ENCODING_DIMS:
            for n in DNN_NODES:
                for l in DNN_LAYERS:
                    out.append((f"dnn-{task.value}-d{d}-{n}x{l}", classifier_spec(d, n, l, task), task_loss(task)))
    return out
