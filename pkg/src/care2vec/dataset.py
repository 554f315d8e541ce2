"""SCADI CSV ingestion, label schemes and train-fold preprocessing."""
import csv
import enum
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import MissingFile, SchemaMismatch, WrongScheme

CLASS_LABELS = tuple(f"Class{i}" for i in range(1, 8))
NO_ISSUE_CLASS = 6  # Class7: no self-care problem
SCADI_CLASS_COUNTS = (2, 7, 1, 12, 3, 29, 16)

_CLASS_RE = re.compile(r"^class\s*([1-7])$", re.IGNORECASE)
_GENDER = {"0": 0.0, "1": 1.0, "m": 0.0, "male": 0.0, "f": 1.0, "female": 1.0}


class Scheme(enum.Enum):
    MULTICLASS7 = "multi"
    BINARY = "binary"

    @property
    def n_classes(self):
        return 7 if self is Scheme.MULTICLASS7 else 2


@dataclass(frozen=True)
class ScadiSchema:
    """Expected layout of a SCADI export.

    Columns are matched by name; every column other than gender, age and
    class is treated as a binary activity indicator, kept in file order.
    """

    n_rows: int | None = 70
    n_feature_columns: int = 205
    gender_column: str = "Gender"
    age_column: str = "Age"
    class_column: str = "Classes"
    class_labels: tuple = CLASS_LABELS

    @property
    def n_activity_columns(self):
        return self.n_feature_columns - 2


# Accepts any row count; used for fixtures and partial exports.
ANY_ROWS = ScadiSchema(n_rows=None)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    scheme: Scheme
    feature_names: tuple
    age_column: str = "Age"

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("features must be 2-D")
        if labels.shape != (features.shape[0],):
            raise ValueError(f"{labels.shape[0]} labels for {features.shape[0]} rows")
        if len(self.feature_names) != features.shape[1]:
            raise ValueError("feature_names does not match the feature count")
        if np.isnan(features).any():
            raise ValueError("features contain missing values")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def age_index(self):
        return self.feature_names.index(self.age_column)

    def class_counts(self):
        return tuple(int(c) for c in np.bincount(self.labels, minlength=self.scheme.n_classes))

    def subset(self, rows):
        rows = np.asarray(rows)
        return replace(self, features=self.features[rows], labels=self.labels[rows])

    def with_features(self, features):
        return replace(self, features=features)


@dataclass(frozen=True)
class PreprocessState:
    age_min: float
    age_max: float
    age_index: int
    applied: bool = field(default=True)

    def transform(self, features):
        out = np.array(features, dtype=np.float64)
        span = self.age_max - self.age_min
        col = out[:, self.age_index]
        out[:, self.age_index] = 0.0 if span == 0 else (col - self.age_min) / span
        return out


def bundled_fixture():
    """Path to the 6-row synthetic SCADI-layout CSV shipped with the package."""
    return resources.files("care2vec").joinpath("data/toy_scadi.csv")


def parse_class(raw, row, column):
    text = raw.strip()
    if text.isdigit() and 1 <= int(text) <= 7:
        return int(text) - 1
    m = _CLASS_RE.match(text)
    if m:
        return int(m.group(1)) - 1
    raise SchemaMismatch(f"unknown class label {raw!r}", row=row, column=column)


def load_scadi(path, schema=ScadiSchema()):
    """Read a SCADI CSV into a multi-class :class:`Dataset`.

    Feature order is gender, age, then the activity indicators in file
    order. Gender is mapped to {0, 1}; activity values must be 0 or 1; the
    class column takes codes 1-7 or ``Class1``..``Class7`` (any case).
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaMismatch("file is empty; expected a header row", row=1)
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not body:
        raise SchemaMismatch("file has a header but no data rows", row=2)

    for name in (schema.gender_column, schema.age_column, schema.class_column):
        if name not in header:
            raise SchemaMismatch(f"required column {name!r} not in header", row=1, column=name)
    if len(set(header)) != len(header):
        raise SchemaMismatch("duplicate column names in header", row=1)
    gi = header.index(schema.gender_column)
    ai = header.index(schema.age_column)
    ci = header.index(schema.class_column)
    activity_idx = [i for i in range(len(header)) if i not in (gi, ai, ci)]
    if len(activity_idx) != schema.n_activity_columns:
        raise SchemaMismatch(
            f"expected {schema.n_activity_columns} activity columns, found {len(activity_idx)}", row=1
        )
    if schema.n_rows is not None and len(body) != schema.n_rows:
        raise SchemaMismatch(
            f"expected {schema.n_rows} data rows, found {len(body)}", row=len(body) + 2
        )

    features = np.empty((len(body), schema.n_feature_columns))
    labels = np.empty(len(body), dtype=np.int64)
    for r, cells in enumerate(body):
        line = r + 2
        if len(cells) != len(header):
            raise SchemaMismatch(f"{len(cells)} cells, header has {len(header)}", row=line)
        g = cells[gi].strip().lower()
        if g not in _GENDER:
            raise SchemaMismatch(f"gender value {cells[gi]!r} not recognised", row=line, column=header[gi])
        features[r, 0] = _GENDER[g]
        try:
            age = float(cells[ai])
        except ValueError:
            raise SchemaMismatch(f"non-numeric age {cells[ai]!r}", row=line, column=header[ai]) from None
        if not np.isfinite(age):
            raise SchemaMismatch(f"age {cells[ai]!r} is not finite", row=line, column=header[ai])
        features[r, 1] = age
        for j, ci_ in enumerate(activity_idx):
            v = cells[ci_].strip()
            if v not in ("0", "1", "0.0", "1.0"):
                raise SchemaMismatch(f"activity value {v!r} is not 0/1", row=line, column=header[ci_])
            features[r, 2 + j] = float(v)
        labels[r] = parse_class(cells[ci], line, header[ci])

    names = (schema.gender_column, schema.age_column) + tuple(header[i] for i in activity_idx)
    return Dataset(features, labels, Scheme.MULTICLASS7, names, age_column=schema.age_column)


def binary_labels(labels):
    """1 for the no-issue class (Class7), 0 otherwise."""
    return (np.asarray(labels) == NO_ISSUE_CLASS).astype(np.int64)


def to_binary(d):
    if d.scheme is not Scheme.MULTICLASS7:
        raise WrongScheme(f"dataset is already {d.scheme.value}")
    return replace(d, labels=binary_labels(d.labels), scheme=Scheme.BINARY)


def fit_apply_age_scaling(train, others=()):
    """Min-max scale the age column with statistics from ``train`` only.

    Returns the fitted state, the scaled training set and the scaled
    ``others`` (in order). A constant training age maps every age to 0.
    """
    if train.n_rows == 0:
        raise ValueError("training set is empty")
    idx = train.age_index
    ages = train.features[:, idx]
    state = PreprocessState(float(ages.min()), float(ages.max()), idx)
    scaled = [d.with_features(state.transform(d.features)) for d in (train, *others)]
    return state, scaled[0], scaled[1:]


def make_scadi_like(seed=0, class_counts=SCADI_CLASS_COUNTS, n_activity=203):
    """Synthetic data with the SCADI layout and class balance.

    Not the real dataset: activity indicators are drawn from per-class
    Bernoulli profiles so classes are learnable. For smoke tests, timing and
    demos only.
    """
    from .numerics import make_rng

    rng = make_rng(seed)
    n_classes = len(class_counts)
    profiles = rng.uniform(0.05, 0.95, size=(n_classes, n_activity))
    labels = np.repeat(np.arange(n_classes), class_counts)
    labels = labels[rng.permutation(labels.size)]
    acts = (rng.random((labels.size, n_activity)) < profiles[labels]).astype(float)
    gender = rng.integers(0, 2, size=labels.size).astype(float)
    age = rng.integers(2, 19, size=labels.size).astype(float)
    features = np.column_stack([gender, age, acts])
    names = ("Gender", "Age") + tuple(f"act{i}" for i in range(n_activity))
    return Dataset(features, labels, Scheme.MULTICLASS7, names)


def write_scadi_csv(d, path, class_column="Classes"):
    """Write a multi-class Dataset in the layout :func:`load_scadi` reads."""
    if d.scheme is not Scheme.MULTICLASS7:
        raise WrongScheme("only multi-class datasets can be written")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(d.feature_names) + [class_column])
        for row, label in zip(d.features, d.labels):
            cells = [f"{v:g}" for v in row]
            w.writerow(cells + [CLASS_LABELS[label]])
