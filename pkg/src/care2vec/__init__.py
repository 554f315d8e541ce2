"""Care2Vec: autoencoder embeddings + dense classifiers for SCADI self-care data.

Includes the decision-tree and shallow-ANN baselines and a k-fold
cross-validation / ROC harness for reproducing the published tables.
"""
__version__ = "0.1.0"

from ._accel import backend
from .dataset import Dataset, ScadiSchema, Scheme, load_scadi, to_binary
from .evaluation import cross_validate, kfold_split, roc_auc
from .pipeline import Care2VecConfig, fit_care2vec, run_experiment_grid

__all__ = [
    "Care2VecConfig",
    "Dataset",
    "ScadiSchema",
    "Scheme",
    "backend",
    "cross_validate",
    "fit_care2vec",
    "kfold_split",
    "load_scadi",
    "roc_auc",
    "run_experiment_grid",
    "to_binary",
]
