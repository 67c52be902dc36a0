"""Random subspace ensemble classification."""

from .classifiers import BaseKind, decision_score, gamma_mle, loo_knn_error
from .criteria import CriterionConfig, select_optimal
from .dataset import ClassSplit, LabeledDataset, Subspace, class_split, restrict
from .ensemble import (EnsembleConfig, RaseModel, feature_ranking, fit, fit_iterative,
                       misclassification_rate, predict, predict_score, select_threshold)
from .errors import (DataError, DimensionMismatch, EmptyClass, FitFailure, IndexOutOfRange,
                     InvalidBound, RaseError, SchemaError)
from .sampling import coverage_probability, sample_uniform, sample_weighted, update_weights
from .simulation import SimModelSpec, generate, signal_oracle

__all__ = [
    "BaseKind", "ClassSplit", "CriterionConfig", "DataError", "DimensionMismatch",
    "EmptyClass", "EnsembleConfig", "FitFailure", "IndexOutOfRange", "InvalidBound",
    "LabeledDataset", "RaseError", "RaseModel", "SchemaError", "SimModelSpec", "Subspace",
    "class_split", "coverage_probability", "decision_score", "feature_ranking", "fit",
    "fit_iterative", "gamma_mle", "generate", "loo_knn_error", "misclassification_rate",
    "predict", "predict_score", "restrict", "sample_uniform", "sample_weighted",
    "select_optimal", "select_threshold", "signal_oracle", "update_weights",
]
