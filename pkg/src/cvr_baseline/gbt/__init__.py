"""Gradient-boosted regression trees with level-wise or leaf-wise growth."""
from .model import (
    TABLE3_UTILITY_B,
    GbtEnsemble,
    GbtHyperparams,
    Growth,
    RegressionTree,
    default_hyperparams,
    empty_ensemble,
    fit,
    fit_many,
    predict,
    presort,
)

__all__ = [
    "TABLE3_UTILITY_B", "GbtEnsemble", "GbtHyperparams", "Growth", "RegressionTree",
    "default_hyperparams", "empty_ensemble", "fit", "fit_many", "predict", "presort",
]
