from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..errors import ConfigError, EmptyTrainingSet, FeatureCountMismatch, NonFiniteInput
from . import _kernels


class Growth(enum.Enum):
    LEVEL_WISE = "LevelWise"
    LEAF_WISE = "LeafWise"


@dataclass(frozen=True)
class GbtHyperparams:
    learning_rate: float = 0.1
    n_estimators: int = 100
    max_depth: int = 3
    growth: Growth = Growth.LEVEL_WISE
    max_leaves: int = 31
    min_samples_leaf: int = 1
    min_samples_split: int = 2

    def __post_init__(self):
        if isinstance(self.growth, str):
            object.__setattr__(self, "growth", Growth(self.growth))
        if not 0 < self.learning_rate <= 1:
            raise ConfigError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        for name in ("n_estimators", "max_depth", "min_samples_leaf", "min_samples_split"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.growth is Growth.LEAF_WISE and self.max_leaves < 2:
            raise ConfigError("leaf-wise growth needs max_leaves >= 2")

    @property
    def node_capacity(self) -> int:
        if self.growth is Growth.LEAF_WISE:
            return min(2 * self.max_leaves - 1, 2 ** (self.max_depth + 1) - 1)
        return 2 ** (self.max_depth + 1) - 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["growth"] = self.growth.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GbtHyperparams":
        return cls(**d)


# Utility-B column of the published tuning table, keyed by resolution minutes.
# Level-wise depth is not tuned there and stays at the scikit-learn default of 3.
TABLE3_UTILITY_B = {
    Growth.LEVEL_WISE: {5: (0.1, 200, 3), 15: (0.075, 150, 3), 30: (0.1, 100, 3), 60: (0.1, 50, 3)},
    Growth.LEAF_WISE: {5: (0.1, 200, 7), 15: (0.075, 150, 7), 30: (0.1, 100, 7), 60: (0.05, 50, 7)},
}


def default_hyperparams(resolution_minutes: int, growth: Growth = Growth.LEVEL_WISE, **overrides) -> GbtHyperparams:
    lr, n_est, depth = TABLE3_UTILITY_B[Growth(growth)][resolution_minutes]
    hp = GbtHyperparams(learning_rate=lr, n_estimators=n_est, max_depth=depth, growth=Growth(growth))
    return replace(hp, **overrides) if overrides else hp


@dataclass(frozen=True)
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        # unused slots are leaves with no parent; count reachable nodes
        return len(self._reachable())

    def _reachable(self) -> list:
        out, stack = [], [0]
        while stack:
            nd = stack.pop()
            out.append(nd)
            if self.feature[nd] >= 0:
                stack.extend((self.right[nd], self.left[nd]))
        return sorted(out)

    def leaves(self) -> list:
        return [nd for nd in self._reachable() if self.feature[nd] < 0]

    def depth(self) -> int:
        def rec(nd):
            if self.feature[nd] < 0:
                return 0
            return 1 + max(rec(self.left[nd]), rec(self.right[nd]))
        return rec(0)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, row in enumerate(X):
            nd = 0
            while self.feature[nd] >= 0:
                nd = self.left[nd] if row[self.feature[nd]] <= self.threshold[nd] else self.right[nd]
            out[i] = nd
        return out

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        nodes = []
        for nd in self._reachable():
            if self.feature[nd] >= 0:
                nodes.append({"id": int(nd), "feature": int(self.feature[nd]), "threshold": float(self.threshold[nd]),
                              "left": int(self.left[nd]), "right": int(self.right[nd])})
            else:
                nodes.append({"id": int(nd), "value": float(self.value[nd])})
        return {"nodes": nodes}


@dataclass(frozen=True)
class GbtEnsemble:
    """``predict(x) = base_value + learning_rate * sum(tree(x))``."""

    base_value: float
    hyperparams: GbtHyperparams
    n_features: int
    _feature: np.ndarray
    _threshold: np.ndarray
    _left: np.ndarray
    _right: np.ndarray
    _value: np.ndarray
    n_trees: int

    @property
    def trees(self) -> list:
        return [
            RegressionTree(self._feature[t], self._threshold[t], self._left[t], self._right[t], self._value[t])
            for t in range(self.n_trees)
        ]

    def predict(self, features) -> np.ndarray:
        return predict(self, features)

    def to_json(self) -> str:
        return json.dumps({
            "base_value": self.base_value,
            "hyperparams": self.hyperparams.to_dict(),
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        })


def _check_inputs(features, targets):
    X = np.ascontiguousarray(features, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if X.ndim != 2:
        raise FeatureCountMismatch("features must be a 2-D matrix")
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if Y.shape[0] != X.shape[0]:
        raise FeatureCountMismatch(f"{X.shape[0]} feature rows but {Y.shape[0]} targets")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NonFiniteInput("features and targets must be finite")
    return X, Y


def presort(X: np.ndarray) -> np.ndarray:
    """Per-feature stable sort order, shaped (n_features, n_rows)."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


def fit_many(features, targets, hp: GbtHyperparams, seed: int = 0, order=None) -> list:
    """Fit one ensemble per target column on shared features.

    ``seed`` is accepted for interface stability; fitting is deterministic
    (no row or column subsampling).
    """
    X, Y = _check_inputs(features, targets)
    if Y.ndim == 1:
        Y = Y[:, None]
    Y = np.ascontiguousarray(Y)
    if order is None:
        order = presort(X)
    base, feat, thr, left, right, value, n_trees = _kernels.boost_many(
        np.ascontiguousarray(X.T), order, Y, float(hp.learning_rate), int(hp.n_estimators), int(hp.max_depth),
        hp.growth is Growth.LEAF_WISE, int(hp.max_leaves), int(hp.min_samples_leaf),
        int(hp.min_samples_split), int(hp.node_capacity),
    )
    out = []
    for o in range(Y.shape[1]):
        k = int(n_trees[o])
        out.append(GbtEnsemble(float(base[o]), hp, X.shape[1], feat[o, :k], thr[o, :k], left[o, :k],
                               right[o, :k], value[o, :k], k))
    return out


def fit(features, targets, hp: GbtHyperparams, seed: int = 0) -> GbtEnsemble:
    targets = np.asarray(targets, dtype=float)
    if targets.ndim != 1:
        raise FeatureCountMismatch("fit expects a target vector; use fit_many for several outputs")
    return fit_many(features, targets, hp, seed)[0]


def predict(model: GbtEnsemble, features) -> np.ndarray:
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(features, dtype=float)))
    if X.shape[1] != model.n_features:
        raise FeatureCountMismatch(f"model has {model.n_features} features, got {X.shape[1]}")
    if model.n_trees == 0:
        return np.full(X.shape[0], model.base_value)
    return _kernels.predict_trees(X, model.base_value, model.hyperparams.learning_rate, model._feature,
                                  model._threshold, model._left, model._right, model._value, model.n_trees)


def empty_ensemble(base_value: float, n_features: int, hp: GbtHyperparams) -> GbtEnsemble:
    cap = hp.node_capacity
    z = np.zeros((0, cap))
    zi = np.zeros((0, cap), dtype=np.int64)
    return GbtEnsemble(float(base_value), hp, n_features, zi, z, zi, zi, z, 0)
