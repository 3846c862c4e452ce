"""scikit-learn style estimator over the full pipeline.

X rows are the two modality vectors concatenated as [derm | clin]; y rows
are the seven attribute labels followed by the melanoma label. fit() runs
graph construction on the training labels, node encoding, and the training
loop; predict_proba() returns the eight per-label probabilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .constants import N_ATTRIBUTES
from .dataset import Case, CaseSet, split
from .embedding import encode_all_nodes, load_embeddings, one_hot_node_features
from .errors import ConfigError
from .evaluation import auc
from .model import Hyperparameters, build_graph_artifacts, train
from .validation import check_binary, check_matrix


def _caseset_from_arrays(X: np.ndarray, y: np.ndarray, prefix: str) -> CaseSet:
    d = X.shape[1] // 2
    cases = [
        Case(
            id=f"{prefix}{i:06d}",
            attr_labels=y[i, :N_ATTRIBUTES],
            mel_label=int(y[i, N_ATTRIBUTES]),
            derm_features=X[i, :d],
            clin_features=X[i, d:],
        )
        for i in range(X.shape[0])
    ]
    return CaseSet(cases=tuple(cases))


class ChecklistGraphClassifier(BaseEstimator):
    """Attributes-first melanoma classifier over a mined attribute graph.

    Parameters mirror the training hyperparameters; see Hyperparameters for
    semantics. embeddings_path selects the word-vector file for node
    encoding; None falls back to one-hot node features.
    """

    def __init__(
        self,
        delta=0.4,
        gamma=(1 / 3, 1 / 3, 1 / 3),
        order=3,
        mu=None,
        tau=2.0,
        lam=1.0,
        learning_rate=1e-5,
        max_epochs=150,
        patience=50,
        batch_size=32,
        graph_dim=None,
        alpha=0.5,
        beta=0.5,
        min_out=1,
        max_out=3,
        embeddings_path=None,
        val_fraction=0.2,
        random_state=0,
    ):
        self.delta = delta
        self.gamma = gamma
        self.order = order
        self.mu = mu
        self.tau = tau
        self.lam = lam
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.batch_size = batch_size
        self.graph_dim = graph_dim
        self.alpha = alpha
        self.beta = beta
        self.min_out = min_out
        self.max_out = max_out
        self.embeddings_path = embeddings_path
        self.val_fraction = val_fraction
        self.random_state = random_state

    def _hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(
            delta=self.delta,
            gamma=tuple(self.gamma),
            order=self.order,
            mu=self.mu,
            tau=self.tau,
            lam=self.lam,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            batch_size=self.batch_size,
            graph_dim=self.graph_dim,
            seed=self.random_state,
        )

    def _split_features(self, X: np.ndarray) -> np.ndarray:
        X = check_matrix(X, name="X")
        if X.shape[1] % 2 != 0:
            raise ConfigError("X must concatenate two equal-length modality vectors per row")
        return X

    def fit(self, X, y, validation=None):
        """Train; validation is an optional (X_val, y_val) pair.

        Without an explicit validation set, val_fraction of the rows is
        carved out deterministically from random_state.
        """
        X = self._split_features(X)
        y = check_binary(y, N_ATTRIBUTES + 1, name="y")
        if y.shape[0] != X.shape[0]:
            raise ConfigError("X and y must have the same number of rows")
        hyper = self._hyperparameters()

        if validation is not None:
            X_val, y_val = validation
            X_val = self._split_features(X_val)
            y_val = check_binary(y_val, N_ATTRIBUTES + 1, name="y_val")
            train_set = _caseset_from_arrays(X, y, "train")
            val_set = _caseset_from_arrays(X_val, y_val, "val")
        else:
            if not 0.0 < self.val_fraction < 1.0:
                raise ConfigError("val_fraction must lie in (0, 1)")
            full = _caseset_from_arrays(X, y, "case")
            train_set, val_set, _ = split(
                full, (1.0 - self.val_fraction, self.val_fraction, 0.0), self.random_state
            )

        if self.embeddings_path is not None:
            node_features = encode_all_nodes(load_embeddings(self.embeddings_path))
        else:
            node_features = one_hot_node_features()
        artifacts = build_graph_artifacts(
            train_set,
            node_features,
            alpha=self.alpha,
            beta=self.beta,
            min_out=self.min_out,
            max_out=self.max_out,
            order=hyper.order,
        )
        self.model_ = train(train_set, val_set, hyper, artifacts)
        self.n_features_in_ = X.shape[1]
        self.feature_dim_ = X.shape[1] // 2
        self.attribute_weights_ = self.model_.attribute_weights()
        self.threshold_ = self.model_.threshold
        self.best_epoch_ = self.model_.best_epoch
        self.history_ = self.model_.history
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ConfigError("estimator is not fitted; call fit first")

    def predict_proba(self, X) -> np.ndarray:
        """(n, 8) probabilities: seven attributes then melanoma."""
        self._check_fitted()
        X = self._split_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        d = self.feature_dim_
        y7hat, ymhat = self.model_.predict(X[:, :d], X[:, d:])
        return np.column_stack([y7hat, ymhat])

    def predict(self, X) -> np.ndarray:
        """Binary predictions: attributes at 0.5, melanoma at the stored threshold."""
        proba = self.predict_proba(X)
        out = np.zeros_like(proba, dtype=np.int64)
        out[:, :N_ATTRIBUTES] = proba[:, :N_ATTRIBUTES] >= 0.5
        out[:, N_ATTRIBUTES] = proba[:, N_ATTRIBUTES] >= self.threshold_
        return out

    def score(self, X, y) -> float:
        """Mean AUC over the labels that have both classes present."""
        proba = self.predict_proba(X)
        y = check_binary(y, N_ATTRIBUTES + 1, name="y")
        aucs = []
        for j in range(N_ATTRIBUTES + 1):
            if len(np.unique(y[:, j])) == 2:
                aucs.append(auc(proba[:, j], y[:, j]))
        if not aucs:
            raise ConfigError("no label in y has both classes present")
        return float(np.mean(aucs))
