"""Ridge readout and R² scoring shared by every model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import LinalgError, solve_hpd

DEFAULT_ALPHA = 1e-6


@dataclass
class RidgeModel:
    """Linear readout ``y = W f``; ``weights`` has shape (targets, features).

    No separate intercept: feature vectors carry a constant column.
    """

    weights: np.ndarray
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("ridge weights must be finite")

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def predict(self, features) -> np.ndarray:
        """Predictions for a (rows, features) matrix, or one feature vector.

        A single vector with a single target gives a float.
        """
        f = np.asarray(features, dtype=float)
        if f.shape[-1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got {f.shape[-1]}"
            )
        out = f @ self.weights.T
        if f.ndim == 1 and out.shape == (1,):
            return float(out[0])
        return out

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeModel":
        return cls(np.asarray(d["weights"], dtype=float), float(d["alpha"]))


def ridge_fit(X, Y, alpha: float = DEFAULT_ALPHA) -> RidgeModel:
    """Solve ``(X^T X + alpha I) W^T = X^T Y`` with one Cholesky factorization."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or X.shape[0] != Y.shape[0] or X.shape[0] < 1:
        raise LinalgError(f"feature matrix {X.shape} and targets {Y.shape} do not align")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    gram = X.T @ X + alpha * np.eye(X.shape[1])
    w_t = solve_hpd(gram, X.T @ Y)
    return RidgeModel(w_t.T, alpha)


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``.

    For constant ``y_true`` the score is undefined: returns 0.0 when the
    predictions match exactly and ``-inf`` otherwise.
    """
    y = np.asarray(y_true, dtype=float).ravel()
    p = np.asarray(y_pred, dtype=float).ravel()
    if y.size == 0 or y.size != p.size:
        raise ValueError(f"length mismatch or empty input: {y.size} vs {p.size}")
    ss_res = float(np.sum((y - p) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0 if ss_res == 0.0 else -math.inf
    return 1.0 - ss_res / ss_tot
