"""Closed-form ridge regression with an unpenalized intercept.

Serves as the second learner next to the factorization machine. The
coefficients solve the regularized normal equations of the augmented
system [1 X], with the penalty applied to the slope block only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..matio import read_matrix, write_matrix

__all__ = [
    "RidgeModel",
    "ridge_train",
    "ridge_predict",
    "ridge_predict_batch",
    "ridge_batch_predictor",
    "save_ridge",
    "load_ridge",
]


@dataclass(frozen=True)
class RidgeModel:
    intercept: float
    beta: np.ndarray
    lam: float


def ridge_train(x, y, lam: float) -> RidgeModel:
    """Solve the penalized normal equations exactly (lam > 0)."""
    if lam <= 0.0:
        raise ValueError("regularization strength must be positive")
    y = np.asarray(y, dtype=np.float64).ravel()
    sparse = sp.issparse(x)
    n, d = x.shape
    if n == 0 or d == 0:
        raise ValueError("training data must be non-empty")
    if y.shape[0] != n:
        raise ValueError(f"response length {y.shape[0]} != row count {n}")

    if sparse:
        gram = np.asarray((x.T @ x).todense(), dtype=np.float64)
        col_sums = np.asarray(x.sum(axis=0), dtype=np.float64).ravel()
        xty = np.asarray(x.T @ y, dtype=np.float64).ravel()
    else:
        x = np.asarray(x, dtype=np.float64)
        gram = x.T @ x
        col_sums = x.sum(axis=0)
        xty = x.T @ y

    system = np.empty((d + 1, d + 1))
    system[0, 0] = n
    system[0, 1:] = col_sums
    system[1:, 0] = col_sums
    system[1:, 1:] = gram + lam * np.eye(d)
    rhs = np.concatenate(([y.sum()], xty))
    solution = np.linalg.solve(system, rhs)
    return RidgeModel(intercept=float(solution[0]), beta=solution[1:], lam=lam)


def ridge_predict_batch(model: RidgeModel, x) -> np.ndarray:
    if sp.issparse(x):
        return np.asarray(x @ model.beta).ravel() + model.intercept
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.beta.shape[0]:
        raise ValueError(
            f"expected (n, {model.beta.shape[0]}) rows, got shape {x.shape}"
        )
    return x @ model.beta + model.intercept


def ridge_predict(model: RidgeModel, x) -> float:
    if sp.issparse(x):
        return float(ridge_predict_batch(model, x)[0])
    arr = np.asarray(x, dtype=np.float64).ravel()
    return float(arr @ model.beta + model.intercept)


def ridge_batch_predictor(model: RidgeModel):
    def predict(rows):
        return ridge_predict_batch(model, rows)

    return predict


def save_ridge(model: RidgeModel, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "coefficients.bin", model.beta[None, :])
    write_matrix(
        directory / "scalars.bin", np.array([[model.intercept, model.lam]])
    )
    (directory / "manifest.txt").write_text(
        f"model=ridge\nd={model.beta.shape[0]}\nlambda={model.lam!r}\n"
    )


def load_ridge(directory) -> RidgeModel:
    directory = Path(directory)
    manifest = (directory / "manifest.txt").read_text()
    if "model=ridge" not in manifest.splitlines():
        raise ValueError(f"{directory}: not a ridge snapshot")
    beta = read_matrix(directory / "coefficients.bin").ravel()
    scalars = read_matrix(directory / "scalars.bin").ravel()
    return RidgeModel(intercept=float(scalars[0]), beta=beta, lam=float(scalars[1]))
