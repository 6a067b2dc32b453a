"""Second-order factorization machine trained by per-sample SGD.

The model is a bias, linear weights, and one latent vector per feature;
pairwise interaction weights are inner products of latent vectors, so a
prediction costs O(d*q) via the square-of-sums identity instead of the
naive O(d^2*q) double loop.

Training runs ``epochs`` shuffled passes of plain SGD on squared error
with step size ``learning_rate / (1 + epoch)``. Defaults: 100 latent
dimensions, 30 epochs, rate 1e-3, Gaussian latent init of scale 0.01,
zero-initialized bias/linear terms, no weight decay.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..matio import read_matrix, write_matrix
from .backend import get_kernels

__all__ = [
    "FMTrainingError",
    "TrainConfig",
    "FMModel",
    "fm_train",
    "fm_predict",
    "fm_predict_batch",
    "fm_batch_predictor",
    "fm_gradient",
    "save_fm",
    "load_fm",
]


class FMTrainingError(RuntimeError):
    """SGD produced non-finite parameters or loss."""


@dataclass(frozen=True)
class TrainConfig:
    q: int = 100
    epochs: int = 30
    learning_rate: float = 1e-3
    init_scale: float = 0.01
    l2_linear: float = 0.0
    l2_latent: float = 0.0
    shuffle: bool = True
    seed: int = 0

    def validate(self) -> None:
        if self.q < 1:
            raise ValueError("latent dimension must be positive")
        if self.epochs < 1:
            raise ValueError("epoch count must be positive")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")
        if self.init_scale < 0.0 or self.l2_linear < 0.0 or self.l2_latent < 0.0:
            raise ValueError("scales and penalties must be nonnegative")


@dataclass
class FMModel:
    """Trained parameters plus the per-epoch mean squared residual."""

    w0: float
    w: np.ndarray
    V: np.ndarray
    q: int
    loss_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_features(self) -> int:
        return self.w.shape[0]


def _prepare(x):
    """Normalize the design matrix to float64 CSR or C-contiguous dense."""
    if sp.issparse(x):
        csr = x.tocsr().astype(np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        return csr, True
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D design matrix, got shape {arr.shape}")
    return arr, False


def fm_train(x, y, cfg: TrainConfig) -> FMModel:
    """Fit a factorization machine on rows ``x`` and responses ``y``.

    Deterministic for a fixed config: the latent init and every epoch's
    visit order come from one generator seeded with ``cfg.seed``.
    """
    cfg.validate()
    xp, sparse = _prepare(x)
    n, d = xp.shape
    y = np.ascontiguousarray(np.asarray(y, dtype=np.float64).ravel())
    if n == 0 or d == 0:
        raise ValueError("training data must be non-empty")
    if y.shape[0] != n:
        raise ValueError(f"response length {y.shape[0]} != row count {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError("responses contain non-finite values")

    kernels = get_kernels()
    rng = np.random.default_rng(cfg.seed)
    w0 = 0.0
    w = np.zeros(d)
    v = rng.normal(0.0, cfg.init_scale, size=(d, cfg.q))
    history = np.empty(cfg.epochs)

    for epoch in range(cfg.epochs):
        eta = cfg.learning_rate / (1.0 + epoch)
        if cfg.shuffle:
            order = rng.permutation(n).astype(np.int64)
        else:
            order = np.arange(n, dtype=np.int64)
        if sparse:
            w0, sse = kernels.fm_epoch_sparse(
                xp.indptr, xp.indices, xp.data, y, order,
                w0, w, v, eta, cfg.l2_linear, cfg.l2_latent,
            )
        else:
            w0, sse = kernels.fm_epoch_dense(
                xp, y, order, w0, w, v, eta, cfg.l2_linear, cfg.l2_latent,
            )
        history[epoch] = sse / n
        if not np.isfinite(history[epoch]) or not np.isfinite(w0):
            raise FMTrainingError(
                f"training diverged at epoch {epoch}: non-finite loss"
            )
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise FMTrainingError(
            f"training diverged at epoch {cfg.epochs - 1}:"
            " non-finite parameters"
        )
    return FMModel(w0=float(w0), w=w, V=v, q=cfg.q, loss_history=history)


def fm_predict_batch(model: FMModel, x) -> np.ndarray:
    """Predictions for a batch of rows (dense 2-D or scipy.sparse)."""
    kernels = get_kernels()
    if sp.issparse(x):
        csr = x.tocsr().astype(np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        if csr.shape[1] != model.n_features:
            raise ValueError(
                f"expected {model.n_features} features, got {csr.shape[1]}"
            )
        return kernels.fm_predict_sparse(
            csr.indptr, csr.indices, csr.data, csr.shape[0],
            model.w0, model.w, model.V,
        )
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[1] != model.n_features:
        raise ValueError(
            f"expected (n, {model.n_features}) rows, got shape {arr.shape}"
        )
    return kernels.fm_predict_dense(arr, model.w0, model.w, model.V)


def fm_predict(model: FMModel, x) -> float:
    """Prediction for a single row."""
    if sp.issparse(x):
        return float(fm_predict_batch(model, x)[0])
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.shape[0] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} features, got {arr.shape[0]}"
        )
    return float(fm_predict_batch(model, arr[None, :])[0])


def fm_batch_predictor(model: FMModel):
    """The model as a plain rows -> predictions callable."""

    def predict(rows):
        return fm_predict_batch(model, rows)

    return predict


def fm_gradient(model: FMModel, x, y: float):
    """Exact gradient of 0.5*(prediction - y)^2 at the model's parameters.

    Returns (d/dw0, d/dw, d/dV) with full parameter shapes.
    """
    if sp.issparse(x):
        x = np.asarray(x.todense()).ravel()
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} features, got {x.shape[0]}"
        )
    s = x @ model.V
    pred = (
        model.w0
        + model.w @ x
        + 0.5 * (s @ s - (x**2) @ (model.V**2).sum(axis=1))
    )
    res = pred - float(y)
    g_v = res * (np.outer(x, s) - model.V * (x**2)[:, None])
    return res, res * x, g_v


def save_fm(model: FMModel, cfg: TrainConfig, directory) -> None:
    """Snapshot a model to flat binary matrices plus a config manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "bias.bin", np.array([[model.w0]]))
    write_matrix(directory / "linear.bin", model.w[None, :])
    write_matrix(directory / "latent.bin", model.V)
    lines = [f"model=fm", f"d={model.n_features}"]
    lines += [f"{key}={value}" for key, value in asdict(cfg).items()]
    (directory / "manifest.txt").write_text("\n".join(lines) + "\n")


def load_fm(directory) -> tuple[FMModel, TrainConfig]:
    directory = Path(directory)
    fields = {}
    for line in (directory / "manifest.txt").read_text().splitlines():
        key, _, value = line.partition("=")
        fields[key] = value
    if fields.get("model") != "fm":
        raise ValueError(f"{directory}: not a factorization-machine snapshot")
    cfg = TrainConfig(
        q=int(fields["q"]),
        epochs=int(fields["epochs"]),
        learning_rate=float(fields["learning_rate"]),
        init_scale=float(fields["init_scale"]),
        l2_linear=float(fields["l2_linear"]),
        l2_latent=float(fields["l2_latent"]),
        shuffle=fields["shuffle"] == "True",
        seed=int(fields["seed"]),
    )
    w0 = float(read_matrix(directory / "bias.bin")[0, 0])
    w = read_matrix(directory / "linear.bin").ravel()
    v = read_matrix(directory / "latent.bin")
    return FMModel(w0=w0, w=w, V=v, q=v.shape[1]), cfg
