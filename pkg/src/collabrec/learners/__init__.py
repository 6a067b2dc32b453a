"""Regression learners: factorization machine (SGD) and ridge baseline."""

from .backend import backend_name, get_kernels, set_backend
from .fm import (
    FMModel,
    FMTrainingError,
    TrainConfig,
    fm_batch_predictor,
    fm_gradient,
    fm_predict,
    fm_predict_batch,
    fm_train,
    load_fm,
    save_fm,
)
from .ridge import (
    RidgeModel,
    load_ridge,
    ridge_batch_predictor,
    ridge_predict,
    ridge_predict_batch,
    ridge_train,
    save_ridge,
)

__all__ = [
    "backend_name",
    "get_kernels",
    "set_backend",
    "FMModel",
    "FMTrainingError",
    "TrainConfig",
    "fm_batch_predictor",
    "fm_gradient",
    "fm_predict",
    "fm_predict_batch",
    "fm_train",
    "load_fm",
    "save_fm",
    "RidgeModel",
    "load_ridge",
    "ridge_batch_predictor",
    "ridge_predict",
    "ridge_predict_batch",
    "ridge_train",
    "save_ridge",
]
