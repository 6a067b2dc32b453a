"""collabrec: rating prediction over distributed user-item data where
parties publish only dimension-reduced representations.

The pipeline: each party flattens its rating matrix into one-hot
regression rows, projects them (and a shared random reference block)
through a private SVD-based encoder, and ships the projections plus
responses to an analyzer. The analyzer aligns the projections into one
space via least-squares maps onto a common singular basis, merges them,
and trains a single regression model (factorization machine or ridge).
The harness compares this against per-party and fully pooled training
on the same splits.
"""

from .collaboration import (
    AnchorDataset,
    CollabDataset,
    Encoder,
    IntegrationMap,
    PartyPayload,
    collaborate,
    collaborate_sweep,
    compose_predictor,
    compute_target,
    encode,
    fit_encoder,
    fit_encoder_multi,
    fit_integration,
    generate_anchor,
    load_payload,
    make_payload,
    save_payload,
)
from .dataset import (
    DataFormatError,
    FlattenedDataset,
    PartyAssignment,
    RatingMatrix,
    SplitRatings,
    flatten,
    load_movielens,
    load_sushi,
    partition_horizontal,
    select_users,
    split_train_test,
    take_parties,
    transpose,
)
from .harness import (
    AggregateRow,
    ExperimentConfig,
    ExperimentResult,
    HarnessError,
    ResultRow,
    run_experiment,
    run_repetition,
)
from .learners import (
    FMModel,
    FMTrainingError,
    RidgeModel,
    TrainConfig,
    fm_gradient,
    fm_predict,
    fm_predict_batch,
    fm_train,
    ridge_predict,
    ridge_predict_batch,
    ridge_train,
)
from .numerics import TruncatedSVD, pseudoinverse_solve, rmse, truncated_svd

__version__ = "0.1.0"
