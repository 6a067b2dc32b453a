"""Experiment orchestration.

One repetition draws a per-user train/test split and a party assignment,
then runs every requested analysis method on that identical split:

* individual - each party trains on its own one-hot rows; test predictions
  from all parties are pooled into a single RMSE;
* centralized - one model on the party-ordered stack of all one-hot rows;
* collaboration - parties encode their rows and the shared reference
  block, the analyzer aligns the encodings and trains one model on the
  merged result; each party's test rows travel through its own encoder
  and integration map.

Repetition ``i`` uses root seed ``base_seed + i``; every stage inside it
draws from a seed derived with :func:`collabrec.seeding.derive_seed`, so
reruns are bit-identical. The learner seed derivation deliberately omits
the method name: with one party, the centralized and individual runs see
the same data and the same seed and therefore produce the same model.
"""

from __future__ import annotations

import sys
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .collaboration import (
    collaborate_sweep,
    encode,
    fit_encoder_multi,
    generate_anchor,
    make_payload,
)
from .dataset import (
    RatingMatrix,
    flatten,
    load_movielens,
    load_sushi,
    partition_horizontal,
    select_users,
    split_train_test,
    take_parties,
    transpose,
)
from .learners import (
    TrainConfig,
    fm_batch_predictor,
    fm_train,
    ridge_batch_predictor,
    ridge_predict_batch,
    ridge_train,
)
from .numerics import rmse, truncated_svd
from .seeding import (
    ROLE_ANCHOR,
    ROLE_LEARNER,
    ROLE_PARTITION,
    ROLE_SPLIT,
    derive_seed,
)

__all__ = [
    "HarnessError",
    "ExperimentConfig",
    "ResultRow",
    "AggregateRow",
    "ExperimentResult",
    "run_repetition",
    "run_experiment",
]

METHODS = ("individual", "centralized", "collaboration")
LEARNERS = ("fm", "ridge")
_LEARNER_CODES = {"fm": 1, "ridge": 2}


class HarnessError(RuntimeError):
    """A pipeline stage failed; the message carries the stage context."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    data_path: str
    output_dir: str
    methods: tuple = METHODS
    learners: tuple = ("fm",)
    parties: int = 9
    users_per_party: int = 100
    p_tilde: tuple = (100, 200, 400)
    p_hat_ratios: tuple | None = (0.5, 1.0, 2.0)
    p_hat_absolute: tuple | None = None
    anchor_size: int = 1000
    test_fraction: float = 0.2
    repetitions: int = 10
    base_seed: int = 42
    vertical: bool = False
    clip_predictions: bool = False
    reduce_dims: int | None = None
    party_sweep: tuple | None = None
    fm: TrainConfig = TrainConfig()
    ridge_lambda: float = 1.0

    def validate(self) -> None:
        if self.dataset not in ("movielens", "sushi"):
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if not self.learners or any(l not in LEARNERS for l in self.learners):
            raise ValueError(f"learners must be a nonempty subset of {LEARNERS}")
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError("test fraction must lie in [0, 1)")
        if self.parties < 1 or self.users_per_party < 1:
            raise ValueError("party count and size must be positive")
        if "collaboration" in self.methods:
            if not self.p_tilde:
                raise ValueError("collaboration needs encoding widths")
            if self.p_hat_ratios and self.p_hat_absolute:
                raise ValueError(
                    "give target widths as ratios or absolutes, not both"
                )
            if not self.p_hat_ratios and not self.p_hat_absolute:
                raise ValueError("collaboration needs target widths")
            if self.anchor_size < 1:
                raise ValueError("reference row count must be positive")
        if self.party_sweep is not None and (
            not self.party_sweep or min(self.party_sweep) < 1
        ):
            raise ValueError("party sweep must list positive counts")
        self.fm.validate()

    def target_widths(self, p_tilde: int) -> list[int]:
        if self.p_hat_absolute:
            return [int(p) for p in self.p_hat_absolute]
        return [max(1, int(round(ratio * p_tilde))) for ratio in self.p_hat_ratios]


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    method: str
    learner: str
    m: int
    p_tilde: int | None
    p_hat: int | None
    rep: int
    rmse: float


@dataclass(frozen=True)
class AggregateRow:
    dataset: str
    method: str
    learner: str
    m: int
    p_tilde: int | None
    p_hat: int | None
    reps: int
    mean_rmse: float
    stderr: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    aggregates: list


@contextmanager
def _stage(*context):
    """Re-raise any failure with the pipeline location prepended."""
    try:
        yield
    except HarnessError:
        raise
    except Exception as err:
        label = " | ".join(str(part) for part in context)
        raise HarnessError(f"{label}: {err}") from err


def load_ratings(cfg: ExperimentConfig) -> RatingMatrix:
    loader = load_movielens if cfg.dataset == "movielens" else load_sushi
    with _stage(f"dataset {cfg.dataset}", "load"):
        return loader(cfg.data_path)


def _fit_predictor(cfg: ExperimentConfig, learner: str, x, y, seed: int):
    """Train one learner, returning a batch rows -> predictions callable."""
    if learner == "fm":
        model = fm_train(x, y, replace(cfg.fm, seed=seed))
        return fm_batch_predictor(model)
    if cfg.reduce_dims:
        dims = min(cfg.reduce_dims, min(x.shape))
        basis = truncated_svd(x, dims).v
        model = ridge_train(np.asarray(x @ basis), y, cfg.ridge_lambda)

        def predict(rows):
            return ridge_predict_batch(model, np.asarray(rows @ basis))

        return predict
    model = ridge_train(x, y, cfg.ridge_lambda)
    return ridge_batch_predictor(model)


def _pooled_rmse(cfg, ratings_scale, predictions, actuals):
    pooled_pred = np.concatenate(predictions) if predictions else np.zeros(0)
    pooled_act = np.concatenate(actuals) if actuals else np.zeros(0)
    if cfg.clip_predictions:
        pooled_pred = np.clip(pooled_pred, ratings_scale[0], ratings_scale[1])
    return rmse(pooled_pred, pooled_act)


def run_repetition(
    cfg: ExperimentConfig, rep_index: int, ratings: RatingMatrix | None = None
) -> list:
    """One seeded repetition; returns one :class:`ResultRow` per
    (method, learner, party count, width setting)."""
    cfg.validate()
    if ratings is None:
        ratings = load_ratings(cfg)
    rep_seed = cfg.base_seed + rep_index
    data = transpose(ratings) if cfg.vertical else ratings

    with _stage(f"rep {rep_index}", "split"):
        split = split_train_test(
            data,
            cfg.test_fraction,
            np.random.default_rng(derive_seed(rep_seed, ROLE_SPLIT)),
        )
    m_values = tuple(cfg.party_sweep) if cfg.party_sweep else (cfg.parties,)
    with _stage(f"rep {rep_index}", "partition"):
        assignment_full = partition_horizontal(
            split.train,
            max(m_values),
            cfg.users_per_party,
            np.random.default_rng(derive_seed(rep_seed, ROLE_PARTITION)),
        )

    rows = []
    for m in m_values:
        assignment = take_parties(assignment_full, m)
        rows.extend(
            _run_methods(cfg, rep_index, rep_seed, split, assignment, m)
        )
    return rows


def _run_methods(cfg, rep_index, rep_seed, split, assignment, m):
    item_count = split.train.n_items
    scale = split.train.scale
    ctx = f"rep {rep_index}"

    with _stage(ctx, f"m={m}", "flatten"):
        train_parts = [
            flatten(select_users(split.train, block), assignment, item_count)
            for block in assignment.user_blocks
        ]
        test_parts = [
            flatten(select_users(split.test, block), assignment, item_count)
            for block in assignment.user_blocks
        ]
    test_actuals = [part.y for part in test_parts]

    rows = []

    def emit(method, learner, p_tilde, p_hat, value):
        rows.append(
            ResultRow(
                dataset=cfg.dataset,
                method=method,
                learner=learner,
                m=m,
                p_tilde=p_tilde,
                p_hat=p_hat,
                rep=rep_index,
                rmse=value,
            )
        )

    if "centralized" in cfg.methods:
        x = sp.vstack([part.x for part in train_parts], format="csr")
        y = np.concatenate([part.y for part in train_parts])
        for learner in cfg.learners:
            with _stage(ctx, f"m={m}", "centralized", learner):
                seed = derive_seed(
                    rep_seed, ROLE_LEARNER, _LEARNER_CODES[learner], m, 0, 0, 0
                )
                predict = _fit_predictor(cfg, learner, x, y, seed)
                preds = [predict(part.x) for part in test_parts]
                emit(
                    "centralized", learner, None, None,
                    _pooled_rmse(cfg, scale, preds, test_actuals),
                )

    if "individual" in cfg.methods:
        for learner in cfg.learners:
            preds = []
            for k, part in enumerate(train_parts):
                with _stage(ctx, f"m={m}", "individual", f"party {k}", learner):
                    seed = derive_seed(
                        rep_seed, ROLE_LEARNER, _LEARNER_CODES[learner],
                        m, 0, 0, k,
                    )
                    predict = _fit_predictor(cfg, learner, part.x, part.y, seed)
                    preds.append(predict(test_parts[k].x))
            emit(
                "individual", learner, None, None,
                _pooled_rmse(cfg, scale, preds, test_actuals),
            )

    if "collaboration" in cfg.methods:
        p = assignment.global_user_order.size + item_count
        with _stage(ctx, f"m={m}", "collaboration", "reference data"):
            anchor = generate_anchor(
                cfg.anchor_size,
                p,
                np.random.default_rng(derive_seed(rep_seed, ROLE_ANCHOR, m)),
            )
        encoder_sets = []
        for k, part in enumerate(train_parts):
            with _stage(ctx, f"m={m}", "collaboration", f"party {k}", "encoder"):
                encoder_sets.append(fit_encoder_multi(part.x, cfg.p_tilde))
        for p_tilde in cfg.p_tilde:
            encoders = [per_party[p_tilde] for per_party in encoder_sets]
            with _stage(ctx, f"m={m}", "collaboration",
                        f"p_tilde={p_tilde}", "payloads"):
                payloads = [
                    make_payload(enc, part.x, anchor, part.y)
                    for enc, part in zip(encoders, train_parts)
                ]
            bound = min(cfg.anchor_size, p_tilde * m)
            requested = cfg.target_widths(p_tilde)
            widths = []
            for width in requested:
                if width > bound:
                    warnings.warn(
                        f"target width {width} clamped to {bound}"
                        f" (reference rows / total encoding width)",
                        stacklevel=2,
                    )
                    width = bound
                if width not in widths:
                    widths.append(width)
            with _stage(ctx, f"m={m}", "collaboration",
                        f"p_tilde={p_tilde}", "alignment"):
                aligned = collaborate_sweep(payloads, widths)
            for p_hat in widths:
                merged, maps = aligned[p_hat]
                for learner in cfg.learners:
                    with _stage(ctx, f"m={m}", "collaboration",
                                f"p_tilde={p_tilde}", f"p_hat={p_hat}", learner):
                        seed = derive_seed(
                            rep_seed, ROLE_LEARNER, _LEARNER_CODES[learner],
                            m, p_tilde, p_hat, 0,
                        )
                        predict = _fit_predictor(
                            cfg, learner, merged.x_hat, merged.y, seed
                        )
                        preds = [
                            predict(encode(enc, part.x) @ mp.matrix)
                            for enc, mp, part in zip(encoders, maps, test_parts)
                        ]
                        emit(
                            "collaboration", learner, p_tilde, p_hat,
                            _pooled_rmse(cfg, scale, preds, test_actuals),
                        )
    return rows


def aggregate_rows(rows) -> list:
    """Mean and standard error (sample std / sqrt(reps)) per setting."""
    groups: dict = {}
    for row in rows:
        key = (row.dataset, row.method, row.learner, row.m, row.p_tilde, row.p_hat)
        groups.setdefault(key, []).append(row.rmse)
    out = []
    for key in sorted(
        groups,
        key=lambda k: (k[0], k[3], METHODS.index(k[1]), k[2], k[4] or 0, k[5] or 0),
    ):
        values = np.asarray(groups[key])
        reps = values.size
        stderr = (
            float(values.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
        )
        out.append(
            AggregateRow(
                dataset=key[0], method=key[1], learner=key[2], m=key[3],
                p_tilde=key[4], p_hat=key[5], reps=reps,
                mean_rmse=float(values.mean()), stderr=stderr,
            )
        )
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All repetitions plus reports. Partial per-repetition rows are
    flushed to ``results.csv`` as they finish, so an aborted run leaves
    usable output behind."""
    from .report import write_reports, write_rows_csv

    cfg.validate()
    ratings = load_ratings(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows: list = []
    for rep in range(cfg.repetitions):
        rows.extend(run_repetition(cfg, rep, ratings))
        write_rows_csv(out_dir / "results.csv", rows)
        print(
            f"[collabrec] repetition {rep + 1}/{cfg.repetitions} done",
            file=sys.stderr,
        )
    if cfg.repetitions == 1:
        warnings.warn("single repetition: standard errors are reported as 0")
    result = ExperimentResult(
        config=cfg, rows=rows, aggregates=aggregate_rows(rows)
    )
    write_reports(result, out_dir)
    return result
