"""Shared fixtures: synthetic rating data and optional real-dataset paths.

The MovieLens / sushi files are not redistributable with the repo; tests
that need them look under ``$COLLABREC_DATA_DIR`` (default ``./data``) and
skip with instructions when the files are absent.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from collabrec.dataset import RatingMatrix

REPO_ROOT = Path(__file__).resolve().parent.parent


def data_dir() -> Path:
    return Path(os.environ.get("COLLABREC_DATA_DIR", REPO_ROOT / "data"))


def require_file(relative: str) -> Path:
    path = data_dir() / relative
    if not path.exists():
        pytest.skip(
            f"dataset file {path} not found; set COLLABREC_DATA_DIR or place"
            f" the file there to run this test"
        )
    return path


@pytest.fixture(scope="session")
def movielens_path() -> Path:
    return require_file("ml-100k/u.data")


@pytest.fixture(scope="session")
def sushi_path() -> Path:
    return require_file("sushi3b.5000.10.score")


def synthetic_ratings(
    n_users=60,
    n_items=40,
    ratings_per_user=12,
    seed=7,
    scale=(1.0, 5.0),
) -> RatingMatrix:
    """Structured synthetic ratings: user/item biases plus noise, rounded
    onto the scale. Enough signal that pooling data genuinely helps."""
    rng = np.random.default_rng(seed)
    user_bias = rng.normal(0.0, 0.6, size=n_users)
    item_bias = rng.normal(0.0, 0.8, size=n_items)
    mid = 0.5 * (scale[0] + scale[1])
    users, items, values = [], [], []
    for u in range(n_users):
        chosen = rng.choice(n_items, size=ratings_per_user, replace=False)
        for i in chosen:
            raw = mid + user_bias[u] + item_bias[i] + rng.normal(0.0, 0.35)
            users.append(u)
            items.append(int(i))
            values.append(float(np.clip(np.round(raw), scale[0], scale[1])))
    return RatingMatrix(
        user_ids=np.arange(n_users, dtype=np.int64),
        item_ids=np.arange(n_items, dtype=np.int64),
        users=np.asarray(users, dtype=np.int32),
        items=np.asarray(items, dtype=np.int32),
        ratings=np.asarray(values, dtype=np.float64),
        scale=scale,
    )


@pytest.fixture()
def small_ratings() -> RatingMatrix:
    return synthetic_ratings()


def write_movielens_file(path: Path, ratings: RatingMatrix) -> None:
    """Serialize a rating matrix in the tab-separated loader layout."""
    lines = []
    for u, i, r in zip(ratings.users, ratings.items, ratings.ratings):
        lines.append(
            f"{int(ratings.user_ids[u])}\t{int(ratings.item_ids[i])}"
            f"\t{int(r)}\t0"
        )
    path.write_text("\n".join(lines) + "\n")
