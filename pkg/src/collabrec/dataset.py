"""Rating data handling: file loaders, per-user train/test splitting,
party partitioning, and conversion to the one-hot regression layout.

All operations are pure functions of their inputs plus the supplied seeded
generator, so a repetition can be replayed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DataFormatError",
    "RatingMatrix",
    "SplitRatings",
    "PartyAssignment",
    "FlattenedDataset",
    "load_movielens",
    "load_sushi",
    "split_train_test",
    "partition_horizontal",
    "take_parties",
    "transpose",
    "select_users",
    "flatten",
]


class DataFormatError(ValueError):
    """An input file deviates from its published layout."""


@dataclass(frozen=True)
class RatingMatrix:
    """Sparse user-item ratings on a declared scale.

    ``user_ids``/``item_ids`` keep the identifiers as they appeared in the
    source; ``users``/``items`` index into them. At most one rating per
    (user, item) pair.
    """

    user_ids: np.ndarray
    item_ids: np.ndarray
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    scale: tuple[float, float]

    def __post_init__(self):
        n = self.ratings.size
        if self.users.size != n or self.items.size != n:
            raise ValueError("entry arrays must have equal length")
        if n:
            if self.users.min() < 0 or self.users.max() >= self.n_users:
                raise ValueError("user index out of range")
            if self.items.min() < 0 or self.items.max() >= self.n_items:
                raise ValueError("item index out of range")
            lo, hi = self.scale
            if self.ratings.min() < lo or self.ratings.max() > hi:
                raise ValueError(f"rating outside scale [{lo}, {hi}]")
            key = self.users.astype(np.int64) * max(self.n_items, 1) + self.items
            if np.unique(key).size != n:
                raise ValueError("duplicate (user, item) entries")

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_entries(self) -> int:
        return self.ratings.size


@dataclass(frozen=True)
class SplitRatings:
    """Disjoint train/test halves sharing one user/item id space."""

    train: RatingMatrix
    test: RatingMatrix


@dataclass(frozen=True)
class PartyAssignment:
    """Disjoint user blocks, one per party, in party order.

    ``global_user_order`` (the concatenation of the blocks) fixes the order
    of the user dummy columns in the flattened layout.
    """

    m: int
    user_blocks: tuple
    global_user_order: np.ndarray

    def __post_init__(self):
        if len(self.user_blocks) != self.m:
            raise ValueError("block count does not match party count")
        total = sum(len(b) for b in self.user_blocks)
        if np.unique(self.global_user_order).size != total:
            raise ValueError("party user blocks overlap")


@dataclass(frozen=True)
class FlattenedDataset:
    """One-hot regression rows: a user dummy block, an item dummy block,
    and the rating as response. Each row has exactly two unit entries."""

    x: sp.csr_matrix
    y: np.ndarray
    p_users: int
    p_items: int


def _entries(users, items, ratings):
    return (
        np.asarray(users, dtype=np.int32),
        np.asarray(items, dtype=np.int32),
        np.asarray(ratings, dtype=np.float64),
    )


def load_movielens(path) -> RatingMatrix:
    """Load tab-separated ``user<TAB>item<TAB>rating<TAB>timestamp`` lines.

    Identifiers are remapped to dense 0-based indices in sorted-id order;
    the original ids are kept in ``user_ids``/``item_ids``. Ratings use the
    1..5 scale. A trailing newline is tolerated; anything else malformed is
    a :class:`DataFormatError` naming the line.
    """
    path = Path(path)
    raw_users: list[int] = []
    raw_items: list[int] = []
    raw_ratings: list[int] = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="ascii", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected 4 tab-separated fields,"
                    f" found {len(parts)}"
                )
            try:
                user, item, rating, _ts = (int(part) for part in parts)
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: non-integer field"
                ) from None
            if not 1 <= rating <= 5:
                raise DataFormatError(
                    f"{path}: line {lineno}: rating {rating} outside 1..5"
                )
            if (user, item) in seen:
                raise DataFormatError(
                    f"{path}: line {lineno}: duplicate rating for user {user},"
                    f" item {item}"
                )
            seen.add((user, item))
            raw_users.append(user)
            raw_items.append(item)
            raw_ratings.append(rating)

    user_ids = np.unique(np.asarray(raw_users, dtype=np.int64))
    item_ids = np.unique(np.asarray(raw_items, dtype=np.int64))
    users = np.searchsorted(user_ids, raw_users).astype(np.int32)
    items = np.searchsorted(item_ids, raw_items).astype(np.int32)
    return RatingMatrix(
        user_ids=user_ids,
        item_ids=item_ids,
        users=users,
        items=items,
        ratings=np.asarray(raw_ratings, dtype=np.float64),
        scale=(1.0, 5.0),
    )


def load_sushi(path) -> RatingMatrix:
    """Load a sushi score table: one user per line, 100 space-separated
    integers in {-1, 0, .., 4}, where -1 marks an unrated item.

    The published file has 5000 lines with exactly 10 ratings each; the
    loader accepts any line count but rejects lines with more than 10
    ratings, a wrong field count, or out-of-range values.
    """
    path = Path(path)
    raw_users: list[int] = []
    raw_items: list[int] = []
    raw_ratings: list[int] = []
    lines = path.read_text(encoding="ascii").split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # tolerate one trailing newline
    for lineno, line in enumerate(lines, start=1):
        fields = line.split()
        if len(fields) != 100:
            raise DataFormatError(
                f"{path}: line {lineno}: expected 100 fields,"
                f" found {len(fields)}"
            )
        count = 0
        for item, field in enumerate(fields):
            try:
                value = int(field)
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: non-integer field"
                ) from None
            if value < -1 or value > 4:
                raise DataFormatError(
                    f"{path}: line {lineno}: value {value} outside"
                    " {-1, 0, .., 4}"
                )
            if value == -1:
                continue
            count += 1
            raw_users.append(lineno - 1)
            raw_items.append(item)
            raw_ratings.append(value)
        if count > 10:
            raise DataFormatError(
                f"{path}: line {lineno}: {count} ratings, at most 10"
                " allowed per user"
            )

    users, items, ratings = _entries(raw_users, raw_items, raw_ratings)
    return RatingMatrix(
        user_ids=np.arange(len(lines), dtype=np.int64),
        item_ids=np.arange(100, dtype=np.int64),
        users=users,
        items=items,
        ratings=ratings,
        scale=(0.0, 4.0),
    )


def split_train_test(r: RatingMatrix, test_fraction: float, rng) -> SplitRatings:
    """Per-user random split.

    Each user with ``c >= 2`` ratings sends ``round(test_fraction * c)``
    of them (ties rounded up) to the test side; single-rating users stay
    entirely in train. Deterministic for a given generator state.
    """
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError(f"test fraction {test_fraction} outside [0, 1)")
    mask_test = np.zeros(r.n_entries, dtype=bool)
    order = np.argsort(r.users, kind="stable")
    boundaries = np.flatnonzero(np.diff(r.users[order])) + 1
    for group in np.split(order, boundaries):
        c = group.size
        if c < 2:
            continue
        n_test = int(test_fraction * c + 0.5)
        if n_test == 0:
            continue
        picked = rng.permutation(c)[:n_test]
        mask_test[group[picked]] = True

    def subset(mask):
        return RatingMatrix(
            user_ids=r.user_ids,
            item_ids=r.item_ids,
            users=r.users[mask],
            items=r.items[mask],
            ratings=r.ratings[mask],
            scale=r.scale,
        )

    return SplitRatings(train=subset(~mask_test), test=subset(mask_test))


def partition_horizontal(
    r: RatingMatrix, m: int, users_per_party: int, rng
) -> PartyAssignment:
    """Sample ``m`` disjoint blocks of ``users_per_party`` users uniformly
    without replacement, among users that hold at least one rating in ``r``.

    Users left over are simply not assigned (and thereby excluded from any
    experiment built on the assignment).
    """
    if m < 1 or users_per_party < 1:
        raise ValueError("party count and block size must be positive")
    candidates = np.unique(r.users)
    needed = m * users_per_party
    if needed > candidates.size:
        raise ValueError(
            f"cannot assign {needed} users ({m} parties x {users_per_party});"
            f" only {candidates.size} users have ratings"
        )
    chosen = rng.permutation(candidates)[:needed]
    blocks = tuple(
        np.sort(chosen[k * users_per_party : (k + 1) * users_per_party])
        for k in range(m)
    )
    return PartyAssignment(
        m=m,
        user_blocks=blocks,
        global_user_order=np.concatenate(blocks),
    )


def take_parties(assignment: PartyAssignment, m: int) -> PartyAssignment:
    """Assignment restricted to the first ``m`` party blocks."""
    if not 1 <= m <= assignment.m:
        raise ValueError(f"cannot take {m} of {assignment.m} parties")
    if m == assignment.m:
        return assignment
    blocks = assignment.user_blocks[:m]
    return PartyAssignment(
        m=m, user_blocks=blocks, global_user_order=np.concatenate(blocks)
    )


def transpose(r: RatingMatrix) -> RatingMatrix:
    """Swap the user and item roles (for vertically partitioned data)."""
    return RatingMatrix(
        user_ids=r.item_ids,
        item_ids=r.user_ids,
        users=r.items,
        items=r.users,
        ratings=r.ratings,
        scale=r.scale,
    )


def select_users(r: RatingMatrix, users) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entry triple (users, items, ratings) restricted to the given users."""
    mask = np.isin(r.users, np.asarray(users))
    return r.users[mask], r.items[mask], r.ratings[mask]


def flatten(entries, assignment: PartyAssignment, item_count: int) -> FlattenedDataset:
    """Convert rating entries to one-hot regression rows.

    The user dummy column is the user's position in the assignment's
    global order (so parties occupy contiguous column ranges in party
    order); item dummies follow the user block. Rows are sorted by
    (user index, item index).
    """
    users, items, ratings = _entries(*entries)
    p_users = int(assignment.global_user_order.size)
    p = p_users + item_count
    n = ratings.size

    if n:
        bound = int(max(assignment.global_user_order.max(), users.max())) + 1
        position = np.full(bound, -1, dtype=np.int64)
        position[assignment.global_user_order] = np.arange(p_users)
        order = np.lexsort((items, users))
        users = users[order]
        items = items[order]
        ratings = ratings[order]
        user_cols = position[users]
        if np.any(user_cols < 0):
            missing = int(users[np.argmax(user_cols < 0)])
            raise ValueError(f"user {missing} is not assigned to any party")
        if items.max() >= item_count:
            raise ValueError("item index beyond the declared item count")
        rows = np.repeat(np.arange(n, dtype=np.int64), 2)
        cols = np.empty(2 * n, dtype=np.int64)
        cols[0::2] = user_cols
        cols[1::2] = p_users + items.astype(np.int64)
        x = sp.csr_matrix(
            (np.ones(2 * n), (rows, cols)), shape=(n, p), dtype=np.float64
        )
    else:
        x = sp.csr_matrix((0, p), dtype=np.float64)
        ratings = np.zeros(0)

    return FlattenedDataset(x=x, y=ratings, p_users=p_users, p_items=item_count)
