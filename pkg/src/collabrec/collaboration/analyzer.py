"""Analyzer-side operations.

This module is the privacy boundary: every function here consumes only
:class:`PartyPayload` values (encoded rows, encoded reference block,
responses) or matrices derived from them. It has no import of, and no
code path that could accept, party-private objects - raw design matrices,
projection maps, or the shared reference data itself.

The alignment works by stacking all parties' encoded reference blocks,
taking the top left singular vectors of the stack as a common target
frame, and fitting each party a least-squares map from its encoding onto
that frame. Mapped rows from all parties then live in one comparable
space and are merged for training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import pseudoinverse_solve, truncated_svd
from .payload import PartyPayload

__all__ = [
    "IntegrationMap",
    "CollabDataset",
    "compute_target",
    "fit_integration",
    "collaborate",
    "collaborate_sweep",
]


@dataclass(frozen=True)
class IntegrationMap:
    """Per-party linear map from its encoding width onto the shared frame."""

    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError("integration map must be 2-D")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("integration map contains non-finite entries")


@dataclass(frozen=True)
class CollabDataset:
    """Merged aligned rows, responses, and per-party row spans (in party
    order, contiguous, covering all rows)."""

    x_hat: np.ndarray
    y: np.ndarray
    party_row_ranges: tuple

    def __post_init__(self):
        stop = 0
        for start, end in self.party_row_ranges:
            if start != stop or end < start:
                raise ValueError("party row ranges must tile the rows in order")
            stop = end
        if stop != self.x_hat.shape[0] or self.y.shape[0] != stop:
            raise ValueError("row ranges must cover every merged row")


def compute_target(s_tildes, p_hat: int) -> np.ndarray:
    """Common target frame: top ``p_hat`` left singular vectors of the
    horizontally stacked encoded reference blocks."""
    s_tildes = list(s_tildes)
    if not s_tildes:
        raise ValueError("need at least one encoded reference block")
    r = s_tildes[0].shape[0]
    for block in s_tildes:
        if block.ndim != 2 or block.shape[0] != r:
            raise ValueError("encoded reference blocks must share row count")
    total_width = sum(block.shape[1] for block in s_tildes)
    if not 1 <= p_hat <= min(r, total_width):
        raise ValueError(
            f"target width {p_hat} out of range; bound is"
            f" min({r}, {total_width})"
        )
    stacked = np.hstack(s_tildes)
    return truncated_svd(stacked, p_hat).u


def fit_integration(s_tilde: np.ndarray, target: np.ndarray) -> IntegrationMap:
    """Least-squares map sending a party's encoded reference block as close
    as possible (Frobenius) to the target frame; minimum-norm solution."""
    if s_tilde.shape[0] != target.shape[0]:
        raise ValueError("encoded block and target must share row count")
    return IntegrationMap(matrix=pseudoinverse_solve(s_tilde, target))


def collaborate(payloads, p_hat: int) -> tuple[CollabDataset, list[IntegrationMap]]:
    """Full analyzer pass: target frame, per-party maps, merged dataset.

    Returns the merged dataset plus the per-party maps (to be sent back so
    each party can compose its local predictor).
    """
    merged, maps = collaborate_sweep(payloads, (p_hat,))[p_hat]
    return merged, maps


def collaborate_sweep(payloads, p_hats) -> dict:
    """Run the analyzer pass for several target widths at once.

    The target frames for all widths are column prefixes of the widest
    one, so the stack decomposition and the per-party least-squares fits
    are computed once at the maximum width and sliced.
    """
    payloads = list(payloads)
    if not payloads:
        raise ValueError("need at least one payload")
    for payload in payloads:
        if not isinstance(payload, PartyPayload):
            raise TypeError("analyzer accepts PartyPayload values only")
    widths = sorted(set(int(p) for p in p_hats))
    if not widths:
        raise ValueError("need at least one target width")
    p_max = widths[-1]

    target = compute_target([pl.s_tilde for pl in payloads], p_max)
    full_maps = [fit_integration(pl.s_tilde, target) for pl in payloads]
    full_blocks = [pl.x_tilde @ m.matrix for pl, m in zip(payloads, full_maps)]
    y = np.concatenate([pl.y for pl in payloads])

    spans = []
    stop = 0
    for payload in payloads:
        spans.append((stop, stop + payload.n_rows))
        stop += payload.n_rows
    spans = tuple(spans)

    results = {}
    for p_hat in widths:
        if p_hat == p_max:
            maps = full_maps
            blocks = full_blocks
        else:
            maps = [
                IntegrationMap(matrix=np.ascontiguousarray(m.matrix[:, :p_hat]))
                for m in full_maps
            ]
            blocks = [np.ascontiguousarray(b[:, :p_hat]) for b in full_blocks]
        merged = CollabDataset(
            x_hat=np.vstack(blocks) if len(blocks) > 1 else blocks[0],
            y=y,
            party_row_ranges=spans,
        )
        results[p_hat] = (merged, maps)
    return results
