"""Party-side operations: the shared reference data, each party's private
projection, encoding, and the final composed predictor.

Privacy comes from what leaves this side: parties publish only encoded
blocks and responses (see :mod:`.payload`). The projection is a strict
dimension reduction (width < input width), so it has a nontrivial null
space and cannot be inverted from its outputs; it is never shared, and the
reference data never reaches the analyzer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..numerics import truncated_svd
from .analyzer import IntegrationMap
from .payload import PartyPayload

__all__ = [
    "AnchorDataset",
    "Encoder",
    "generate_anchor",
    "fit_encoder",
    "fit_encoder_multi",
    "encode",
    "make_payload",
    "compose_predictor",
]


@dataclass(frozen=True)
class AnchorDataset:
    """Shared synthetic reference rows, entries uniform on [0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or 0 in self.values.shape:
            raise ValueError("reference data must be a non-empty 2-D matrix")
        if self.values.min() < 0.0 or self.values.max() >= 1.0:
            raise ValueError("reference entries must lie in [0, 1)")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Encoder:
    """A party's private projection: top right singular vectors of its own
    design matrix, one column per kept direction."""

    projection: np.ndarray

    def __post_init__(self):
        if self.projection.ndim != 2:
            raise ValueError("projection must be 2-D")
        if self.projection.shape[1] >= self.projection.shape[0]:
            raise ValueError("projection must strictly reduce the width")

    @property
    def input_width(self) -> int:
        return self.projection.shape[0]

    @property
    def output_width(self) -> int:
        return self.projection.shape[1]


def generate_anchor(r: int, p: int, rng) -> AnchorDataset:
    """``r`` x ``p`` block of independent uniform-[0,1) draws."""
    if r < 1 or p < 1:
        raise ValueError("reference dimensions must be positive")
    return AnchorDataset(values=rng.random((r, p)))


def fit_encoder(x, p_tilde: int) -> Encoder:
    """Projection onto the top ``p_tilde`` right singular vectors of ``x``.

    Requires ``1 <= p_tilde <= min(n, p)`` and ``p_tilde < p``. If ``x``
    has rank below ``p_tilde``, the trailing columns span a deterministic
    orthonormal complement of its row space.
    """
    n, p = x.shape
    if not 1 <= p_tilde <= min(n, p):
        raise ValueError(
            f"encoding width {p_tilde} out of range for {n}x{p} data"
        )
    if p_tilde >= p:
        raise ValueError("encoding width must be strictly below the data width")
    return Encoder(projection=truncated_svd(x, p_tilde).v)


def fit_encoder_multi(x, p_tildes) -> dict:
    """Encoders for several widths from one decomposition.

    Narrower projections are column prefixes of wider ones, so one fit at
    the maximum width yields all of them exactly.
    """
    widths = sorted(set(int(p) for p in p_tildes))
    if not widths:
        raise ValueError("need at least one encoding width")
    widest = fit_encoder(x, widths[-1])
    out = {widths[-1]: widest}
    for width in widths[:-1]:
        out[width] = Encoder(
            projection=np.ascontiguousarray(widest.projection[:, :width])
        )
    return out


def encode(encoder: Encoder, rows):
    """Project rows (dense or sparse) through the party's encoder."""
    if rows.ndim != 2 or rows.shape[1] != encoder.input_width:
        raise ValueError(
            f"expected (n, {encoder.input_width}) rows,"
            f" got shape {tuple(rows.shape)}"
        )
    if sp.issparse(rows):
        return np.asarray(rows @ encoder.projection)
    return np.asarray(rows, dtype=np.float64) @ encoder.projection


def make_payload(encoder: Encoder, x, anchor: AnchorDataset, y) -> PartyPayload:
    """Everything the party publishes: encoded rows, encoded reference
    block, and responses."""
    return PartyPayload(
        x_tilde=encode(encoder, x),
        s_tilde=encode(encoder, anchor.values),
        y=np.asarray(y, dtype=np.float64).ravel(),
    )


def compose_predictor(model_predict, integration: IntegrationMap, encoder: Encoder):
    """Chain a trained shared-space predictor behind this party's encoder
    and its integration map, giving a predictor over raw rows.

    ``model_predict`` maps a batch of shared-space rows to predictions.
    Feeding a batch through the composition performs the same matrix
    products as the analyzer-side pipeline, so predictions agree
    bit-for-bit.
    """
    if encoder.output_width != integration.matrix.shape[0]:
        raise ValueError(
            f"encoder output width {encoder.output_width} does not match"
            f" integration map input {integration.matrix.shape[0]}"
        )

    def predict(rows):
        return model_predict(encode(encoder, rows) @ integration.matrix)

    return predict
