"""What a party actually transmits: encoded rows, the encoded shared
reference block, and the raw responses. Nothing else.

The type deliberately has no field for the encoder, the reference data it
was applied to, or the original design matrix, so analyzer-side code
cannot receive them. Payloads serialize to a directory of flat binary
matrices plus a small text manifest, letting the party and analyzer halves
run as separate processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..matio import read_matrix, write_matrix

__all__ = ["PartyPayload", "save_payload", "load_payload"]


@dataclass(frozen=True)
class PartyPayload:
    x_tilde: np.ndarray
    s_tilde: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.x_tilde.ndim != 2 or self.s_tilde.ndim != 2:
            raise ValueError("encoded blocks must be 2-D")
        if self.x_tilde.shape[1] != self.s_tilde.shape[1]:
            raise ValueError(
                "encoded rows and encoded reference block must share width"
            )
        if self.y.ndim != 1 or self.y.shape[0] != self.x_tilde.shape[0]:
            raise ValueError("response length must match encoded row count")

    @property
    def n_rows(self) -> int:
        return self.x_tilde.shape[0]

    @property
    def width(self) -> int:
        return self.x_tilde.shape[1]


def save_payload(payload: PartyPayload, directory, party_id: int) -> None:
    """Write the three matrices and the manifest into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "x_tilde.bin", payload.x_tilde)
    write_matrix(directory / "s_tilde.bin", payload.s_tilde)
    write_matrix(directory / "y.bin", payload.y[:, None])
    (directory / "manifest.txt").write_text(
        f"party_id={party_id}\n"
        f"n={payload.n_rows}\n"
        f"p_tilde={payload.width}\n"
        f"r={payload.s_tilde.shape[0]}\n"
    )


def load_payload(directory) -> tuple[PartyPayload, int]:
    """Read a payload directory back; returns (payload, party_id)."""
    directory = Path(directory)
    fields = {}
    for line in (directory / "manifest.txt").read_text().splitlines():
        key, _, value = line.partition("=")
        fields[key] = value
    payload = PartyPayload(
        x_tilde=read_matrix(directory / "x_tilde.bin"),
        s_tilde=read_matrix(directory / "s_tilde.bin"),
        y=read_matrix(directory / "y.bin").ravel(),
    )
    declared = (
        int(fields["n"]), int(fields["p_tilde"]), int(fields["r"])
    )
    actual = (payload.n_rows, payload.width, payload.s_tilde.shape[0])
    if declared != actual:
        raise ValueError(
            f"{directory}: manifest dims {declared} do not match data {actual}"
        )
    return payload, int(fields["party_id"])
