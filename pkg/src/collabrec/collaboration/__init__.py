"""Multi-party alignment pipeline.

Party side (:mod:`.party`): fit a private projection, encode local rows
and the shared reference block, publish a :class:`PartyPayload`.
Analyzer side (:mod:`.analyzer`): align the payloads into one space and
merge them; it never sees encoders, raw rows, or the reference data.
"""

from .analyzer import (
    CollabDataset,
    IntegrationMap,
    collaborate,
    collaborate_sweep,
    compute_target,
    fit_integration,
)
from .party import (
    AnchorDataset,
    Encoder,
    compose_predictor,
    encode,
    fit_encoder,
    fit_encoder_multi,
    generate_anchor,
    make_payload,
)
from .payload import PartyPayload, load_payload, save_payload

__all__ = [
    "CollabDataset",
    "IntegrationMap",
    "collaborate",
    "collaborate_sweep",
    "compute_target",
    "fit_integration",
    "AnchorDataset",
    "Encoder",
    "compose_predictor",
    "encode",
    "fit_encoder",
    "fit_encoder_multi",
    "generate_anchor",
    "make_payload",
    "PartyPayload",
    "load_payload",
    "save_payload",
]
