"""Deterministic RNG stream derivation.

Batch generation derives one independent stream per sequence so that plans
can be sampled in parallel and so that appending sequences to a batch never
perturbs the streams of existing ones.  The split function is
``SeedSequence((master_seed, epoch, ordinal))``: numpy's seed-sequence hash
is stable across platforms and numpy versions, which is what makes CLI
output bytewise reproducible.
"""

from __future__ import annotations

import numpy as np


def rate_stream(master_seed: int, epoch: int) -> np.random.Generator:
    """Stream that draws the single per-epoch masking rate."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed), int(epoch))))


def sequence_stream(master_seed: int, epoch: int, ordinal: int) -> np.random.Generator:
    """Stream for one (epoch, sequence) cell of a batch."""
    return np.random.default_rng(
        np.random.SeedSequence((int(master_seed), int(epoch), int(ordinal)))
    )
