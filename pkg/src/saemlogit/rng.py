"""Deterministic random-stream derivation.

Every stochastic routine takes either an explicit ``numpy.random.Generator``
or an integer master seed from which named sub-streams are derived.  The
derivation scheme is fixed so results never depend on scheduling or worker
count: the sub-stream for a context is ``SeedSequence(master, spawn_key=key)``
where ``key`` is a tuple of small integers identifying the context, e.g.
``(iteration, sample_index)`` inside the fitting loop or
``(STAGE_ID, replication)`` in the benchmark harness.
"""

from __future__ import annotations

import numpy as np

# Stage identifiers used by the CLI / benchmark harness when deriving
# per-replication sub-streams from the master seed.
STAGE_SIMULATE = 0
STAGE_SPLIT = 1
STAGE_INJECT_TRAIN = 2
STAGE_INJECT_TEST = 3
STAGE_FIT = 4
STAGE_PREDICT = 5


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``key`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
