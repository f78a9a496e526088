"""Counter-derived random substreams.

Every sampled entity draws from a generator keyed by (seed, kind, index),
so regenerating one entity kind never perturbs the streams of another and
per-entity work can run in parallel with results identical to serial runs.
"""

from __future__ import annotations

import numpy as np

# Entity kinds used as the first component of a spawn key.
AGENTS = 0
ALTERNATIVES = 1
RANKINGS = 2
PAIRING = 3
OBSERVATION = 4
EXPERIMENT = 5
PAIR_SAMPLE = 6
TRIAL = 7


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for the substream identified by ``key``."""
    spawn_key = tuple(int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))
