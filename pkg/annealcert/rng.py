"""Per-chain random streams.

Every chain, replica and oracle worker owns a ``numpy.random.Generator`` over
the counter-based Philox bit generator, keyed by ``(seed, stream)``. Philox
output depends only on key and counter, so traces reproduce bit for bit
across platforms and thread schedules.
"""

from __future__ import annotations

import numpy as np

# stream ids below this are chain replicas; oracles draw from dedicated ranges
ORACLE_STREAM = 1 << 20
REPORT_STREAM = 1 << 21


def chain_rng(seed: int, stream: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(seq))
