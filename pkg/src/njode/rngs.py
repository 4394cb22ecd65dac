"""Deterministic, order-independent random streams.

Every stochastic choice in the package (path simulation, network init,
shuffling, dropout) draws from a counter-based Philox generator keyed by a
hash of descriptive parts, e.g. (seed, "sample", index).  Streams are
independent of evaluation order, so parallel generation and checkpoint
resume reproduce the same numbers.
"""

import hashlib

import numpy as np


def keyed_rng(*parts) -> np.random.Generator:
    """Philox generator keyed by a stable hash of the given parts."""
    digest = hashlib.blake2s(repr(parts).encode(), digest_size=16).digest()
    key = np.frombuffer(digest, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
