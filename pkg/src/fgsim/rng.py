"""Counter-based random streams keyed by (seed, labels...).

Every draw site asks for its own stream, so results do not depend on the order
in which independent work items are evaluated.
"""

import zlib

import numpy as np


def _key(k):
    if isinstance(k, (int, np.integer)):
        return int(k) & 0xFFFFFFFFFFFFFFFF
    return zlib.crc32(str(k).encode())


def keyed_rng(seed, *keys) -> np.random.Generator:
    """Philox generator for the stream named by ``keys`` under ``seed``."""
    ss = np.random.SeedSequence([_key(seed)] + [_key(k) for k in keys])
    return np.random.Generator(np.random.Philox(ss))
