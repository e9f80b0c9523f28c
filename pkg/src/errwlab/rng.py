"""Counter-based random streams.

Every randomized routine in this package derives its generator from a
(master_seed, index) pair through Philox, so draw k of any batch is a
deterministic function of the seed and k, independent of execution
order, chunking, or thread count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Disjoint counter blocks per purpose; streams never overlap because the
# high counter word is fixed and Philox counters advance from word 0.
DOMAIN_WALK = 1
DOMAIN_ENV = 2
DOMAIN_GRADIENT = 3
DOMAIN_GENERIC = 4


def stream(master_seed: int, index: int = 0, domain: int = DOMAIN_GENERIC) -> np.random.Generator:
    """Return the Philox generator for (master_seed, index) in a domain."""
    if master_seed < 0 or index < 0:
        raise ValueError("seed and index must be nonnegative")
    key = np.array([master_seed & _MASK64, index & _MASK64], dtype=np.uint64)
    counter = np.zeros(4, dtype=np.uint64)
    counter[3] = np.uint64(domain)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
