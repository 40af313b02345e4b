"""Deterministic RNG streams derived from a master seed and a structured path.

Every stochastic step in the package draws from ``substream(master_seed, *path)``
where the path names the step (e.g. ``("realize", category, instance)``). Streams
are independent of iteration order and worker count, so parallel schedules cannot
change results.
"""

import hashlib

import numpy as np


def _path_entry(part) -> int:
    if isinstance(part, (bool,)):
        raise TypeError("bool is not a valid stream path entry")
    if isinstance(part, (int, np.integer)):
        value = int(part)
        if value < 0:
            raise ValueError(f"negative stream path entry: {value}")
        return value
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(master_seed: int, *path) -> np.random.Generator:
    """PCG64 generator for (master_seed, *path)."""
    key = tuple(_path_entry(p) for p in path)
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(seq))


def child_seed(master_seed: int, *path) -> int:
    """Stable derived integer seed, for APIs that take a plain seed."""
    payload = repr((int(master_seed),) + tuple(_path_entry(p) for p in path))
    digest = hashlib.sha256(payload.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")
