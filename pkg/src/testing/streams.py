# src/testing/streams.py
"""Counter-based random substreams keyed by (seed, task indices)."""
import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """
    Philox generator for the task identified by `key` under `seed`.
    The same (seed, key) always yields the same stream, independent of
    which worker runs the task or in which order tasks run.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))
