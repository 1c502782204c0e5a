"""
Random Streams

Counter-based generators keyed by (master_seed, trial_index, stream_tag), so
every trial draws the same numbers regardless of which worker runs it.
"""

import zlib

import numpy as np


def _tag_key(stream_tag: str) -> int:
    return zlib.crc32(stream_tag.encode("utf-8"))


def make_rng(master_seed: int, trial_index: int = 0, stream_tag: str = "default") -> np.random.Generator:
    """
    Build an independent Philox generator for one named stream.

    Args:
        master_seed: Experiment-level seed
        trial_index: Index of the trial (or any other counter)
        stream_tag: Name of the stream, e.g. "noise" or "symbols"

    Returns:
        numpy Generator backed by a Philox bit generator
    """
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(trial_index), _tag_key(stream_tag)])
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, *counters: int) -> int:
    """Derive a 64-bit child seed from a master seed and a tuple of counters."""
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *[int(c) for c in counters]])
    return int(seq.generate_state(1, dtype=np.uint64)[0])
