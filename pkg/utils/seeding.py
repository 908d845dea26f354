"""Reproducible random streams.

All draws descend from one master seed through numpy's SeedSequence; each
episode gets its own counter-based Philox generator so episodes can be
sampled (or re-sampled) independently and in any order.
"""
from typing import List

import numpy as np


def episode_generators(master_seed: int, count: int) -> List[np.random.Generator]:
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def derive_seed(master_seed: int, *path: int) -> int:
    """Stable 32-bit child seed for a named sub-stream (e.g. training seed -> eval seed)."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(path))
    return int(sequence.generate_state(1)[0])
