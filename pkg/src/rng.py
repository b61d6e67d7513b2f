"""
Seeded random streams.

Every stream is derived from the run seed through numpy's SeedSequence, so
results never depend on which thread ran a client or in what order.
"""

import zlib

import numpy as np


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode('utf-8'))


def stream_rng(seed: int, tag: str) -> np.random.Generator:
    """Generator for a named single-purpose stream (init, partition, data)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), _tag_key(tag)]))


def client_rng(seed: int, client_id: int, round_index: int) -> np.random.Generator:
    """Generator for one client's local training in one round."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), _tag_key('client'), int(client_id), int(round_index)]))
