"""
Partitioners - Split the training samples across clients.

Each partitioner is called with the training labels and returns one array
of positions per client. Positions index the training split, not the full
dataset.
"""

import logging
from enum import Enum
from typing import List

import numpy as np

from ..errors import ConfigurationError
from ..rng import stream_rng

logger = logging.getLogger(__name__)


class PartitionScheme(Enum):
    IID = 'iid'
    SHARD = 'shard'


class BasePartitioner:
    """Callable that deals sample positions to clients."""

    def __init__(self, num_clients: int, seed: int = 0):
        if num_clients <= 0:
            raise ConfigurationError(f"Number of clients must be positive, got {num_clients}")
        self.num_clients = num_clients
        self.seed = seed

    def __call__(self, labels: np.ndarray) -> List[np.ndarray]:
        raise NotImplementedError


class IIDPartitioner(BasePartitioner):
    """Shuffle, then cut into near-equal parts."""

    def __str__(self):
        return 'iid'

    def __call__(self, labels: np.ndarray) -> List[np.ndarray]:
        return partition_iid(len(labels), self.num_clients, self.seed)


class ShardPartitioner(BasePartitioner):
    """Label-skew split: every client sees a fixed set of classes."""

    def __init__(self, num_clients: int, classes_per_client: int = 3, seed: int = 0):
        super().__init__(num_clients, seed)
        if classes_per_client <= 0:
            raise ConfigurationError(f"classes_per_client must be positive, got {classes_per_client}")
        self.classes_per_client = classes_per_client

    def __str__(self):
        return f'shard_k{self.classes_per_client}'

    def __call__(self, labels: np.ndarray) -> List[np.ndarray]:
        return partition_shard_noniid(labels, self.num_clients, self.classes_per_client, self.seed)


def make_partitioner(scheme: PartitionScheme, num_clients: int, classes_per_client: int,
                     seed: int) -> BasePartitioner:
    if PartitionScheme(scheme) is PartitionScheme.SHARD:
        return ShardPartitioner(num_clients, classes_per_client, seed)
    return IIDPartitioner(num_clients, seed)


def partition_iid(num_samples: int, num_clients: int, seed: int) -> List[np.ndarray]:
    """
    Random near-equal split of positions 0..num_samples-1.

    Args:
        num_samples: Training set size
        num_clients: Number of parts
        seed: Run seed

    Returns:
        num_clients sorted index arrays whose sizes differ by at most one
    """
    if num_clients <= 0:
        raise ConfigurationError(f"Number of clients must be positive, got {num_clients}")
    if num_clients > num_samples:
        raise ConfigurationError(
            f"Cannot split {num_samples} training samples across {num_clients} clients")
    order = stream_rng(seed, 'partition').permutation(num_samples)
    return [np.sort(part) for part in np.array_split(order, num_clients)]


def _assign_classes(present: np.ndarray, num_clients: int, k: int,
                    rng: np.random.Generator) -> List[List[int]]:
    """Deal k distinct classes to each client from a deck of shuffled class permutations."""
    deck: List[int] = []
    owned: List[List[int]] = []
    for _ in range(num_clients):
        mine: List[int] = []
        while len(mine) < k:
            if not any(c not in mine for c in deck):
                deck.extend(int(c) for c in rng.permutation(present))
            pick = next(i for i, c in enumerate(deck) if c not in mine)
            mine.append(deck.pop(pick))
        owned.append(sorted(mine))
    return owned


def partition_shard_noniid(labels: np.ndarray, num_clients: int, classes_per_client: int,
                           seed: int) -> List[np.ndarray]:
    """
    Class-skewed split where each client holds samples of its own class set.

    Classes are dealt to clients so every client gets classes_per_client
    distinct ones. Each sample picks one of its labels that some client owns
    and is dealt round-robin among that class's owners. Samples none of
    whose labels is owned go to the client with the fewest samples.

    Args:
        labels: (n, C) multi-hot training labels
        num_clients: Number of clients
        classes_per_client: Classes per client
        seed: Run seed

    Returns:
        num_clients sorted, disjoint index arrays covering 0..n-1
    """
    labels = np.asarray(labels) > 0
    if labels.ndim != 2:
        raise ConfigurationError(f"Shard partition needs (n, C) labels, got shape {labels.shape}")
    if num_clients <= 0:
        raise ConfigurationError(f"Number of clients must be positive, got {num_clients}")
    present = np.flatnonzero(labels.any(axis=0))
    if len(present) < classes_per_client:
        raise ConfigurationError(
            f"classes_per_client={classes_per_client} exceeds the {len(present)} classes present")

    rng = stream_rng(seed, 'partition')
    owned = _assign_classes(present, num_clients, classes_per_client, rng)
    owners = {int(c): [cid for cid, mine in enumerate(owned) if c in mine] for c in present}
    logger.debug("Shard class assignment: %s", owned)

    buckets: List[List[int]] = [[] for _ in range(num_clients)]
    home = {int(c): [] for c in present}
    leftovers = []
    for i, row in enumerate(labels):
        candidates = [int(c) for c in np.flatnonzero(row) if owners.get(int(c))]
        if not candidates:
            leftovers.append(i)
            continue
        home[candidates[rng.integers(len(candidates))]].append(i)

    offset = 0
    for c in sorted(home):
        samples = rng.permutation(np.array(home[c], dtype=np.int64))
        holders = owners[c]
        for j, i in enumerate(samples):
            buckets[holders[(j + offset) % len(holders)]].append(int(i))
        offset += len(samples)

    if leftovers:
        logger.warning("Shard partition: %d samples match no client's classes; "
                       "assigning them to the smallest clients", len(leftovers))
        for i in leftovers:
            smallest = min(range(num_clients), key=lambda cid: (len(buckets[cid]), cid))
            buckets[smallest].append(i)

    empty = [cid for cid, b in enumerate(buckets) if not b]
    if empty:
        logger.warning("Shard partition left clients %s without samples", empty)
    return [np.array(sorted(b), dtype=np.int64) for b in buckets]
