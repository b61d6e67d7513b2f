"""
Triplet mining for multi-label batches.

Positive = shares at least one label with the anchor; negative = shares
none. Anchors lacking either are skipped.
"""

from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from ..prototypes.prototype_set import PrototypeSet


@dataclass(frozen=True)
class Triplet:
    anchor: int
    positive: int
    negative: int


class PrototypePair(NamedTuple):
    """Anchor sample with one positive and one negative prototype class."""

    anchor: int
    positive_class: int
    negative_class: int


def shares_label(labels_a: np.ndarray, labels_b: np.ndarray) -> np.ndarray:
    """Boolean matrix: [i, j] is True when row i of a and row j of b share a label."""
    a = np.asarray(labels_a, dtype=np.float64)
    b = np.asarray(labels_b, dtype=np.float64)
    return (a @ b.T) > 0


def mine_triplets(labels: np.ndarray, rng: np.random.Generator) -> List[Triplet]:
    """
    Sample one positive and one negative per anchor from the same batch.

    Args:
        labels: (n, C) multi-hot labels of the batch
        rng: Seeded generator

    Returns:
        Triplets in anchor order
    """
    related = shares_label(labels, labels)
    n = related.shape[0]
    triplets = []
    for i in range(n):
        positives = np.flatnonzero(related[i])
        positives = positives[positives != i]
        negatives = np.flatnonzero(~related[i])
        if len(positives) == 0 or len(negatives) == 0:
            continue
        p = int(positives[rng.integers(len(positives))])
        q = int(negatives[rng.integers(len(negatives))])
        triplets.append(Triplet(i, p, q))
    return triplets


def select_prototype_pairs(labels: np.ndarray, prototypes: PrototypeSet,
                           rng: np.random.Generator) -> List[PrototypePair]:
    """
    Pick a positive and a negative prototype class for every anchor.

    The positive is drawn from the anchor's classes that have a valid
    prototype, the negative from valid classes the anchor does not carry.

    Args:
        labels: (n, C) multi-hot labels
        prototypes: Current global prototypes
        rng: Seeded generator

    Returns:
        One PrototypePair per usable anchor
    """
    labels = np.asarray(labels) > 0
    valid = prototypes.valid
    pairs = []
    for i, row in enumerate(labels):
        pos = np.flatnonzero(row & valid)
        neg = np.flatnonzero(~row & valid)
        if len(pos) == 0 or len(neg) == 0:
            continue
        pairs.append(PrototypePair(i, int(pos[rng.integers(len(pos))]), int(neg[rng.integers(len(neg))])))
    return pairs
