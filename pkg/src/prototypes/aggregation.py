"""
Client-side class means and server-side sign aggregation of prototypes.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, ProtocolError
from ..hashing.codes import binarize
from ..hashing.models import HashHead, hash_forward
from .prototype_set import ClassMeanReport, PrototypeSet

logger = logging.getLogger(__name__)


def local_class_means(head: HashHead, features: np.ndarray, labels: np.ndarray) -> ClassMeanReport:
    """
    Mean head output per class over a client's samples.

    A multi-label sample contributes to the mean of every class it carries.

    Args:
        head: The client's hash head after local training
        features: (n, d) client features
        labels: (n, C) multi-hot labels

    Returns:
        ClassMeanReport with counts for all C classes
    """
    labels = np.asarray(labels) > 0
    counts = labels.sum(axis=0).astype(np.int64)
    if labels.shape[0] == 0:
        return ClassMeanReport(counts=counts)
    b = np.atleast_2d(hash_forward(head, features))
    if b.shape[0] != labels.shape[0]:
        raise ConfigurationError(f"{b.shape[0]} features but {labels.shape[0]} label rows")
    means = {int(c): b[labels[:, c]].mean(axis=0) for c in np.flatnonzero(counts)}
    return ClassMeanReport(counts=counts, means=means)


def _order_free_sum(rows: np.ndarray) -> np.ndarray:
    # sorting each column first makes the float sum independent of report order
    return np.sort(rows, axis=0).sum(axis=0)


def aggregate_prototypes(reports: Sequence[ClassMeanReport], weighted: bool = False,
                         round_index: int = 0, code_bits: Optional[int] = None) -> PrototypeSet:
    """
    Sign of the mean class vector over the clients that report each class.

    Args:
        reports: One report per client
        weighted: Weight each client's mean by its class count
        round_index: Round the prototypes are produced in
        code_bits: Code length for the all-invalid result when nobody reports

    Returns:
        PrototypeSet; classes nobody reported are invalid
    """
    if not reports:
        raise ProtocolError("Prototype aggregation needs at least one client report")
    num_classes = reports[0].num_classes
    if any(r.num_classes != num_classes for r in reports):
        raise ProtocolError("Client reports disagree on the number of classes")

    by_class = {c: [] for c in range(num_classes)}
    for r in reports:
        for c in r.reported_classes():
            by_class[c].append((r.means[c], r.counts[c]))
    found = next((len(entries[0][0]) for entries in by_class.values() if entries), None)
    if found is None:
        logger.warning("No client reported any class; all prototypes invalid")
        return PrototypeSet.empty(num_classes, code_bits or 1, round_index)

    codes = np.zeros((num_classes, found))
    valid = np.zeros(num_classes, dtype=bool)
    for c, contributions in by_class.items():
        if not contributions:
            continue
        stacked = np.vstack([m for m, _ in contributions])
        if weighted:
            counts = np.array([n for _, n in contributions], dtype=np.float64)
            mean = _order_free_sum(stacked * counts[:, None]) / counts.sum()
        else:
            mean = _order_free_sum(stacked) / len(contributions)
        codes[c] = binarize(mean)
        valid[c] = True

    missing = np.flatnonzero(~valid)
    if len(missing):
        logger.debug("Prototypes invalid for unreported classes %s", missing.tolist())
    return PrototypeSet(codes, valid, round_index)
