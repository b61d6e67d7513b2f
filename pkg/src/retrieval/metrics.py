"""
Hamming-ranking metrics: mAP, precision-recall curve and P/R at top-N.

Relevance means the query and the database item share at least one label.
Rankings break distance ties by database index.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DomainError
from .database import CodeDatabase
from .ranking import hamming_matrix

logger = logging.getLogger(__name__)


@dataclass
class MapSummary:
    """mAP plus the bookkeeping behind it."""

    value: float
    evaluated: int
    skipped: int
    average_precisions: List[float] = field(default_factory=list)


def relevance_matrix(query_labels: np.ndarray, db_labels: np.ndarray) -> np.ndarray:
    """(nq, nd) boolean: query i and item j share a label."""
    return (np.asarray(query_labels, dtype=np.int64) @ np.asarray(db_labels, dtype=np.int64).T) > 0


def _ranked(queries: CodeDatabase, db: CodeDatabase) -> Tuple[np.ndarray, np.ndarray]:
    """Per-query distances and relevance flags, both in ranked order."""
    distances = hamming_matrix(queries.codes, db.codes)
    order = np.argsort(distances, axis=1, kind='stable')
    relevance = relevance_matrix(queries.labels, db.labels)
    return (np.take_along_axis(distances, order, axis=1),
            np.take_along_axis(relevance, order, axis=1))


def average_precision(ranked_relevance: np.ndarray) -> Optional[float]:
    """AP of one ranked relevance vector; None when nothing is relevant."""
    ranked_relevance = np.asarray(ranked_relevance, dtype=bool)
    hits = int(ranked_relevance.sum())
    if hits == 0:
        return None
    ranks = np.flatnonzero(ranked_relevance) + 1
    precision_at_hits = np.arange(1, hits + 1) / ranks
    return float(precision_at_hits.mean())


def map_summary(queries: CodeDatabase, db: CodeDatabase, top_n: Optional[int] = None) -> MapSummary:
    """
    mAP with the count of queries that had nothing relevant in the ranking.

    Args:
        queries: Query codes and labels
        db: Database codes and labels
        top_n: Truncate each ranking to this many items (None = whole database)

    Returns:
        MapSummary

    Raises:
        DomainError: if no query has a relevant item
    """
    if db.size == 0 or queries.size == 0:
        raise DomainError("mAP needs at least one query and one database item")
    _, relevance = _ranked(queries, db)
    if top_n is not None:
        relevance = relevance[:, :max(int(top_n), 0)]

    aps, skipped = [], 0
    for row in relevance:
        ap = average_precision(row)
        if ap is None:
            skipped += 1
        else:
            aps.append(ap)
    if not aps:
        raise DomainError("No query has a relevant database item")
    if skipped:
        logger.debug("mAP excluded %d of %d queries with no relevant item", skipped, queries.size)
    return MapSummary(float(np.mean(aps)), len(aps), skipped, aps)


def mean_average_precision(queries: CodeDatabase, db: CodeDatabase,
                           top_n: Optional[int] = None) -> float:
    """Mean over queries of average precision along the Hamming ranking."""
    return map_summary(queries, db, top_n).value


def precision_recall_curve(queries: CodeDatabase, db: CodeDatabase) -> List[Tuple[float, float]]:
    """
    Micro-averaged (recall, precision) points for Hamming radius 0..K.

    Radii at which no relevant item is retrieved are skipped.
    """
    if db.size == 0 or queries.size == 0:
        raise DomainError("PR curve needs at least one query and one database item")
    distances = hamming_matrix(queries.codes, db.codes)
    relevance = relevance_matrix(queries.labels, db.labels)
    total_relevant = int(relevance.sum())
    if total_relevant == 0:
        raise DomainError("No query has a relevant database item")

    points = []
    for radius in range(db.code_bits + 1):
        retrieved = distances <= radius
        n_retrieved = int(retrieved.sum())
        hits = int((retrieved & relevance).sum())
        if hits == 0:
            continue
        points.append((hits / total_relevant, hits / n_retrieved))
    return points


def pr_at_topn(queries: CodeDatabase, db: CodeDatabase, ns: Sequence[int]) -> List[Dict[str, float]]:
    """
    Precision and recall after the top n items, averaged over queries.

    Queries with no relevant item in the database are left out.

    Returns:
        One {'n', 'precision', 'recall'} row per requested n
    """
    if db.size == 0 or queries.size == 0:
        raise DomainError("P/R@N needs at least one query and one database item")
    _, relevance = _ranked(queries, db)
    totals = relevance.sum(axis=1)
    usable = totals > 0
    if not usable.any():
        raise DomainError("No query has a relevant database item")
    relevance, totals = relevance[usable], totals[usable]
    cumulative = np.cumsum(relevance, axis=1)

    rows = []
    for n in ns:
        cut = min(max(int(n), 1), db.size)
        hits = cumulative[:, cut - 1]
        rows.append({
            'n': int(n),
            'precision': float(np.mean(hits / cut)),
            'recall': float(np.mean(hits / totals)),
        })
    return rows
