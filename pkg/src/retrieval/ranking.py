"""
Hamming ranking over one database and scatter-gather over many silos.
"""

import heapq
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from .database import CodeDatabase, RetrievalResult


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    """Number of positions where two codes differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ConfigurationError(f"Code lengths differ: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def hamming_matrix(queries: np.ndarray, database: np.ndarray) -> np.ndarray:
    """(nq, nd) Hamming distances between two {-1, +1} code matrices."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.int64))
    database = np.atleast_2d(np.asarray(database, dtype=np.int64))
    if queries.shape[1] != database.shape[1]:
        raise ConfigurationError(
            f"Query codes have {queries.shape[1]} bits, database codes {database.shape[1]}")
    k = queries.shape[1]
    return (k - queries @ database.T) // 2


def rank_database(query: np.ndarray, db: CodeDatabase,
                  query_labels: Optional[np.ndarray] = None) -> RetrievalResult:
    """
    Rank a database by Hamming distance to the query.

    Ties are broken by ascending database index.

    Args:
        query: (K,) code
        db: Database to rank
        query_labels: Optional (C,) labels; fills the relevance flags

    Returns:
        RetrievalResult over the whole database
    """
    if db.size == 0:
        return RetrievalResult.empty()
    distances = hamming_matrix(query, db.codes)[0]
    order = np.argsort(distances, kind='stable')
    relevant = None
    if query_labels is not None:
        relevant = (db.labels[order] @ np.asarray(query_labels, dtype=np.int64)) > 0
    return RetrievalResult(indices=order, distances=distances[order], relevant=relevant)


def cross_silo_query(query: np.ndarray, silos: Sequence[CodeDatabase], k: int,
                     query_labels: Optional[np.ndarray] = None) -> RetrievalResult:
    """
    Send a query to every silo and merge their local top-k into a global top-k.

    Silo ids are each database's owner, or its list position when unset.
    Ties break by (silo id, index), so the result equals ranking the union
    of the silos concatenated in silo-id order.

    Args:
        query: (K,) code
        silos: Per-client databases
        k: Number of results to keep
        query_labels: Optional labels for relevance flags

    Returns:
        RetrievalResult with silo ids filled in
    """
    if k <= 0:
        raise ConfigurationError(f"k must be positive, got {k}")
    bits = {db.code_bits for db in silos if db.size}
    if len(bits) > 1:
        raise ConfigurationError(f"Silos disagree on code length: {sorted(bits)}")

    streams = []
    for position, db in enumerate(silos):
        if db.size == 0:
            continue
        silo_id = db.owner if db.owner is not None else position
        local = rank_database(query, db, query_labels)
        top = slice(0, k)
        flags = local.relevant[top] if local.relevant is not None else [None] * len(local.indices[top])
        streams.append([(int(d), silo_id, int(i), f)
                        for d, i, f in zip(local.distances[top], local.indices[top], flags)])

    merged = list(heapq.merge(*streams, key=lambda item: item[:3]))[:k]
    if not merged:
        return RetrievalResult.empty()
    return RetrievalResult(
        indices=np.array([m[2] for m in merged], dtype=np.int64),
        distances=np.array([m[0] for m in merged], dtype=np.int64),
        relevant=None if query_labels is None else np.array([m[3] for m in merged], dtype=bool),
        silos=np.array([m[1] for m in merged], dtype=np.int64),
    )
