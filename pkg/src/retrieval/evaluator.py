"""
RetrievalEvaluator - Encode the query and database splits with a hash
head and compute retrieval metrics.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..data.dataset import Dataset, split_indices
from ..hashing.models import HashHead
from .database import CodeDatabase
from .metrics import map_summary, pr_at_topn, precision_recall_curve

logger = logging.getLogger(__name__)

DEFAULT_TOPN = [1, 5, 10, 20, 50, 100, 200, 500]


class RetrievalEvaluator:
    """Evaluates hash heads on a dataset's query and database splits."""

    def __init__(self, dataset: Dataset, top_n: Optional[int] = None,
                 train_from_database: bool = False):
        """
        Args:
            dataset: Dataset with split tags
            top_n: mAP truncation (None = whole database)
            train_from_database: Also place the training samples in the database
        """
        train, query, db = split_indices(dataset)
        if train_from_database:
            db = np.sort(np.concatenate([db, train]))
        self.dataset = dataset
        self.query_idx = query
        self.db_idx = db
        self.top_n = top_n

    def databases(self, head: HashHead):
        queries = CodeDatabase.from_head(head, *self.dataset.subset(self.query_idx))
        db = CodeDatabase.from_head(head, *self.dataset.subset(self.db_idx))
        return queries, db

    def evaluate_map(self, head: HashHead) -> float:
        queries, db = self.databases(head)
        summary = map_summary(queries, db, self.top_n)
        if summary.skipped:
            logger.debug("%d queries had no relevant database item", summary.skipped)
        return summary.value

    def full_report(self, head: HashHead, ns: Sequence[int] = DEFAULT_TOPN) -> Dict:
        """mAP, PR curve points and P/R@N table for one head."""
        queries, db = self.databases(head)
        summary = map_summary(queries, db, self.top_n)
        return {
            'map': summary.value,
            'map_queries_evaluated': summary.evaluated,
            'map_queries_skipped': summary.skipped,
            'pr_curve': [{'recall': r, 'precision': p} for r, p in precision_recall_curve(queries, db)],
            'pr_at_topn': pr_at_topn(queries, db, ns),
        }

    def silo_databases(self, head: HashHead, partitions: Sequence[np.ndarray]) -> List[CodeDatabase]:
        """
        Per-client databases: each client's share of the database split.

        A database sample belongs to the client whose partition holds it;
        the others are dealt round-robin over the clients.
        """
        owner_of = {}
        for client_id, part in enumerate(partitions):
            for i in part:
                owner_of[int(i)] = client_id
        buckets: Dict[int, List[int]] = {c: [] for c in range(len(partitions))}
        dealt = 0
        for i in self.db_idx:
            owner = owner_of.get(int(i))
            if owner is None:
                owner = dealt % len(partitions)
                dealt += 1
            buckets[owner].append(int(i))
        return [CodeDatabase.from_head(head, *self.dataset.subset(np.array(buckets[c], dtype=np.int64)),
                                       owner=c)
                for c in range(len(partitions))]


def evaluate_model(head: HashHead, dataset: Dataset, top_n: Optional[int] = None,
                   train_from_database: bool = False) -> float:
    """mAP of a hash head on a dataset's query/database splits; the per-round hook of a run."""
    return RetrievalEvaluator(dataset, top_n, train_from_database).evaluate_map(head)
