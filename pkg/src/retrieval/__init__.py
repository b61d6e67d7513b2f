"""Hamming-ranking retrieval and its evaluation metrics."""

from .database import CodeDatabase, RetrievalResult
from .ranking import cross_silo_query, hamming, hamming_matrix, rank_database
from .metrics import (
    MapSummary,
    average_precision,
    map_summary,
    mean_average_precision,
    pr_at_topn,
    precision_recall_curve,
    relevance_matrix,
)
from .evaluator import DEFAULT_TOPN, RetrievalEvaluator, evaluate_model

__all__ = [
    'CodeDatabase', 'RetrievalResult',
    'cross_silo_query', 'hamming', 'hamming_matrix', 'rank_database',
    'MapSummary', 'average_precision', 'map_summary', 'mean_average_precision',
    'pr_at_topn', 'precision_recall_curve', 'relevance_matrix',
    'DEFAULT_TOPN', 'RetrievalEvaluator', 'evaluate_model',
]
