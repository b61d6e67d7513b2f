"""
Tests for Hamming ranking, retrieval metrics and the evaluator.
"""

import itertools

import numpy as np
import pytest

from src.errors import ConfigurationError, DomainError
from src.retrieval import (
    CodeDatabase,
    RetrievalEvaluator,
    average_precision,
    cross_silo_query,
    evaluate_model,
    hamming,
    hamming_matrix,
    map_summary,
    mean_average_precision,
    pr_at_topn,
    precision_recall_curve,
    rank_database,
)
from tests.fixtures import identity_head, labelled_dataset, one_hot, small_head, tiny_dataset


def codes(*rows) -> np.ndarray:
    return np.array(rows, dtype=np.int8)


class TestHamming:
    """Tests for hamming() and hamming_matrix()."""

    def test_identical(self):
        """Test identical codes are at distance 0."""
        a = codes(1, -1, 1)
        assert hamming(a, a) == 0

    def test_opposite(self):
        """Test opposite codes are at the full code length."""
        a = codes(1, -1, 1, 1)
        assert hamming(a, -a) == 4

    def test_hand_count(self):
        """Test Hamming distance against a hand count."""
        assert hamming(codes(1, -1, 1, 1), codes(1, 1, -1, 1)) == 2

    def test_length_mismatch(self):
        """Test codes of different lengths are rejected."""
        with pytest.raises(ConfigurationError):
            hamming(codes(1, 1), codes(1, 1, 1))

    def test_matrix_matches_pairwise(self):
        """Test the distance matrix matches pairwise distances."""
        rng = np.random.default_rng(0)
        q = rng.choice([-1, 1], size=(4, 9))
        d = rng.choice([-1, 1], size=(6, 9))
        matrix = hamming_matrix(q, d)
        for i, j in itertools.product(range(4), range(6)):
            assert matrix[i, j] == hamming(q[i], d[j])


class TestRankDatabase:
    """Tests for rank_database()."""

    def test_single_item(self):
        """Test ranking a one-item database."""
        db = CodeDatabase(codes([1, -1]), one_hot([0], 1))
        assert rank_database(codes(-1, -1), db).indices.tolist() == [0]

    def test_exact_match_first(self):
        """Test an exact match ranks first."""
        db = CodeDatabase(codes([1, 1, 1], [-1, 1, -1], [1, -1, 1]), one_hot([0, 0, 0], 1))
        result = rank_database(codes(-1, 1, -1), db)
        assert result.indices[0] == 1
        assert result.distances[0] == 0

    def test_hand_fixed_order(self):
        """Test a hand-fixed ranking with index tie-break."""
        db_codes = codes([1, 1, 1, 1], [-1, -1, -1, -1], [1, 1, -1, -1], [1, 1, 1, -1], [-1, 1, 1, 1])
        query = codes(1, 1, 1, 1)
        result = rank_database(query, CodeDatabase(db_codes, one_hot([0] * 5, 1)))
        # distances 0, 4, 2, 1, 1; ties by index
        assert result.indices.tolist() == [0, 3, 4, 2, 1]
        assert result.distances.tolist() == [0, 1, 1, 2, 4]

    def test_relevance_flags(self):
        """Test relevance flags follow shared labels."""
        db = CodeDatabase(codes([1, 1], [-1, -1]), one_hot([0, 1], 2))
        result = rank_database(codes(-1, -1), db, query_labels=np.array([1, 0]))
        assert result.relevant.tolist() == [False, True]

    def test_empty_database(self):
        """Test ranking an empty database."""
        result = rank_database(codes(1, 1), CodeDatabase(np.zeros((0, 2)), np.zeros((0, 1))))
        assert len(result) == 0

    def test_codes_must_be_binary(self):
        """Test non-binary codes are rejected."""
        with pytest.raises(ConfigurationError):
            CodeDatabase(np.array([[1, 0]]), one_hot([0], 1))


class TestCrossSiloQuery:
    """Tests for cross_silo_query()."""

    def random_db(self, rng, n: int, k: int = 8, owner=None) -> CodeDatabase:
        return CodeDatabase(rng.choice([-1, 1], size=(n, k)), one_hot(rng.integers(0, 3, n), 3), owner)

    def test_single_silo_is_truncated_ranking(self):
        """Test one silo gives its truncated ranking."""
        rng = np.random.default_rng(1)
        db = self.random_db(rng, 20)
        query = rng.choice([-1, 1], size=8)
        merged = cross_silo_query(query, [db], 5)
        local = rank_database(query, db)
        assert merged.indices.tolist() == local.indices[:5].tolist()
        assert merged.silos.tolist() == [0] * 5

    def test_duplicate_code_in_two_silos(self):
        """Test equal codes in two silos rank by silo."""
        shared = codes([1, -1, 1])
        silos = [CodeDatabase(shared, one_hot([0], 1)), CodeDatabase(shared, one_hot([0], 1))]
        result = cross_silo_query(codes(1, -1, 1), silos, 2)
        assert result.ids() == [(0, 0), (1, 0)]

    def test_owner_ids_used(self):
        """Test results carry the silo owner ids."""
        shared = codes([1, 1])
        silos = [CodeDatabase(shared, one_hot([0], 1), owner=7), CodeDatabase(shared, one_hot([0], 1), owner=2)]
        assert [s for s, _ in cross_silo_query(codes(1, 1), silos, 2).ids()] == [2, 7]

    def test_matches_union_ranking(self):
        """Test the merge matches ranking the union."""
        rng = np.random.default_rng(2)
        silos = [self.random_db(rng, 20) for _ in range(3)]
        for _ in range(10):
            query = rng.choice([-1, 1], size=8)
            merged = cross_silo_query(query, silos, 5)
            union = rank_database(query, CodeDatabase(np.vstack([s.codes for s in silos]),
                                                      np.vstack([s.labels for s in silos])))
            expected = [(int(i) // 20, int(i) % 20) for i in union.indices[:5]]
            assert merged.ids() == expected
            assert merged.distances.tolist() == union.distances[:5].tolist()

    def test_all_silos_empty(self):
        """Test empty silos give an empty result."""
        empty = CodeDatabase(np.zeros((0, 4)), np.zeros((0, 2)))
        assert len(cross_silo_query(codes(1, 1, 1, 1), [empty, empty], 3)) == 0

    def test_k_must_be_positive(self):
        """Test k must be positive."""
        with pytest.raises(ConfigurationError):
            cross_silo_query(codes(1, 1), [], 0)


class TestAveragePrecision:
    """Tests for average_precision() and mean_average_precision()."""

    def test_relevant_at_ranks_one_and_three(self):
        """Test AP with hits at ranks one and three."""
        assert average_precision([True, False, True, False]) == pytest.approx(5 / 6)

    def test_nothing_relevant(self):
        """Test AP of a ranking without hits is None."""
        assert average_precision([False, False]) is None

    def test_all_relevant_gives_one(self):
        """Test AP of an all-relevant ranking is 1."""
        rng = np.random.default_rng(0)
        queries = CodeDatabase(rng.choice([-1, 1], size=(3, 6)), one_hot([0, 0, 0], 2))
        db = CodeDatabase(rng.choice([-1, 1], size=(10, 6)), one_hot([0] * 10, 2))
        assert mean_average_precision(queries, db) == 1.0

    def test_hand_ranking(self):
        """Test mAP against a hand-ranked example."""
        queries = CodeDatabase(codes([1, 1, 1]), one_hot([0], 2))
        # distances 0, 1, 2, 3 -> relevant at ranks 1 and 3
        db = CodeDatabase(codes([1, 1, 1], [1, 1, -1], [1, -1, -1], [-1, -1, -1]), one_hot([0, 1, 0, 1], 2))
        assert mean_average_precision(queries, db) == pytest.approx(5 / 6)

    def test_top_n_truncation(self):
        """Test mAP truncated to the top N."""
        queries = CodeDatabase(codes([1, 1, 1]), one_hot([0], 2))
        db = CodeDatabase(codes([1, 1, 1], [1, 1, -1], [1, -1, -1], [-1, -1, -1]), one_hot([0, 1, 0, 1], 2))
        assert mean_average_precision(queries, db, top_n=2) == pytest.approx(1.0)

    def test_queries_without_relevant_items_skipped(self):
        """Test queries with nothing relevant are skipped."""
        queries = CodeDatabase(codes([1, 1], [-1, -1]), one_hot([0, 1], 3))
        db = CodeDatabase(codes([1, 1], [1, -1]), one_hot([0, 0], 3))
        summary = map_summary(queries, db)
        assert summary.evaluated == 1 and summary.skipped == 1
        assert summary.value == 1.0

    def test_no_relevant_anywhere(self):
        """Test mAP with no relevant item anywhere raises DomainError."""
        queries = CodeDatabase(codes([1, 1]), one_hot([1], 2))
        db = CodeDatabase(codes([1, 1]), one_hot([0], 2))
        with pytest.raises(DomainError):
            mean_average_precision(queries, db)


class TestPrecisionRecall:
    """Tests for precision_recall_curve() and pr_at_topn()."""

    def test_perfect_separation(self):
        """Test the PR curve of perfectly separated codes."""
        queries = CodeDatabase(codes([1, 1, 1, 1]), one_hot([0], 2))
        db = CodeDatabase(codes([1, 1, 1, 1], [1, 1, 1, 1], [-1, -1, -1, -1]), one_hot([0, 0, 1], 2))
        points = precision_recall_curve(queries, db)
        assert points[0] == (1.0, 1.0)
        assert points[-1] == (1.0, pytest.approx(2 / 3))

    def test_radius_without_hits_skipped(self):
        """Test radii without relevant hits are left out of the curve."""
        queries = CodeDatabase(codes([1, 1]), one_hot([0], 2))
        db = CodeDatabase(codes([1, 1], [-1, -1]), one_hot([1, 0], 2))
        points = precision_recall_curve(queries, db)
        # radii 0 and 1 retrieve only the irrelevant item
        assert points == [(1.0, 0.5)]

    def test_curve_matches_enumeration(self):
        """Test the PR curve against explicit enumeration."""
        rng = np.random.default_rng(4)
        queries = CodeDatabase(rng.choice([-1, 1], size=(3, 5)), one_hot(rng.integers(0, 2, 3), 2))
        db = CodeDatabase(rng.choice([-1, 1], size=(10, 5)), one_hot(rng.integers(0, 2, 10), 2))
        expected = []
        total = sum(int(np.any(q & d)) for q in queries.labels for d in db.labels)
        for radius in range(6):
            retrieved = hits = 0
            for qc, ql in zip(queries.codes, queries.labels):
                for dc, dl in zip(db.codes, db.labels):
                    if hamming(qc, dc) <= radius:
                        retrieved += 1
                        hits += int(np.any(ql & dl))
            if hits:
                expected.append((hits / total, hits / retrieved))
        points = precision_recall_curve(queries, db)
        assert len(points) == len(expected)
        assert np.allclose(np.array(points), np.array(expected))

    def test_topn_full_database_recall(self):
        """Test P/R at the database size has full recall."""
        rng = np.random.default_rng(5)
        queries = CodeDatabase(rng.choice([-1, 1], size=(4, 6)), one_hot([0, 1, 0, 1], 2))
        db = CodeDatabase(rng.choice([-1, 1], size=(12, 6)), one_hot(np.arange(12) % 2, 2))
        row = pr_at_topn(queries, db, [12])[0]
        assert row['recall'] == 1.0
        assert row['precision'] == pytest.approx(0.5)

    def test_top_one_relevant(self):
        """Test P/R at 1 with a relevant first item."""
        queries = CodeDatabase(codes([1, 1]), one_hot([0], 2))
        db = CodeDatabase(codes([1, 1], [-1, -1]), one_hot([0, 1], 2))
        row = pr_at_topn(queries, db, [1])[0]
        assert row == {'n': 1, 'precision': 1.0, 'recall': 1.0}

    def test_topn_hand_values(self):
        """Test P/R at N against hand values."""
        queries = CodeDatabase(codes([1, 1, 1]), one_hot([0], 2))
        db = CodeDatabase(codes([1, 1, 1], [1, 1, -1], [1, -1, -1], [-1, -1, -1]), one_hot([0, 1, 0, 1], 2))
        rows = pr_at_topn(queries, db, [1, 2, 3])
        assert [r['precision'] for r in rows] == pytest.approx([1.0, 0.5, 2 / 3])
        assert [r['recall'] for r in rows] == pytest.approx([0.5, 0.5, 1.0])


class TestRetrievalEvaluator:
    """Tests for RetrievalEvaluator."""

    def separable_dataset(self):
        # identity head: the sign of each feature is the code
        features = [[1, 1], [-1, -1], [1, 1], [0.9, 0.8], [-0.7, -0.9], [0.5, 0.5], [-0.5, -0.5]]
        labels = one_hot([0, 1, 0, 0, 1, 0, 1], 2)
        splits = ['train', 'train', 'query', 'query', 'query', 'db', 'db']
        return labelled_dataset(features, labels, splits)

    def test_perfect_map(self):
        """Test evaluate_model on separable data gives mAP 1."""
        assert evaluate_model(identity_head(2), self.separable_dataset()) == 1.0

    def test_full_report_keys(self):
        """Test the final report fields."""
        report = RetrievalEvaluator(self.separable_dataset()).full_report(identity_head(2), [1, 2])
        assert report['map'] == 1.0
        assert report['map_queries_evaluated'] == 3
        assert [row['n'] for row in report['pr_at_topn']] == [1, 2]
        assert report['pr_curve'][0] == {'recall': 1.0, 'precision': 1.0}

    def test_train_from_database(self):
        """Test training samples can join the database."""
        evaluator = RetrievalEvaluator(self.separable_dataset(), train_from_database=True)
        assert evaluator.db_idx.tolist() == [0, 1, 5, 6]

    def test_evaluate_model_with_training_items(self):
        """Test evaluate_model ranks training samples when they join the database."""
        # training rows sit on the codes of the other class
        features = [[1, 1], [-1, -1], [0.9, 0.8], [-0.7, -0.9], [0.5, 0.5], [-0.5, -0.5]]
        labels = one_hot([1, 0, 0, 1, 0, 1], 2)
        splits = ['train', 'train', 'query', 'query', 'db', 'db']
        dataset = labelled_dataset(features, labels, splits)
        assert evaluate_model(identity_head(2), dataset) == 1.0
        # each query: irrelevant, relevant, relevant, irrelevant
        assert evaluate_model(identity_head(2), dataset, train_from_database=True) == pytest.approx(7 / 12)

    def test_silo_databases_cover_database_split(self):
        """Test silo databases cover the database split evenly."""
        dataset = tiny_dataset()
        evaluator = RetrievalEvaluator(dataset)
        head = small_head(in_dim=dataset.dim, code_bits=8)
        silos = evaluator.silo_databases(head, [np.array([], dtype=np.int64)] * 3)
        assert sum(s.size for s in silos) == len(evaluator.db_idx)
        assert [s.owner for s in silos] == [0, 1, 2]
        assert max(s.size for s in silos) - min(s.size for s in silos) <= 1
