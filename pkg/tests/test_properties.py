"""
Property-based tests for codes, losses, prototypes, partitions and ranking.
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.errors import DomainError
from src.federation import partition_iid, partition_shard_noniid
from src.hashing import (
    Distance,
    LossWeights,
    Triplet,
    binarize,
    mine_triplets,
    quantization_loss,
    triplet_loss_local,
)
from src.prototypes import ClassMeanReport, aggregate_prototypes
from src.retrieval import CodeDatabase, hamming, map_summary, mean_average_precision, rank_database

PROPERTY_SETTINGS = settings(max_examples=1000, deadline=None)

bits = st.sampled_from([-1, 1])
unit_floats = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
# multiples of 1/8: rescaling by a power of two stays exact
grid_floats = st.integers(min_value=-16, max_value=16).map(lambda v: v / 8.0)


@st.composite
def code_triples(draw):
    k = draw(st.integers(min_value=1, max_value=32))
    code = st.lists(bits, min_size=k, max_size=k).map(np.array)
    return draw(code), draw(code), draw(code)


@st.composite
def real_batches(draw, min_rows=3, max_rows=8):
    n = draw(st.integers(min_value=min_rows, max_value=max_rows))
    k = draw(st.integers(min_value=2, max_value=8))
    values = draw(st.lists(unit_floats, min_size=n * k, max_size=n * k))
    return np.array(values).reshape(n, k)


@st.composite
def batch_with_triplets(draw):
    b = draw(real_batches())
    n = b.shape[0]
    index = st.integers(min_value=0, max_value=n - 1)
    triplets = draw(st.lists(st.builds(Triplet, index, index, index), min_size=1, max_size=6))
    return b, triplets


class TestCodeProperties:
    """Hamming metric axioms and binarize."""

    @PROPERTY_SETTINGS
    @given(code_triples())
    def test_hamming_is_a_metric(self, codes):
        """Test Hamming distance satisfies the metric axioms."""
        a, b, c = codes
        assert hamming(a, b) == hamming(b, a)
        assert (hamming(a, b) == 0) == bool(np.array_equal(a, b))
        assert hamming(a, c) <= hamming(a, b) + hamming(b, c)
        assert 0 <= hamming(a, b) <= len(a)

    @PROPERTY_SETTINGS
    @given(st.lists(unit_floats, min_size=1, max_size=64))
    def test_binarize_idempotent(self, values):
        """Test binarize is idempotent."""
        once = binarize(np.array(values))
        assert set(np.unique(once)) <= {-1.0, 1.0}
        assert np.array_equal(binarize(once), once)


class TestLossProperties:
    """Non-negativity, quantization zeros and cosine scale invariance."""

    @PROPERTY_SETTINGS
    @given(real_batches(min_rows=1))
    def test_quantization_zero_iff_binary(self, b):
        """Test the quantization loss vanishes exactly on binary rows."""
        term = quantization_loss(b)
        assert term.value >= 0.0
        assert (term.value == 0.0) == bool(np.all(np.abs(b) == 1.0))

    @PROPERTY_SETTINGS
    @given(batch_with_triplets(), st.sampled_from(list(Distance)))
    def test_triplet_loss_non_negative(self, data, metric):
        """Test the triplet loss is non-negative with finite gradients."""
        b, triplets = data
        term = triplet_loss_local(b, triplets, LossWeights(distance=metric))
        assert term.value >= 0.0
        assert np.all(np.isfinite(term.grad))

    @PROPERTY_SETTINGS
    @given(batch_with_triplets(), st.floats(min_value=0.1, max_value=10.0), st.data())
    def test_cosine_rescaling_one_row(self, data, alpha, draw):
        """Test rescaling one row leaves the cosine loss unchanged."""
        b, triplets = data
        assume(np.all(np.linalg.norm(b, axis=1) > 1e-3))
        row = draw.draw(st.integers(min_value=0, max_value=b.shape[0] - 1))
        scaled = b.copy()
        scaled[row] *= alpha
        w = LossWeights()
        assert triplet_loss_local(scaled, triplets, w).value == pytest.approx(
            triplet_loss_local(b, triplets, w).value, rel=1e-9, abs=1e-9)

    @PROPERTY_SETTINGS
    @given(real_batches(min_rows=3, max_rows=3), st.floats(min_value=1.0, max_value=8.0))
    def test_farther_negative_never_costs_more(self, b, s):
        """Test pushing the negative away along a-n does not raise the Euclidean loss."""
        w = LossWeights(distance=Distance.EUCLIDEAN)
        moved = b.copy()
        moved[2] = b[0] + s * (b[2] - b[0])
        base = triplet_loss_local(b, [Triplet(0, 1, 2)], w).value
        assert triplet_loss_local(moved, [Triplet(0, 1, 2)], w).value <= base + 1e-9

    @PROPERTY_SETTINGS
    @given(real_batches(min_rows=3, max_rows=3), st.floats(min_value=1.0, max_value=8.0))
    def test_farther_positive_never_costs_less(self, b, s):
        """Test pushing the positive away along a-p does not lower the Euclidean loss."""
        w = LossWeights(distance=Distance.EUCLIDEAN)
        moved = b.copy()
        moved[1] = b[0] + s * (b[1] - b[0])
        base = triplet_loss_local(b, [Triplet(0, 1, 2)], w).value
        assert triplet_loss_local(moved, [Triplet(0, 1, 2)], w).value >= base - 1e-9

    @PROPERTY_SETTINGS
    @given(st.lists(st.integers(min_value=0, max_value=3), min_size=2, max_size=12), st.integers(0, 2 ** 16))
    def test_mined_triplets_respect_labels(self, classes, seed):
        """Test mined triplets respect single labels."""
        labels = np.eye(4, dtype=np.int8)[classes]
        for t in mine_triplets(labels, np.random.default_rng(seed)):
            assert classes[t.anchor] == classes[t.positive] and t.anchor != t.positive
            assert classes[t.anchor] != classes[t.negative]


@st.composite
def class_mean_reports(draw, values=unit_floats):
    m = draw(st.integers(min_value=1, max_value=5))
    k = draw(st.integers(min_value=1, max_value=6))
    out = []
    for _ in range(m):
        present = draw(st.lists(st.booleans(), min_size=3, max_size=3))
        means = {c: np.array(draw(st.lists(values, min_size=k, max_size=k)))
                 for c in range(3) if present[c]}
        out.append(ClassMeanReport(counts=np.array(present, dtype=np.int64), means=means))
    return out


@st.composite
def shard_problems(draw):
    """Single-label classes with k and m chosen so every class has an owner."""
    classes = draw(st.lists(st.integers(min_value=0, max_value=5), min_size=6, max_size=60))
    present = len(set(classes))
    k = draw(st.integers(min_value=1, max_value=min(3, present)))
    fewest = -(-present // k)
    m = draw(st.integers(min_value=fewest, max_value=max(fewest, 6)))
    return classes, m, k


class TestPrototypeProperties:
    """Sign aggregation."""

    @PROPERTY_SETTINGS
    @given(class_mean_reports(), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, reports, random):
        """Test prototypes do not depend on report order."""
        assume(any(r.means for r in reports))
        shuffled = list(reports)
        random.shuffle(shuffled)
        assert aggregate_prototypes(reports).same_as(aggregate_prototypes(shuffled))

    @PROPERTY_SETTINGS
    @given(st.lists(unit_floats, min_size=1, max_size=16))
    def test_single_client_is_sign_of_mean(self, mean):
        """Test one client gives the sign of its mean."""
        report = ClassMeanReport(counts=np.array([1]), means={0: np.array(mean)})
        protos = aggregate_prototypes([report])
        assert np.array_equal(protos.codes[0], binarize(np.array(mean)))

    @PROPERTY_SETTINGS
    @given(class_mean_reports(grid_floats), st.sampled_from([2.0, 4.0, 8.0]), st.booleans())
    def test_positive_rescaling_invariant(self, reports, factor, weighted):
        """Test scaling every client's means by a positive factor keeps the prototypes."""
        assume(any(r.means for r in reports))
        scaled = [ClassMeanReport(counts=r.counts.copy(), means={c: m * factor for c, m in r.means.items()})
                  for r in reports]
        assert aggregate_prototypes(reports, weighted).same_as(aggregate_prototypes(scaled, weighted))


class TestPartitionProperties:
    """Disjoint cover and class support."""

    @PROPERTY_SETTINGS
    @given(st.integers(min_value=1, max_value=200), st.integers(min_value=1, max_value=20),
           st.integers(0, 2 ** 16))
    def test_iid_disjoint_cover(self, n, m, seed):
        """Test IID shards are a near-even disjoint cover."""
        assume(m <= n)
        parts = partition_iid(n, m, seed)
        joined = np.concatenate(parts)
        assert np.array_equal(np.sort(joined), np.arange(n))
        sizes = [len(p) for p in parts]
        assert max(sizes) - min(sizes) <= 1

    @PROPERTY_SETTINGS
    @given(shard_problems(), st.integers(0, 2 ** 16))
    def test_shard_disjoint_cover_and_support(self, problem, seed):
        """Test shard partitions cover disjointly within the class quota."""
        classes, m, k = problem
        labels = np.eye(6, dtype=np.int8)[classes]
        parts = partition_shard_noniid(labels, m, k, seed)
        joined = np.concatenate(parts)
        assert np.array_equal(np.sort(joined), np.arange(len(classes)))
        for part in parts:
            assert len(set(classes[i] for i in part)) <= k


class TestRankingProperties:
    """Ranking order and mAP range."""

    @PROPERTY_SETTINGS
    @given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=16),
           st.integers(0, 2 ** 16))
    def test_ranking_sorted_and_complete(self, n, k, seed):
        """Test rankings are complete and sorted by distance."""
        rng = np.random.default_rng(seed)
        db = CodeDatabase(rng.choice([-1, 1], size=(n, k)), np.ones((n, 1)))
        result = rank_database(rng.choice([-1, 1], size=k), db)
        assert sorted(result.indices.tolist()) == list(range(n))
        assert np.all(np.diff(result.distances) >= 0)

    @PROPERTY_SETTINGS
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=20),
           st.integers(0, 2 ** 16))
    def test_map_in_unit_interval(self, nq, nd, seed):
        """Test mAP lies in (0, 1]."""
        rng = np.random.default_rng(seed)
        queries = CodeDatabase(rng.choice([-1, 1], size=(nq, 8)), rng.integers(0, 2, size=(nq, 3)))
        db = CodeDatabase(rng.choice([-1, 1], size=(nd, 8)), rng.integers(0, 2, size=(nd, 3)))
        try:
            summary = map_summary(queries, db)
        except DomainError:
            assume(False)
        assert 0.0 < summary.value <= 1.0
        assert summary.evaluated + summary.skipped == nq

    @PROPERTY_SETTINGS
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=20),
           st.integers(0, 2 ** 16))
    def test_full_depth_truncation_is_untruncated(self, nq, nd, seed):
        """Test mAP truncated at the database size equals the untruncated mAP."""
        rng = np.random.default_rng(seed)
        queries = CodeDatabase(rng.choice([-1, 1], size=(nq, 8)), rng.integers(0, 2, size=(nq, 3)))
        db = CodeDatabase(rng.choice([-1, 1], size=(nd, 8)), rng.integers(0, 2, size=(nd, 3)))
        try:
            full = mean_average_precision(queries, db)
        except DomainError:
            assume(False)
        assert mean_average_precision(queries, db, top_n=nd) == full

    @PROPERTY_SETTINGS
    @given(st.integers(min_value=1, max_value=16), st.integers(0, 2 ** 16))
    def test_map_invariant_to_database_order(self, k, seed):
        """Test permuting a database with distinct query distances keeps mAP."""
        rng = np.random.default_rng(seed)
        query = rng.choice([-1, 1], size=k)
        # row j differs from the query in its first j bits
        codes = np.array([np.concatenate([-query[:j], query[j:]]) for j in range(k + 1)])
        labels = rng.integers(0, 2, size=(k + 1, 2))
        labels[rng.integers(0, k + 1), 0] = 1
        queries = CodeDatabase(query[None, :], np.array([[1, 0]]))
        order = rng.permutation(k + 1)
        assert mean_average_precision(queries, CodeDatabase(codes, labels)) == \
            mean_average_precision(queries, CodeDatabase(codes[order], labels[order]))
