#!/usr/bin/env python3
"""
Unit tests for the split algebra
"""

import math
import pickle

import pytest

from tests.fixtures.tree_data import WORKED_T1_NEWICK, WORKED_T2_NEWICK, random_pair, split_of
from treedist.errors import CommonSplitError, IncompatibleSplitsError, TaxaMismatchError
from treedist.geodesic import numbered_taxa
from treedist.splits import (
    Split,
    WeightedSplitSet,
    WeightedTree,
    are_compatible,
    common_splits,
    compatibility_set,
    crossing_set,
    decompose_at,
    norm,
    partition_at,
    universally_compatible,
)
from treedist.tree_io import weighted_trees_from_newick


@pytest.fixture
def worked_pair():
    trees, _ = weighted_trees_from_newick([WORKED_T1_NEWICK, WORKED_T2_NEWICK])
    return trees


class TestSplit:
    """Root-free block bitsets"""

    def test_from_leaves(self):
        split = split_of(5, 2, 3)
        assert split.block == 0b1100
        assert split.size == 2
        assert split.leaves == (2, 3)
        assert split.complement == (0, 1, 4, 5)

    def test_string_form(self):
        assert str(split_of(5, 2, 3)) == "23|0145"

    def test_string_form_with_many_taxa(self):
        """Indices are comma separated from n = 10 on"""
        assert str(split_of(10, 2, 10)) == "2,10|0,1,3,4,5,6,7,8,9"

    @pytest.mark.parametrize(
        "block, n",
        [
            (0b111, 4),  # contains the root
            (0b100, 4),  # a single leaf
            (0b11110, 4),  # every leaf, only the root outside
            (1 << 6, 4),  # beyond n
        ],
    )
    def test_trivial_or_invalid_blocks(self, block, n):
        with pytest.raises(ValueError):
            Split(block, n)

    def test_contains_is_proper(self):
        big, small = split_of(6, 1, 2, 3), split_of(6, 1, 2)
        assert big.contains(small)
        assert not small.contains(big)
        assert not big.contains(big)

    def test_pickles(self):
        split = split_of(6, 1, 2)
        assert pickle.loads(pickle.dumps(split)) == split


class TestCompatibility:
    """Disjoint or nested blocks are compatible"""

    @pytest.mark.parametrize(
        "first, second, expected",
        [
            ((1, 2), (3, 4), True),  # disjoint
            ((1, 2), (1, 2, 3), True),  # nested
            ((1, 2), (2, 3), False),  # overlapping
            ((1, 2, 3), (3, 4, 5), False),
        ],
    )
    def test_are_compatible(self, first, second, expected):
        assert are_compatible(split_of(6, *first), split_of(6, *second)) is expected
        assert are_compatible(split_of(6, *second), split_of(6, *first)) is expected

    def test_different_taxa_counts(self):
        with pytest.raises(ValueError):
            are_compatible(split_of(5, 1, 2), split_of(6, 1, 2))

    def test_crossing_sets_on_worked_pair(self, worked_pair):
        """Each second-tree split crosses the expected first-tree splits"""
        T1, T2 = worked_pair
        e1, e2, e3, e4 = (split_of(6, 5, 6), split_of(6, 1, 2, 3, 4), split_of(6, 1, 2, 3), split_of(6, 1, 2))
        f1, f2, f3, f4 = (
            split_of(6, 1, 2, 3, 4, 5),
            split_of(6, 2, 3, 4),
            split_of(6, 2, 3, 4, 5),
            split_of(6, 2, 3),
        )
        assert crossing_set([f1], T1.splits) == {e1}
        assert crossing_set([f2], T1.splits) == {e3, e4}
        assert crossing_set([f3], T1.splits) == {e1, e2, e3, e4}
        assert crossing_set([f4], T1.splits) == {e4}
        assert crossing_set([f1, f4], T1.splits) == {e1, e4}
        assert compatibility_set([f1, f4], T1.splits) == {e2, e3}

    def test_crossing_set_matches_pairwise_scan(self, rng):
        """Crossing sets agree with a direct pairwise incompatibility scan"""
        for _ in range(50):
            T1, T2 = random_pair(8, rng)
            A = [s for s in T1.splits if rng.random() < 0.5]
            expected = {b for b in T2.splits if any(not are_compatible(a, b) for a in A)}
            assert crossing_set(A, T2.splits) == expected

    def test_crossing_set_is_monotone(self, rng):
        """Shrinking A shrinks its crossing set and grows its compatibility set"""
        for _ in range(50):
            T1, T2 = random_pair(8, rng)
            A = [s for s in T1.splits if rng.random() < 0.7]
            D = [s for s in A if rng.random() < 0.5]
            assert crossing_set(D, T2.splits) <= crossing_set(A, T2.splits)
            assert compatibility_set(A, T2.splits) <= compatibility_set(D, T2.splits)

    def test_crossing_and_compatibility_partition_the_target(self, rng):
        for _ in range(50):
            T1, T2 = random_pair(8, rng)
            A = [s for s in T1.splits if rng.random() < 0.5]
            crossing = crossing_set(A, T2.splits)
            compatible = compatibility_set(A, T2.splits)
            assert not crossing & compatible
            assert crossing | compatible == set(T2.splits)

    def test_universally_compatible(self):
        n = 6
        A = [split_of(n, 1, 2), split_of(n, 3, 4)]
        B = [split_of(n, 1, 2, 3), split_of(n, 5, 6)]
        assert universally_compatible(A, B) == {split_of(n, 1, 2)}
        assert universally_compatible(B, A) == {split_of(n, 5, 6)}


class TestWeightedSplitSet:
    """Immutable split-to-length mappings"""

    def test_norm(self):
        splits = WeightedSplitSet({split_of(5, 1, 2): 3.0, split_of(5, 1, 2, 3): 4.0})
        assert splits.norm() == 5.0
        assert splits.norm([split_of(5, 1, 2)]) == 3.0
        assert norm(dict(splits)) == 5.0

    def test_rejects_negative_or_infinite_lengths(self):
        with pytest.raises(ValueError):
            WeightedSplitSet({split_of(5, 1, 2): -1.0})
        with pytest.raises(ValueError):
            WeightedSplitSet({split_of(5, 1, 2): math.inf})

    def test_rejects_non_split_keys(self):
        with pytest.raises(TypeError):
            WeightedSplitSet({(1, 2): 1.0})

    def test_equality_and_hash_include_lengths(self):
        first = WeightedSplitSet({split_of(5, 1, 2): 1.0})
        same = WeightedSplitSet({split_of(5, 1, 2): 1.0})
        longer = WeightedSplitSet({split_of(5, 1, 2): 2.0})
        assert first == same and hash(first) == hash(same)
        assert first != longer

    def test_scaled(self):
        splits = WeightedSplitSet({split_of(5, 1, 2): 1.5})
        assert splits.scaled(2.0)[split_of(5, 1, 2)] == 3.0


class TestWeightedTree:
    """Validation of split sets that describe one tree"""

    def test_crossing_splits_rejected(self):
        taxa = numbered_taxa(4)
        with pytest.raises(IncompatibleSplitsError):
            WeightedTree(
                splits={split_of(4, 1, 2): 1.0, split_of(4, 2, 3): 1.0},
                leaf_lengths=(1.0,) * 4,
                taxa=taxa,
            )

    def test_too_many_splits_rejected(self):
        taxa = numbered_taxa(4)
        splits = {split_of(4, 1, 2): 1.0, split_of(4, 1, 2, 3): 1.0, split_of(4, 3, 4): 1.0}
        with pytest.raises(IncompatibleSplitsError):
            WeightedTree(splits=splits, leaf_lengths=(1.0,) * 4, taxa=taxa)

    def test_leaf_length_count(self):
        with pytest.raises(ValueError):
            WeightedTree(splits={}, leaf_lengths=(1.0,), taxa=numbered_taxa(4))

    def test_norm_and_scaling(self, worked_pair):
        T1, _ = worked_pair
        expected = math.sqrt(0.83**2 + 0.6**2 + 0.47**2 + 0.88**2)
        assert T1.norm == pytest.approx(expected, abs=1e-12)
        assert T1.scaled(2.0).norm == pytest.approx(2 * expected, abs=1e-12)

    def test_random_trees_are_binary(self, rng):
        for n in (3, 5, 9):
            T1, T2 = random_pair(n, rng)
            assert len(T1.splits) == n - 2
            assert all(0.0 < length <= 1.0 for length in T1.splits.values())


class TestCommonSplitDecomposition:
    """Breaking a pair at a shared split"""

    def test_no_common_splits_in_worked_pair(self, worked_pair):
        assert common_splits(*worked_pair) == frozenset()

    def test_different_taxa(self):
        (T1,), _ = weighted_trees_from_newick(["((a:1,b:1):1,c:1);"])
        (T2,), _ = weighted_trees_from_newick(["((a:1,b:1):1,d:1);"])
        with pytest.raises(TaxaMismatchError):
            common_splits(T1, T2)

    def test_partition_at(self):
        n = 6
        e = split_of(n, 1, 2, 3)
        splits = {e: 1.0, split_of(n, 1, 2): 2.0, split_of(n, 4, 5): 3.0, split_of(n, 1, 2, 3, 4, 5): 4.0}
        above, below = partition_at(splits, e)
        assert below == {split_of(n, 1, 2): 2.0}
        assert above == {split_of(n, 4, 5): 3.0, split_of(n, 1, 2, 3, 4, 5): 4.0}

    def test_decompose_at(self):
        trees, _ = weighted_trees_from_newick(
            ["(((a:1,b:1):2,c:1):3,(d:1,e:1):1);", "((a:1,(b:1,c:1):5):4,(d:1,e:1):1);"]
        )
        T1, T2 = trees
        e = split_of(5, 1, 2, 3)
        (T1A, T2A), (T1B, T2B), length1, length2 = decompose_at(T1, T2, e)
        assert (length1, length2) == (3.0, 4.0)
        assert dict(T1A.splits) == {split_of(5, 4, 5): 1.0}
        assert dict(T1B.splits) == {split_of(5, 1, 2): 2.0}
        assert dict(T2B.splits) == {split_of(5, 2, 3): 5.0}

    def test_decompose_at_requires_common_split(self, worked_pair):
        with pytest.raises(CommonSplitError):
            decompose_at(*worked_pair, split_of(6, 1, 2))
