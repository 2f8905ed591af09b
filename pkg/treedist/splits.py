"""
Split algebra for rooted trees

A split is stored as the bitset of the block that does not contain the
root (taxon 0). With that convention two splits are compatible exactly
when their blocks are disjoint or nested.
"""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Tuple

from treedist.errors import CommonSplitError, IncompatibleSplitsError, TaxaMismatchError
from treedist.tree_io import RawTree, TaxaMap

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, order=True)
class Split:
    """Non-trivial bipartition of {0, ..., n} keyed by its root-free block"""

    block: int
    n: int

    def __post_init__(self):
        if self.block & 1:
            raise ValueError("A split block must not contain the root (taxon 0)")
        if self.block >> (self.n + 1):
            raise ValueError(f"Split block uses taxa beyond n={self.n}")
        size = self.block.bit_count()
        if size < 2 or size > self.n - 1:
            raise ValueError(
                f"Split block of size {size} is trivial for n={self.n}; "
                "both sides need at least two elements"
            )

    @classmethod
    def from_leaves(cls, leaves: Iterable[int], n: int) -> "Split":
        block = 0
        for leaf in leaves:
            block |= 1 << leaf
        return cls(block, n)

    def __reduce__(self):
        return (Split, (self.block, self.n))

    @property
    def size(self) -> int:
        return self.block.bit_count()

    @property
    def leaves(self) -> Tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if self.block >> i & 1)

    @property
    def complement(self) -> Tuple[int, ...]:
        return tuple(i for i in range(0, self.n + 1) if not self.block >> i & 1)

    def contains(self, other: "Split") -> bool:
        """True when other's block is a proper subset of this block"""
        return other.block != self.block and other.block & self.block == other.block

    def __str__(self) -> str:
        return split_to_string(self)


def split_to_string(split: Split) -> str:
    """Render as "23|0145"; indices are comma-separated once n >= 10"""
    sep = "," if split.n >= 10 else ""
    return f"{sep.join(map(str, split.leaves))}|{sep.join(map(str, split.complement))}"


def blocks_compatible(x: int, y: int) -> bool:
    return not (x & y) or x & y == x or x & y == y


def are_compatible(e: Split, f: Split) -> bool:
    """
    Four-intersection test on root-free blocks

    X∩Y' = ∅ is X ⊆ Y, X'∩Y = ∅ is Y ⊆ X, and X'∩Y' always holds the
    root, so three bitset checks cover the rule.
    """
    if e.n != f.n:
        raise ValueError(f"Splits over different taxa counts ({e.n} and {f.n})")
    return blocks_compatible(e.block, f.block)


class WeightedSplitSet(Mapping):
    """Immutable mapping Split -> length with the norm ‖A‖"""

    __slots__ = ("_lengths", "_key")

    def __init__(self, lengths: Optional[Mapping] = None):
        data = dict(lengths or {})
        for split, length in data.items():
            if not isinstance(split, Split):
                raise TypeError(f"Expected Split keys, got {type(split).__name__}")
            if length < 0 or not math.isfinite(length):
                raise ValueError(f"Split length must be finite and >= 0, got {length}")
        self._lengths = data
        self._key = None

    def __reduce__(self):
        return (WeightedSplitSet, (self._lengths,))

    def __getitem__(self, split: Split) -> float:
        return self._lengths[split]

    def __iter__(self) -> Iterator[Split]:
        return iter(self._lengths)

    def __len__(self) -> int:
        return len(self._lengths)

    def __repr__(self) -> str:
        body = ", ".join(f"{split}: {length!r}" for split, length in sorted(self._lengths.items()))
        return f"WeightedSplitSet({{{body}}})"

    def __eq__(self, other) -> bool:
        if isinstance(other, WeightedSplitSet):
            return self._lengths == other._lengths
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def key(self) -> FrozenSet[Tuple[Split, float]]:
        """Canonical hashable form, lengths included"""
        if self._key is None:
            self._key = frozenset(self._lengths.items())
        return self._key

    def norm_sq(self, subset: Optional[Iterable[Split]] = None) -> float:
        splits = self._lengths if subset is None else subset
        return sum(self._lengths[split] ** 2 for split in splits)

    def norm(self, subset: Optional[Iterable[Split]] = None) -> float:
        return math.sqrt(self.norm_sq(subset))

    def scaled(self, t: float) -> "WeightedSplitSet":
        if t < 0:
            raise ValueError(f"Scale factor must be >= 0, got {t}")
        return WeightedSplitSet({split: length * t for split, length in self._lengths.items()})


def find_crossing_pair(splits: Iterable[Split]) -> Optional[Tuple[Split, Split]]:
    ordered = list(splits)
    for i, e in enumerate(ordered):
        for f in ordered[i + 1 :]:
            if not blocks_compatible(e.block, f.block):
                return e, f
    return None


def norm(splits: Mapping, subset: Optional[Iterable[Split]] = None) -> float:
    """‖A‖ = sqrt(sum of squared lengths) over subset (default: every split)"""
    keys = splits if subset is None else subset
    return math.sqrt(sum(splits[split] ** 2 for split in keys))


@dataclass(frozen=True)
class WeightedTree:
    """A rooted tree as its weighted splits plus leaf-edge lengths"""

    splits: WeightedSplitSet
    leaf_lengths: Tuple[float, ...]
    taxa: TaxaMap
    _norm: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.splits, WeightedSplitSet):
            object.__setattr__(self, "splits", WeightedSplitSet(self.splits))
        object.__setattr__(self, "leaf_lengths", tuple(float(x) for x in self.leaf_lengths))
        n = self.taxa.n
        if len(self.leaf_lengths) != n:
            raise ValueError(f"Expected {n} leaf lengths, got {len(self.leaf_lengths)}")
        if any(x < 0 or not math.isfinite(x) for x in self.leaf_lengths):
            raise ValueError("Leaf lengths must be finite and >= 0")
        if any(split.n != n for split in self.splits):
            raise ValueError(f"Every split must be over n={n} taxa")
        if len(self.splits) > max(n - 2, 0):
            raise IncompatibleSplitsError(
                f"{len(self.splits)} splits exceed the n-2={n - 2} bound for a rooted tree"
            )
        crossing = find_crossing_pair(self.splits)
        if crossing is not None:
            e, f = crossing
            raise IncompatibleSplitsError(f"Splits {e} and {f} cannot be in the same tree")
        object.__setattr__(self, "_norm", self.splits.norm())

    @property
    def n(self) -> int:
        return self.taxa.n

    @property
    def norm(self) -> float:
        return self._norm

    def with_splits(self, splits: Mapping) -> "WeightedTree":
        """Same taxa and leaf lengths, different interior edges"""
        return WeightedTree(splits=WeightedSplitSet(splits), leaf_lengths=self.leaf_lengths, taxa=self.taxa)

    def scaled(self, t: float) -> "WeightedTree":
        if t < 0:
            raise ValueError(f"Scale factor must be >= 0, got {t}")
        return WeightedTree(
            splits=self.splits.scaled(t),
            leaf_lengths=tuple(x * t for x in self.leaf_lengths),
            taxa=self.taxa,
        )

    def same_weighted_topology(self, other: "WeightedTree") -> bool:
        return self.taxa == other.taxa and self.splits == other.splits


def splits_of_tree(raw: RawTree, taxa: TaxaMap) -> WeightedTree:
    """
    Turn a parsed tree into its weighted split set

    One split per internal edge, with the leaves below the edge as the
    block. Pendant edges go to leaf_lengths, zero-length internal edges are
    contracted, and a chain of unary nodes carrying one split sums its
    lengths.
    """
    n = taxa.n
    full = ((1 << (n + 1)) - 1) & ~1
    interior: Dict[int, float] = {}
    leaves = [0.0] * n

    # Iterative post-order: (node, visited-children flag)
    blocks: Dict[int, int] = {}
    stack = [(raw.root, False)]
    while stack:
        node, expanded = stack.pop()
        if node.is_leaf:
            if node.name not in taxa.index:
                raise TaxaMismatchError(extra=[node.name])
            blocks[id(node)] = 1 << taxa.index[node.name]
        elif not expanded:
            stack.append((node, True))
            stack.extend((child, False) for child in node.children)
            continue
        else:
            block = 0
            for child in node.children:
                block |= blocks[id(child)]
            blocks[id(node)] = block

        if node is raw.root:
            continue
        block = blocks[id(node)]
        length = node.length or 0.0
        size = block.bit_count()
        if size == 1:
            leaves[block.bit_length() - 2] += length
        elif block == full:
            logger.debug(f"Dropping edge above the root clade (length {length})")
        elif length > 0:
            interior[block] = interior.get(block, 0.0) + length

    if blocks[id(raw.root)] != full:
        missing = set(taxa.names) - set(raw.leaf_names)
        raise TaxaMismatchError(missing=missing)

    splits = WeightedSplitSet({Split(block, n): length for block, length in interior.items()})
    return WeightedTree(splits=splits, leaf_lengths=tuple(leaves), taxa=taxa)


def crossing_set(A: Iterable[Split], B: Iterable[Split]) -> FrozenSet[Split]:
    """X_B(A): the splits of B incompatible with at least one split of A"""
    blocks = [a.block for a in A]
    return frozenset(
        b for b in B if any(not blocks_compatible(b.block, a) for a in blocks)
    )


def compatibility_set(A: Iterable[Split], B: Iterable[Split]) -> FrozenSet[Split]:
    """C_B(A) = B minus X_B(A)"""
    B = frozenset(B)
    return B - crossing_set(A, B)


def universally_compatible(A: Iterable[Split], B: Iterable[Split]) -> FrozenSet[Split]:
    """Splits of A whose crossing set in B is empty"""
    B = list(B)
    return frozenset(a for a in A if not crossing_set([a], B))


def _check_same_taxa(T1: WeightedTree, T2: WeightedTree):
    if T1.taxa != T2.taxa:
        first, second = set(T1.taxa.names), set(T2.taxa.names)
        raise TaxaMismatchError(missing=first - second, extra=second - first)


def common_splits(T1: WeightedTree, T2: WeightedTree) -> FrozenSet[Split]:
    """E_T1 ∩ E_T2 by partition equality, lengths ignored"""
    _check_same_taxa(T1, T2)
    return frozenset(T1.splits.keys() & T2.splits.keys())


def partition_at(splits: Mapping, e: Split) -> Tuple[Dict[Split, float], Dict[Split, float]]:
    """
    Split a weighted split set around e

    The first part keeps everything not strictly below e (the tree above
    e once e's clade is collapsed), the second part the splits strictly
    inside e's block. e itself is in neither.
    """
    above, below = {}, {}
    for split, length in splits.items():
        if split == e:
            continue
        if e.contains(split):
            below[split] = length
        else:
            above[split] = length
    return above, below


def decompose_at(
    T1: WeightedTree, T2: WeightedTree, e: Split
) -> Tuple[Tuple[WeightedTree, WeightedTree], Tuple[WeightedTree, WeightedTree], float, float]:
    """
    Break a tree pair at a common split into two independent pairs

    Returns ((T1A, T2A), (T1B, T2B), |e|_T1, |e|_T2). T_i^A contracts e and
    every edge below it; T_i^B contracts e and every edge not below it.
    """
    _check_same_taxa(T1, T2)
    if e not in T1.splits or e not in T2.splits:
        raise CommonSplitError(f"Split {e} is not common to both trees")
    above1, below1 = partition_at(T1.splits, e)
    above2, below2 = partition_at(T2.splits, e)
    return (
        (T1.with_splits(above1), T2.with_splits(above2)),
        (T1.with_splits(below1), T2.with_splits(below2)),
        T1.splits[e],
        T2.splits[e],
    )
