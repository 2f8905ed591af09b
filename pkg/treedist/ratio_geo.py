"""
Ratio sequences and the path-space geodesic

A path space through k+1 orthants is described by k transitions, each
dropping a set of first-tree splits and adding a set of second-tree
splits. The shortest path through it pools adjacent transitions until the
ratios ‖dropped‖/‖added‖ are ascending, the same stack discipline as
pool-adjacent-violators isotonic regression.

Norms are kept squared and ratios compared by cross-multiplication, so
0/b and a/0 need no special casing.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cmp_to_key
from typing import FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union, overload

from treedist.errors import NotAscendingError, OverlappingSupportError
from treedist.splits import Split

logger = logging.getLogger(__name__)

BRUTE_FORCE_PARTITION_LIMIT = 16

_EMPTY: FrozenSet[Split] = frozenset()


@dataclass(frozen=True, slots=True)
class Ratio:
    """One transition: ‖dropped‖² over ‖added‖², with the split sets"""

    drop_norm_sq: float
    add_norm_sq: float
    dropped: FrozenSet[Split] = _EMPTY
    added: FrozenSet[Split] = _EMPTY

    def __post_init__(self):
        if self.drop_norm_sq < 0 or self.add_norm_sq < 0:
            raise ValueError("Squared norms must be >= 0")

    @classmethod
    def from_splits(
        cls,
        dropped: Iterable[Split],
        added: Iterable[Split],
        drop_lengths: Mapping[Split, float],
        add_lengths: Mapping[Split, float],
    ) -> "Ratio":
        dropped, added = frozenset(dropped), frozenset(added)
        return cls(
            drop_norm_sq=math.fsum(drop_lengths[s] ** 2 for s in dropped),
            add_norm_sq=math.fsum(add_lengths[s] ** 2 for s in added),
            dropped=dropped,
            added=added,
        )

    @classmethod
    def from_norms(cls, a: float, b: float) -> "Ratio":
        """Ratio a/b given plain (not squared) norms"""
        return cls(drop_norm_sq=a * a, add_norm_sq=b * b)

    @property
    def drop_norm(self) -> float:
        return math.sqrt(self.drop_norm_sq)

    @property
    def add_norm(self) -> float:
        return math.sqrt(self.add_norm_sq)

    @property
    def value(self) -> float:
        """a/b as a float; inf for a/0, nan for 0/0"""
        if self.add_norm_sq == 0:
            return math.nan if self.drop_norm_sq == 0 else math.inf
        return self.drop_norm / self.add_norm

    @property
    def is_degenerate(self) -> bool:
        return self.drop_norm_sq == 0 and self.add_norm_sq == 0

    def __str__(self) -> str:
        return f"{self.drop_norm:.6g}/{self.add_norm:.6g}"

    def to_dict(self) -> dict:
        return {
            "dropped": sorted(str(s) for s in self.dropped),
            "added": sorted(str(s) for s in self.added),
            "drop_norm": self.drop_norm,
            "add_norm": self.add_norm,
            "ratio": self.value,
        }


def compare_ratios(r1: Ratio, r2: Ratio) -> int:
    """Sign of a1/b1 - a2/b2 via a1² b2² versus a2² b1²"""
    left = r1.drop_norm_sq * r2.add_norm_sq
    right = r2.drop_norm_sq * r1.add_norm_sq
    return (left > right) - (left < right)


@dataclass(frozen=True)
class RatioSequence:
    """Ordered transitions of a path space, or the carrier of its geodesic"""

    ratios: Tuple[Ratio, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(self.ratios))

    def __len__(self) -> int:
        return len(self.ratios)

    def __iter__(self) -> Iterator[Ratio]:
        return iter(self.ratios)

    @overload
    def __getitem__(self, index: int) -> Ratio: ...

    @overload
    def __getitem__(self, index: slice) -> "RatioSequence": ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return RatioSequence(self.ratios[index])
        return self.ratios[index]

    def __add__(self, other: "RatioSequence") -> "RatioSequence":
        return RatioSequence(self.ratios + tuple(other))

    @property
    def dropped(self) -> FrozenSet[Split]:
        return frozenset().union(*(r.dropped for r in self.ratios))

    @property
    def added(self) -> FrozenSet[Split]:
        return frozenset().union(*(r.added for r in self.ratios))

    def block_key(self) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]:
        """Sortable description of the block structure"""
        return tuple(
            (tuple(sorted(s.block for s in r.dropped)), tuple(sorted(s.block for s in r.added)))
            for r in self.ratios
        )

    def to_list(self) -> List[dict]:
        return [ratio.to_dict() for ratio in self.ratios]


SequenceLike = Union[RatioSequence, Sequence[Ratio]]


@dataclass
class PoolStats:
    """Operation counters filled in by path_space_geo"""

    length: int = 0
    comparisons: int = 0
    combines: int = 0


def combine(r1: Ratio, r2: Ratio) -> Ratio:
    """
    Merge two transitions into one

    Raises:
        OverlappingSupportError: if the two ratios share a dropped or an
            added split
    """
    if r1.dropped & r2.dropped or r1.added & r2.added:
        raise OverlappingSupportError("Cannot combine ratios that share splits")
    return Ratio(
        drop_norm_sq=r1.drop_norm_sq + r2.drop_norm_sq,
        add_norm_sq=r1.add_norm_sq + r2.add_norm_sq,
        dropped=r1.dropped | r2.dropped,
        added=r1.added | r2.added,
    )


def pool_squares(
    a_sq: Sequence[float], b_sq: Sequence[float], stats: Optional[PoolStats] = None
) -> Tuple[List[int], List[float], List[float]]:
    """
    Stack pass over squared norms

    Returns block start indices with the pooled squared norms of each
    block. A block is pooled into its predecessor whenever the
    predecessor's ratio is >= its own, so the output is strictly
    ascending.
    """
    starts: List[int] = []
    stack_a: List[float] = []
    stack_b: List[float] = []
    comparisons = combines = 0
    for i, (a, b) in enumerate(zip(a_sq, b_sq)):
        start = i
        while stack_a:
            comparisons += 1
            pa = stack_a[-1]
            pb = stack_b[-1]
            if pa * b < a * pb:
                break
            a += pa
            b += pb
            start = starts.pop()
            stack_a.pop()
            stack_b.pop()
            combines += 1
        starts.append(start)
        stack_a.append(a)
        stack_b.append(b)
    if stats is not None:
        stats.length = len(a_sq)
        stats.comparisons += comparisons
        stats.combines += combines
    return starts, stack_a, stack_b


def path_space_geo(seq: SequenceLike, stats: Optional[PoolStats] = None) -> RatioSequence:
    """
    Carrier of the shortest path through the path space of seq

    Args:
        seq: Transitions in path order; split sets must be disjoint
            across entries
        stats: Optional counters, at most 2(k-1) comparisons and k-1
            combines for k non-degenerate ratios

    Returns:
        The strictly ascending sequence of pooled transitions
    """
    ratios = [r for r in seq if not r.is_degenerate]
    starts, pooled_a, pooled_b = pool_squares(
        [r.drop_norm_sq for r in ratios], [r.add_norm_sq for r in ratios], stats
    )
    if len(starts) == len(ratios):
        return RatioSequence(ratios)

    blocks = []
    ends = starts[1:] + [len(ratios)]
    for start, end, a, b in zip(starts, ends, pooled_a, pooled_b):
        if end - start == 1:
            blocks.append(ratios[start])
            continue
        members = ratios[start:end]
        blocks.append(
            Ratio(
                drop_norm_sq=a,
                add_norm_sq=b,
                dropped=frozenset().union(*(r.dropped for r in members)),
                added=frozenset().union(*(r.added for r in members)),
            )
        )
    return RatioSequence(blocks)


def is_ascending(seq: SequenceLike) -> bool:
    """Non-strict a1/b1 <= a2/b2 <= ... by cross-multiplication"""
    ratios = list(seq)
    return all(compare_ratios(r1, r2) <= 0 for r1, r2 in zip(ratios, ratios[1:]))


def distance_of(asc: SequenceLike) -> float:
    """
    Length of the straight line through an ascending carrier

    Raises:
        NotAscendingError: if asc is not ascending
    """
    if not is_ascending(asc):
        raise NotAscendingError("distance_of needs an ascending ratio sequence")
    return math.sqrt(math.fsum((r.drop_norm + r.add_norm) ** 2 for r in asc))


def merge_ascending(seqs: Iterable[SequenceLike]) -> RatioSequence:
    """
    Sorted merge of independent ascending carriers

    Ratios that compare exactly equal are combined, which leaves the
    distance unchanged and keeps the result strictly ascending.

    Raises:
        OverlappingSupportError: if two inputs share a split
        NotAscendingError: if an input is not ascending
    """
    pooled: List[Ratio] = []
    seen_dropped: set = set()
    seen_added: set = set()
    for seq in seqs:
        if not is_ascending(seq):
            raise NotAscendingError("merge_ascending inputs must be ascending")
        for ratio in seq:
            if seen_dropped & ratio.dropped or seen_added & ratio.added:
                raise OverlappingSupportError("Merged carriers must have disjoint supports")
            seen_dropped |= ratio.dropped
            seen_added |= ratio.added
            if not ratio.is_degenerate:
                pooled.append(ratio)

    pooled.sort(key=cmp_to_key(compare_ratios))
    merged: List[Ratio] = []
    for ratio in pooled:
        if merged and compare_ratios(merged[-1], ratio) == 0:
            merged[-1] = combine(merged[-1], ratio)
        else:
            merged.append(ratio)
    return RatioSequence(merged)


def brute_force_partition_distance(seq: SequenceLike) -> float:
    """
    Minimum over consecutive partitions whose pooled ratios never descend

    Exhaustive over 2^(k-1) partitions; a testing oracle for
    path_space_geo.
    """
    ratios = [r for r in seq if not r.is_degenerate]
    k = len(ratios)
    if k > BRUTE_FORCE_PARTITION_LIMIT:
        raise ValueError(
            f"Sequence of {k} ratios exceeds the brute-force limit of {BRUTE_FORCE_PARTITION_LIMIT}"
        )
    if k == 0:
        return 0.0

    best = math.inf
    for cuts in itertools.product((False, True), repeat=k - 1):
        blocks: List[Tuple[float, float]] = []
        a, b = ratios[0].drop_norm_sq, ratios[0].add_norm_sq
        for cut, ratio in zip(cuts, ratios[1:]):
            if cut:
                blocks.append((a, b))
                a, b = ratio.drop_norm_sq, ratio.add_norm_sq
            else:
                a += ratio.drop_norm_sq
                b += ratio.add_norm_sq
        blocks.append((a, b))
        if any(a1 * b2 > a2 * b1 for (a1, b1), (a2, b2) in zip(blocks, blocks[1:])):
            continue
        length = math.sqrt(math.fsum((math.sqrt(a) + math.sqrt(b)) ** 2 for a, b in blocks))
        best = min(best, length)
    return best


def transition_times(asc: SequenceLike) -> List[float]:
    """
    Fraction of the geodesic at which each block's splits swap over

    For block i with norms a and b the crossing happens at a/(a+b); the
    values are non-decreasing along an ascending carrier.
    """
    times = []
    for ratio in asc:
        a, b = ratio.drop_norm, ratio.add_norm
        times.append(a / (a + b) if a + b > 0 else 0.0)
    return times
