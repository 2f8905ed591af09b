"""
Incompatibility poset and path poset

Splits of the second tree are grouped into classes that share a crossing
set in the first tree; classes are ordered by inclusion of those sets.
The closed sets of the second tree's splits, ordered by inclusion, form
the path poset whose maximal chains are the maximal path spaces.

Split sets are handled as bitmasks over positional indices: bit i of a
crossing mask is t1_splits[i], bit j of an added mask is t2_splits[j].
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Tuple, Union

from treedist.errors import CommonSplitError
from treedist.splits import Split, WeightedTree, blocks_compatible

logger = logging.getLogger(__name__)

SplitSource = Union[WeightedTree, Iterable[Split]]

CLOSED_SET_ENUMERATION_LIMIT = 20


def _split_tuple(source: SplitSource) -> Tuple[Split, ...]:
    splits = source.splits if isinstance(source, WeightedTree) else source
    return tuple(sorted(splits))


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class IncompatibilityPoset:
    """
    Classes of E_T2 keyed by crossing set, ordered by crossing-set inclusion

    Built by incompatibility_poset(); immutable afterwards and safe to share.
    """

    t1_splits: Tuple[Split, ...]
    t2_splits: Tuple[Split, ...]
    split_crossing: Tuple[int, ...]  # crossing mask per t2 split
    class_members: Tuple[int, ...]  # t2 mask per class
    class_crossing_bits: Tuple[int, ...]  # crossing mask per class
    _t1_index: Dict[Split, int] = field(init=False, repr=False, compare=False)
    _t2_index: Dict[Split, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_t1_index", {s: i for i, s in enumerate(self.t1_splits)})
        object.__setattr__(self, "_t2_index", {s: i for i, s in enumerate(self.t2_splits)})

    @property
    def classes(self) -> List[FrozenSet[Split]]:
        return [self.t2_subset(mask) for mask in self.class_members]

    @property
    def class_crossing(self) -> List[FrozenSet[Split]]:
        return [self.t1_subset(mask) for mask in self.class_crossing_bits]

    @property
    def t1_mask(self) -> int:
        return (1 << len(self.t1_splits)) - 1

    @property
    def t2_mask(self) -> int:
        return (1 << len(self.t2_splits)) - 1

    def __len__(self) -> int:
        return len(self.class_members)

    def leq(self, i: int, j: int) -> bool:
        """Class i <= class j"""
        a, b = self.class_crossing_bits[i], self.class_crossing_bits[j]
        return a & b == a

    def minimal(self) -> List[int]:
        """Indices of classes with no strictly smaller crossing set"""
        crossing = self.class_crossing_bits
        return [
            i
            for i, a in enumerate(crossing)
            if not any(b != a and b & a == b for b in crossing)
        ]

    def hasse_edges(self) -> List[Tuple[int, int]]:
        """Cover relations (i, j) with class i strictly below class j"""
        crossing = self.class_crossing_bits
        below = {
            j: [i for i, a in enumerate(crossing) if a != b and a & b == a]
            for j, b in enumerate(crossing)
        }
        edges = []
        for j, lower in below.items():
            for i in lower:
                if not any(k != i and self.leq(i, k) for k in lower):
                    edges.append((i, j))
        return edges

    def t1_subset(self, mask: int) -> FrozenSet[Split]:
        return frozenset(self.t1_splits[i] for i in iter_bits(mask))

    def t2_subset(self, mask: int) -> FrozenSet[Split]:
        return frozenset(self.t2_splits[i] for i in iter_bits(mask))

    def t1_bits(self, splits: Iterable[Split]) -> int:
        mask = 0
        for split in splits:
            mask |= 1 << self._t1_index[split]
        return mask

    def t2_bits(self, splits: Iterable[Split]) -> int:
        mask = 0
        for split in splits:
            if split not in self._t2_index:
                raise ValueError(f"Split {split} is not a split of the second tree")
            mask |= 1 << self._t2_index[split]
        return mask

    def crossing_of(self, added: int) -> int:
        mask = 0
        for j in iter_bits(added):
            mask |= self.split_crossing[j]
        return mask

    def closed_under(self, crossing: int) -> int:
        """Mask of every t2 split whose crossing set lies inside `crossing`"""
        added = 0
        for j, x in enumerate(self.split_crossing):
            if x & crossing == x:
                added |= 1 << j
        return added

    def node(self, added: int) -> "PathPosetNode":
        crossing = self.crossing_of(added)
        if self.closed_under(crossing) != added:
            raise ValueError("Path poset nodes must be closed sets")
        return PathPosetNode(added_bits=added, crossing_bits=crossing, poset=self)

    @property
    def bottom(self) -> "PathPosetNode":
        added = self.closed_under(0)
        return PathPosetNode(added_bits=added, crossing_bits=self.crossing_of(added), poset=self)

    @property
    def top(self) -> "PathPosetNode":
        added = self.t2_mask
        return PathPosetNode(added_bits=added, crossing_bits=self.crossing_of(added), poset=self)


@dataclass(frozen=True)
class PathPosetNode:
    """A closed set A of E_T2 together with X_T1(A)"""

    added_bits: int
    crossing_bits: int
    poset: IncompatibilityPoset = field(repr=False, compare=False)

    @property
    def added(self) -> FrozenSet[Split]:
        return self.poset.t2_subset(self.added_bits)

    @property
    def crossing(self) -> FrozenSet[Split]:
        return self.poset.t1_subset(self.crossing_bits)

    @property
    def is_top(self) -> bool:
        return self.added_bits == self.poset.t2_mask

    def __len__(self) -> int:
        return self.added_bits.bit_count()


class Cover(NamedTuple):
    node: PathPosetNode
    dropped: FrozenSet[Split]
    added: FrozenSet[Split]


class ChainStep(NamedTuple):
    dropped: FrozenSet[Split]
    added: FrozenSet[Split]


def incompatibility_poset(T1: SplitSource, T2: SplitSource) -> IncompatibilityPoset:
    """
    Build P(T1, T2)

    Args:
        T1: First tree, or its split set
        T2: Second tree, or its split set

    Returns:
        The poset of crossing-set classes of T2's splits

    Raises:
        CommonSplitError: if the two split sets intersect
    """
    t1, t2 = _split_tuple(T1), _split_tuple(T2)
    shared = set(t1) & set(t2)
    if shared:
        names = ", ".join(str(s) for s in sorted(shared))
        raise CommonSplitError(f"Trees share splits {names}; decompose them first")

    t1_blocks = [e.block for e in t1]
    split_crossing = []
    for f in t2:
        mask = 0
        for i, block in enumerate(t1_blocks):
            if not blocks_compatible(f.block, block):
                mask |= 1 << i
        split_crossing.append(mask)

    # Group by crossing mask, first-seen order for determinism
    groups: Dict[int, int] = {}
    for j, mask in enumerate(split_crossing):
        groups[mask] = groups.get(mask, 0) | (1 << j)

    poset = IncompatibilityPoset(
        t1_splits=t1,
        t2_splits=t2,
        split_crossing=tuple(split_crossing),
        class_members=tuple(groups.values()),
        class_crossing_bits=tuple(groups.keys()),
    )
    logger.debug(f"Incompatibility poset: {len(t2)} splits in {len(poset)} classes")
    return poset


def closure(A: Iterable[Split], ip: IncompatibilityPoset) -> FrozenSet[Split]:
    """Ā = {f in E_T2 : X(f) ⊆ X(A)}"""
    crossing = ip.crossing_of(ip.t2_bits(A))
    return ip.t2_subset(ip.closed_under(crossing))


def minimal_classes(T1_splits: SplitSource, T2_splits: SplitSource) -> List[FrozenSet[Split]]:
    """Minimal classes of the poset built on residual split sets"""
    ip = incompatibility_poset(T1_splits, T2_splits)
    return [ip.t2_subset(ip.class_members[i]) for i in ip.minimal()]


def _residual_groups(ip: IncompatibilityPoset, added: int, crossing: int) -> Dict[int, int]:
    """Residual crossing mask -> t2 mask, over splits outside `added`"""
    groups: Dict[int, int] = {}
    for j, x in enumerate(ip.split_crossing):
        if not added >> j & 1:
            residual = x & ~crossing
            groups[residual] = groups.get(residual, 0) | (1 << j)
    return groups


def residual_classes(node: PathPosetNode) -> List[Tuple[FrozenSet[Split], FrozenSet[Split]]]:
    """Classes of the residual poset above node, each with its residual crossing set"""
    ip = node.poset
    groups = _residual_groups(ip, node.added_bits, node.crossing_bits)
    return [(ip.t2_subset(members), ip.t1_subset(residual)) for residual, members in groups.items()]


def cover_masks(ip: IncompatibilityPoset, added: int, crossing: int) -> List[Tuple[int, int]]:
    """(successor added mask, successor crossing mask) for every cover above a closed set"""
    groups = _residual_groups(ip, added, crossing)
    residuals = list(groups)
    successors = []
    for r in residuals:
        if any(s != r and s & r == s for s in residuals):
            continue
        succ_crossing = crossing | r
        successors.append((ip.closed_under(succ_crossing), succ_crossing))
    return successors


def covers_above(node: PathPosetNode) -> List[Cover]:
    """
    Successors of a closed set in the path poset

    One cover per minimal class g of the residual poset: closure(A ∪ g),
    with the T1 splits it drops and the T2 splits it adds.
    """
    ip = node.poset
    covers = []
    for added, crossing in cover_masks(ip, node.added_bits, node.crossing_bits):
        succ = PathPosetNode(added_bits=added, crossing_bits=crossing, poset=ip)
        covers.append(
            Cover(
                node=succ,
                dropped=ip.t1_subset(crossing & ~node.crossing_bits),
                added=ip.t2_subset(added & ~node.added_bits),
            )
        )
    return covers


def iter_chain_masks(ip: IncompatibilityPoset) -> Iterator[List[Tuple[int, int]]]:
    """Every maximal chain as a list of (dropped mask, added mask) steps"""
    bottom = ip.bottom
    top = ip.t2_mask
    steps: List[Tuple[int, int]] = []

    def walk(added: int, crossing: int) -> Iterator[List[Tuple[int, int]]]:
        if added == top:
            yield list(steps)
            return
        for succ_added, succ_crossing in cover_masks(ip, added, crossing):
            steps.append((succ_crossing & ~crossing, succ_added & ~added))
            yield from walk(succ_added, succ_crossing)
            steps.pop()

    if bottom.added_bits:
        # Universally compatible splits sit at the bottom; they form the first step
        steps.append((0, bottom.added_bits))
    yield from walk(bottom.added_bits, bottom.crossing_bits)


def iter_chains(ip: IncompatibilityPoset) -> Iterator[List[ChainStep]]:
    for chain in iter_chain_masks(ip):
        yield [ChainStep(ip.t1_subset(d), ip.t2_subset(a)) for d, a in chain]


def maximal_chains(T1: SplitSource, T2: SplitSource) -> Iterator[List[ChainStep]]:
    """
    Lazily enumerate the maximal chains of K(T1, T2)

    The count grows exponentially with the number of taxa in the worst
    case; callers that need a bound should stop iterating themselves.
    """
    return iter_chains(incompatibility_poset(T1, T2))


def closed_sets(ip: IncompatibilityPoset) -> Iterator[PathPosetNode]:
    """Every element of K by brute force over unions of classes"""
    count = len(ip)
    if count > CLOSED_SET_ENUMERATION_LIMIT:
        raise ValueError(
            f"{count} classes is too many for brute-force enumeration "
            f"(limit {CLOSED_SET_ENUMERATION_LIMIT})"
        )
    for subset in range(1 << count):
        added = crossing = 0
        for i in iter_bits(subset):
            added |= ip.class_members[i]
            crossing |= ip.class_crossing_bits[i]
        if ip.closed_under(crossing) == added:
            yield PathPosetNode(added_bits=added, crossing_bits=crossing, poset=ip)


def count_closed_sets(ip: IncompatibilityPoset) -> int:
    return sum(1 for _ in closed_sets(ip))


def to_dot(ip: IncompatibilityPoset, name: str = "incompatibility_poset") -> str:
    """Hasse diagram of the poset as Graphviz DOT text"""
    lines = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=box];"]
    for i, (members, crossing) in enumerate(zip(ip.classes, ip.class_crossing)):
        splits = " ".join(str(s) for s in sorted(members))
        crosses = " ".join(str(s) for s in sorted(crossing)) or "-"
        lines.append(f'  c{i} [label="{splits}\\nX: {crosses}"];')
    for i, j in ip.hasse_edges():
        lines.append(f"  c{i} -> c{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
