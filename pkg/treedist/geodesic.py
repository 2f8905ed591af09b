"""
Geodesic distance between rooted phylogenetic trees

Every computation runs the same pipeline:

1. splits present in both trees become common splits, contributing the
   squared length difference;
2. a split compatible with every split of the other tree is treated as
   a common split of length zero on the other side, carried as a 0/b or
   a/0 ratio;
3. the remaining splits fall apart into independent subproblems, one per
   region between common splits;
4. each subproblem has no common splits and goes to the selected search
   (dynamic, divide or brute), which returns an ascending carrier;
5. the carriers are merged and, optionally, the leaf-length term added.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from instrumentation import SearchStats, traced_operation
from treedist.errors import ChainCapExceeded, CommonSplitError, TaxaMismatchError
from treedist.geo_models import DEFAULT_CHAIN_CAP, Algorithm, GeoOptions
from treedist.posets import cover_masks, incompatibility_poset, iter_bits, iter_chain_masks
from treedist.ratio_geo import Ratio, RatioSequence, merge_ascending, path_space_geo
from treedist.splits import Split, WeightedSplitSet, WeightedTree, blocks_compatible
from treedist.tree_io import TaxaMap

logger = logging.getLogger(__name__)

SplitMap = Dict[Split, float]

# (drop norm², add norm², dropped mask, added mask)
_Block = Tuple[float, float, int, int]

CAP_WARNING_FRACTION = 0.8


@dataclass(frozen=True)
class CommonSplit:
    """A split shared by both trees and its two lengths"""

    split: Split
    length1: float
    length2: float

    @property
    def contribution(self) -> float:
        return (self.length1 - self.length2) ** 2


@dataclass(frozen=True)
class Geodesic:
    """
    Result of one distance computation

    distance² is the sum of the carrier's (ã+b̃)² terms, the common-split
    contributions and the leaf contribution. `atoms` holds the carrier of
    each no-common-split subproblem; universally compatible splits appear
    only in the merged carrier.
    """

    distance: float
    carrier: RatioSequence
    common: Tuple[CommonSplit, ...] = ()
    atoms: Tuple[RatioSequence, ...] = ()
    leaf_contribution: float = 0.0
    algorithm: str = Algorithm.DIVIDE.value
    stats: SearchStats = field(default_factory=SearchStats, compare=False)

    @property
    def carrier_contribution(self) -> float:
        return _carrier_sq(self.carrier)

    @property
    def common_contribution(self) -> float:
        return math.fsum(c.contribution for c in self.common)

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "algorithm": self.algorithm,
            "carrier": self.carrier.to_list(),
            "common_splits": [
                {
                    "split": str(c.split),
                    "length1": c.length1,
                    "length2": c.length2,
                    "contribution": c.contribution,
                }
                for c in self.common
            ],
            "leaf_contribution": self.leaf_contribution,
            "stats": self.stats.to_dict(),
        }


def _carrier_sq(carrier: Sequence[Ratio]) -> float:
    return math.fsum((r.drop_norm + r.add_norm) ** 2 for r in carrier)


def _blocks_sq(blocks: Sequence[_Block]) -> float:
    return math.fsum((math.sqrt(a) + math.sqrt(b)) ** 2 for a, b, _, _ in blocks)


def _push(blocks: Tuple[_Block, ...], a: float, b: float, d: int, m: int) -> Tuple[_Block, ...]:
    """Append one transition to an ascending carrier and pool backwards"""
    pooled = list(blocks)
    while pooled:
        pa, pb, pd, pm = pooled[-1]
        if pa * b < a * pb:
            break
        pooled.pop()
        a, b, d, m = a + pa, b + pb, d | pd, m | pm
    pooled.append((a, b, d, m))
    return tuple(pooled)


def _mask_sq(mask: int, squares: Sequence[float]) -> float:
    return math.fsum(squares[i] for i in iter_bits(mask))


@dataclass
class _Reduction:
    common: List[CommonSplit]
    free: List[Ratio]
    atoms: List[Tuple[SplitMap, SplitMap]]


def _reduce(E1: SplitMap, E2: SplitMap) -> _Reduction:
    """Separate common and universally compatible splits, then group the rest"""
    E1 = {s: length for s, length in E1.items() if length > 0}
    E2 = {s: length for s, length in E2.items() if length > 0}
    shared = E1.keys() & E2.keys()
    common = [CommonSplit(s, E1[s], E2[s]) for s in sorted(shared)]
    rest1 = [s for s in sorted(E1) if s not in shared]
    rest2 = [s for s in sorted(E2) if s not in shared]

    free1 = [e for e in rest1 if all(blocks_compatible(e.block, f.block) for f in rest2)]
    free2 = [f for f in rest2 if all(blocks_compatible(f.block, e.block) for e in rest1)]
    free = [Ratio(0.0, E2[f] ** 2, added=frozenset((f,))) for f in free2]
    free += [Ratio(E1[e] ** 2, 0.0, dropped=frozenset((e,))) for e in free1]

    # Every cut is compatible with every split of both trees, so each
    # remaining split belongs under the smallest cut that strictly contains it
    cuts = sorted(shared.union(free1, free2), key=lambda s: s.size)

    def owner(split: Split) -> int:
        for cut in cuts:
            if cut.contains(split):
                return cut.block
        return 0

    groups: Dict[int, Tuple[SplitMap, SplitMap]] = {}
    skip1, skip2 = set(free1), set(free2)
    for s in rest1:
        if s not in skip1:
            groups.setdefault(owner(s), ({}, {}))[0][s] = E1[s]
    for s in rest2:
        if s not in skip2:
            groups.setdefault(owner(s), ({}, {}))[1][s] = E2[s]

    atoms = [groups[key] for key in sorted(groups)]
    return _Reduction(common=common, free=free, atoms=atoms)


class _Solver:
    """One top-level computation: search choice, counters and memo table"""

    def __init__(self, algorithm: str, chain_cap: int, stats: SearchStats):
        self.algorithm = Algorithm(algorithm)
        self.chain_cap = chain_cap
        self.stats = stats
        self.memo: Dict[Tuple[FrozenSet, FrozenSet], RatioSequence] = {}
        self._warned = False

    def solve(self, E1: SplitMap, E2: SplitMap) -> Tuple[RatioSequence, List[CommonSplit], List[RatioSequence]]:
        reduction = _reduce(E1, E2)
        atom_carriers = [self.solve_atom(a1, a2) for a1, a2 in reduction.atoms]
        free = [RatioSequence((ratio,)) for ratio in reduction.free]
        carrier = merge_ascending(free + atom_carriers)
        return carrier, reduction.common, atom_carriers

    def solve_atom(self, E1: SplitMap, E2: SplitMap) -> RatioSequence:
        key = (frozenset(E1.items()), frozenset(E2.items()))
        cached = self.memo.get(key)
        if cached is not None:
            self.stats.memo_hits += 1
            return cached

        self.stats.subproblems += 1
        logger.debug(f"Subproblem with {len(E1)} and {len(E2)} splits ({self.algorithm.value})")
        if self.algorithm is Algorithm.DYNAMIC:
            carrier = self._dynamic(E1, E2)
        elif self.algorithm is Algorithm.DIVIDE:
            carrier = self._divide(E1, E2)
        else:
            carrier = self._brute(E1, E2)
        self.memo[key] = carrier
        return carrier

    def _psg(self, seq: Sequence[Ratio]) -> RatioSequence:
        self.stats.path_space_geo_calls += 1
        return path_space_geo(seq)

    @staticmethod
    def _better(best: Optional[RatioSequence], candidate: RatioSequence) -> RatioSequence:
        if best is None:
            return candidate
        best_sq, cand_sq = _carrier_sq(best), _carrier_sq(candidate)
        if cand_sq < best_sq or (cand_sq == best_sq and candidate.block_key() < best.block_key()):
            return candidate
        return best

    def _divide(self, E1: SplitMap, E2: SplitMap) -> RatioSequence:
        """
        Try each minimal class as the first move

        Dropping X(g) and adding g makes g common with the second tree;
        the rest of the path is the geodesic of the smaller pair, solved
        through the full pipeline.
        """
        ip = incompatibility_poset(E1, E2)
        best: Optional[RatioSequence] = None
        for i in ip.minimal():
            added = ip.t2_subset(ip.class_members[i])
            dropped = ip.t1_subset(ip.class_crossing_bits[i])
            first = Ratio.from_splits(dropped, added, E1, E2)

            intermediate = {s: length for s, length in E1.items() if s not in dropped}
            intermediate.update((f, E2[f]) for f in added)
            tail, _, _ = self.solve(intermediate, E2)
            best = self._better(best, self._psg(RatioSequence((first,)) + tail))
        return best if best is not None else RatioSequence()

    def _dynamic(self, E1: SplitMap, E2: SplitMap) -> RatioSequence:
        """
        Depth-first search of the path poset from the bottom

        Each node keeps the shortest carrier found so far; a node reached
        again with a carrier that is no shorter is pruned, otherwise the
        improvement is pushed to its successors.
        """
        ip = incompatibility_poset(E1, E2)
        sq1 = [E1[s] ** 2 for s in ip.t1_splits]
        sq2 = [E2[s] ** 2 for s in ip.t2_splits]
        top = ip.t2_mask
        stats = self.stats

        bottom = ip.bottom
        start: Tuple[_Block, ...] = ()
        if bottom.added_bits:
            start = ((0.0, _mask_sq(bottom.added_bits, sq2), 0, bottom.added_bits),)
        best: Dict[int, Tuple[float, Tuple[_Block, ...]]] = {bottom.added_bits: (_blocks_sq(start), start)}

        def lowest_ratio_first(u, v) -> int:
            left, right = u[0] * v[1], v[0] * u[1]
            return (left > right) - (left < right)

        def visit(added: int, crossing: int, carrier: Tuple[_Block, ...]):
            stats.nodes_visited += 1
            if added == top:
                return
            children = []
            for succ_added, succ_crossing in cover_masks(ip, added, crossing):
                d = succ_crossing & ~crossing
                m = succ_added & ~added
                children.append((_mask_sq(d, sq1), _mask_sq(m, sq2), d, m, succ_added, succ_crossing))
            children.sort(key=cmp_to_key(lowest_ratio_first))

            for a, b, d, m, succ_added, succ_crossing in children:
                stats.path_space_geo_calls += 1
                candidate = _push(carrier, a, b, d, m)
                candidate_sq = _blocks_sq(candidate)
                stored = best.get(succ_added)
                if stored is not None:
                    stored_sq, stored_carrier = stored
                    if candidate_sq > stored_sq or (
                        candidate_sq == stored_sq
                        and _mask_key(candidate) >= _mask_key(stored_carrier)
                    ):
                        stats.nodes_pruned += 1
                        continue
                best[succ_added] = (candidate_sq, candidate)
                visit(succ_added, succ_crossing, candidate)

        visit(bottom.added_bits, bottom.crossing_bits, start)
        blocks = best[top][1]

        leftover = ip.t1_mask & ~ip.crossing_of(top)
        if leftover:
            blocks = _push(blocks, _mask_sq(leftover, sq1), 0.0, leftover, 0)
        return RatioSequence(
            tuple(Ratio(a, b, ip.t1_subset(d), ip.t2_subset(m)) for a, b, d, m in blocks)
        )

    def _brute(self, E1: SplitMap, E2: SplitMap) -> RatioSequence:
        """Path-space geodesic of every maximal chain, keep the shortest"""
        ip = incompatibility_poset(E1, E2)
        leftover = ip.t1_mask & ~ip.crossing_of(ip.t2_mask)
        best: Optional[RatioSequence] = None
        for chain in iter_chain_masks(ip):
            self._count_chain()
            if leftover:
                chain = chain + [(leftover, 0)]
            seq = [Ratio.from_splits(ip.t1_subset(d), ip.t2_subset(m), E1, E2) for d, m in chain]
            best = self._better(best, self._psg(seq))
        return best if best is not None else RatioSequence()

    def _count_chain(self):
        self.stats.chains += 1
        if self.stats.chains > self.chain_cap:
            raise ChainCapExceeded(self.chain_cap)
        if not self._warned and self.stats.chains >= CAP_WARNING_FRACTION * self.chain_cap > 1:
            self._warned = True
            logger.warning(
                f"Brute force has enumerated {self.stats.chains} of at most {self.chain_cap} chains"
            )


def _mask_key(blocks: Sequence[_Block]) -> Tuple[Tuple[int, int], ...]:
    return tuple((d, m) for _, _, d, m in blocks)


def _check_taxa(T1: WeightedTree, T2: WeightedTree):
    if T1.taxa != T2.taxa:
        first, second = set(T1.taxa.names), set(T2.taxa.names)
        raise TaxaMismatchError(missing=first - second, extra=second - first)


def _check_no_common(T1: WeightedTree, T2: WeightedTree):
    shared = T1.splits.keys() & T2.splits.keys()
    if shared:
        names = ", ".join(str(s) for s in sorted(shared))
        raise CommonSplitError(f"Trees share splits {names}; use geodesic_distance")


def _compute(
    T1: WeightedTree, T2: WeightedTree, algorithm: str, chain_cap: int, include_leaves: bool
) -> Geodesic:
    _check_taxa(T1, T2)
    algorithm = Algorithm(algorithm).value
    stats = SearchStats()
    with traced_operation(
        "geodesic_distance",
        algorithm=algorithm,
        leaves=T1.n,
        t1_splits=len(T1.splits),
        t2_splits=len(T2.splits),
    ) as span:
        solver = _Solver(algorithm, chain_cap, stats)
        carrier, common, atoms = solver.solve(dict(T1.splits), dict(T2.splits))
        leaf_sq = leaf_contribution(T1, T2) if include_leaves else 0.0
        distance = math.sqrt(
            math.fsum([_carrier_sq(carrier), math.fsum(c.contribution for c in common), leaf_sq])
        )
        stats.record_on(span)
        span.set_attribute("treedist.distance", distance)

    logger.info(
        f"Geodesic ({algorithm}): n={T1.n}, {len(common)} common splits, "
        f"{len(atoms)} subproblems, distance={distance:.12g}"
    )
    return Geodesic(
        distance=distance,
        carrier=carrier,
        common=tuple(common),
        atoms=tuple(atoms),
        leaf_contribution=leaf_sq,
        algorithm=algorithm,
        stats=stats,
    )


def geodesic_distance(T1: WeightedTree, T2: WeightedTree, opts: Optional[GeoOptions] = None) -> Geodesic:
    """
    Geodesic between two trees on the same taxa

    Args:
        T1: Start tree
        T2: End tree
        opts: Search algorithm, leaf term and brute-force chain cap

    Returns:
        Geodesic with distance, merged carrier and common-split terms

    Raises:
        TaxaMismatchError: if the trees are on different taxa
        ChainCapExceeded: if brute force enumerates too many chains
    """
    opts = opts or GeoOptions()
    return _compute(T1, T2, opts.algorithm, opts.chain_cap, opts.include_leaves)


def geodemaps_dynamic(T1: WeightedTree, T2: WeightedTree) -> Geodesic:
    """Depth-first path-poset search on a pair with no common splits"""
    _check_taxa(T1, T2)
    _check_no_common(T1, T2)
    return _compute(T1, T2, Algorithm.DYNAMIC, DEFAULT_CHAIN_CAP, include_leaves=False)


def geodemaps_divide(T1: WeightedTree, T2: WeightedTree) -> Geodesic:
    """Divide-and-conquer over minimal classes on a pair with no common splits"""
    _check_taxa(T1, T2)
    _check_no_common(T1, T2)
    return _compute(T1, T2, Algorithm.DIVIDE, DEFAULT_CHAIN_CAP, include_leaves=False)


def brute_force(T1: WeightedTree, T2: WeightedTree, chain_cap: int = DEFAULT_CHAIN_CAP) -> Geodesic:
    """Minimum over all maximal chains; raises ChainCapExceeded past chain_cap"""
    _check_taxa(T1, T2)
    _check_no_common(T1, T2)
    return _compute(T1, T2, Algorithm.BRUTE, chain_cap, include_leaves=False)


def leaf_contribution(T1: WeightedTree, T2: WeightedTree) -> float:
    """Σ (|l_i|_T1 - |l_i|_T2)², the squared leaf-edge term"""
    _check_taxa(T1, T2)
    return math.fsum((x - y) ** 2 for x, y in zip(T1.leaf_lengths, T2.leaf_lengths))


def tree_at(geodesic: Geodesic, T1: WeightedTree, T2: WeightedTree, lam: float) -> WeightedTree:
    """
    Tree at fraction lam of the geodesic from T1 to T2

    A carrier block with norms ã and b̃ has coordinate ã - lam(ã + b̃):
    while positive its dropped splits shrink proportionally, once
    negative its added splits grow proportionally. Common splits and
    leaf edges interpolate linearly.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must be in [0, 1], got {lam}")
    _check_taxa(T1, T2)

    splits: SplitMap = {}
    for ratio in geodesic.carrier:
        a, b = ratio.drop_norm, ratio.add_norm
        x = a - lam * (a + b)
        if x > 0:
            for s in ratio.dropped:
                splits[s] = T1.splits[s] * (x / a)
        elif x < 0:
            for s in ratio.added:
                splits[s] = T2.splits[s] * (-x / b)
    for c in geodesic.common:
        length = (1.0 - lam) * c.length1 + lam * c.length2
        if length > 0:
            splits[c.split] = length
    leaves = tuple((1.0 - lam) * x + lam * y for x, y in zip(T1.leaf_lengths, T2.leaf_lengths))
    return WeightedTree(splits=WeightedSplitSet(splits), leaf_lengths=leaves, taxa=T1.taxa)


def orthant_sequence(geodesic: Geodesic) -> List[FrozenSet[Split]]:
    """Topologies traversed by the geodesic, first tree's orthant first"""
    current = {c.split for c in geodesic.common} | geodesic.carrier.dropped
    sequence = [frozenset(current)]
    for ratio in geodesic.carrier:
        current -= ratio.dropped
        current |= ratio.added
        sequence.append(frozenset(current))
    return sequence


def numbered_taxa(n: int, prefix: str = "t") -> TaxaMap:
    """Names t1..tn zero-padded so lexicographic and numeric order agree"""
    width = len(str(n))
    return TaxaMap(names=tuple(f"{prefix}{i:0{width}d}" for i in range(1, n + 1)))


def exponential_family(n: int, length: float = 1.0) -> Tuple[WeightedTree, WeightedTree]:
    """
    Pair whose path poset has at least 2^((n-2)/2) elements

    The second tree holds the cherries c_i = {2i-1, 2i}; the first tree
    holds the nested splits g_i = c_1 ∪ ... ∪ c_(i-1) ∪ {2i-1, n-1}, so
    c_i crosses g_i alone and every set of cherries is closed.
    """
    if n < 4 or n % 2:
        raise ValueError(f"exponential_family needs an even n >= 4, got {n}")
    m = (n - 2) // 2
    taxa = numbered_taxa(n)
    t1: SplitMap = {}
    t2: SplitMap = {}
    prefix: List[int] = []
    for i in range(1, m + 1):
        cherry = [2 * i - 1, 2 * i]
        t2[Split.from_leaves(cherry, n)] = length
        t1[Split.from_leaves(prefix + [2 * i - 1, n - 1], n)] = length
        prefix += cherry
    leaves = (1.0,) * n
    return (
        WeightedTree(splits=WeightedSplitSet(t1), leaf_lengths=leaves, taxa=taxa),
        WeightedTree(splits=WeightedSplitSet(t2), leaf_lengths=leaves, taxa=taxa),
    )


def random_tree(taxa: TaxaMap, rng: np.random.Generator) -> WeightedTree:
    """
    Uniform random rooted binary tree with lengths uniform on (0, 1]

    Leaves are attached one at a time to an edge chosen uniformly among
    all edges, the edge above the root included.
    """
    n = taxa.n
    if n < 2:
        raise ValueError("random_tree needs at least 2 taxa")
    # Each clade stands for the edge above it; the full clade is the root edge
    clades = {1 << 1, 1 << 2, (1 << 1) | (1 << 2)}
    for leaf in range(3, n + 1):
        bit = 1 << leaf
        ordered = sorted(clades)
        target = ordered[int(rng.integers(len(ordered)))]
        clades = {
            clade | bit if clade != target and clade & target == target else clade
            for clade in clades
        }
        clades.add(target | bit)
        clades.add(bit)

    full = ((1 << (n + 1)) - 1) & ~1
    interior = sorted(c for c in clades if c != full and c.bit_count() > 1)
    lengths = 1.0 - rng.random(len(interior) + n)
    splits = {Split(block, n): float(x) for block, x in zip(interior, lengths)}
    return WeightedTree(
        splits=WeightedSplitSet(splits),
        leaf_lengths=tuple(float(x) for x in lengths[len(interior):]),
        taxa=taxa,
    )
