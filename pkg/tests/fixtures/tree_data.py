"""
Worked-example trees, hand-checked constants and random generators for tests
"""

from typing import List, Tuple

import numpy as np

from treedist.geodesic import numbered_taxa, random_tree
from treedist.ratio_geo import Ratio
from treedist.splits import Split, WeightedSplitSet, WeightedTree, common_splits

# Five leaves a..e; the edge above (b, c) induces 23|0145
CHERRY_BC_NEWICK = "((a:1,(b:1,c:1):1):1,(d:1,e:1):1);"

# Path-poset worked example. Leaves a..f are 1..6.
# First tree:  e1={5,6}:0.83  e2={1,2,3,4}:0.6  e3={1,2,3}:0.47  e4={1,2}:0.88
# Second tree: f1={1,..,5}:0.7  f2={2,3,4}:0.87  f3={2,3,4,5}:0.47  f4={2,3}:0.15
WORKED_T1_NEWICK = "((((a:1,b:1):0.88,c:1):0.47,d:1):0.6,(e:1,f:1):0.83);"
WORKED_T2_NEWICK = "((a:1,(((b:1,c:1):0.15,d:1):0.87,e:1):0.47):0.7,f:1);"

WORKED_DISTANCE = 2.64991  # printed as 2.65 in the worked example
WORKED_PRINTED_DISTANCE = 2.65
WORKED_AT_F1F4 = 1.8444  # via f1 then f4
WORKED_AT_F4F1 = 1.9256  # via f4 then f1
WORKED_AT_F1F2F4_VIA_F1 = 2.4245
WORKED_AT_F1F2F4_VIA_F4 = 2.4243

# Hasse-edge labels of the path poset, as (drop norm, add norm)
F1_STEP = (0.83, 0.7)
F4_STEP = (0.88, 0.15)
F2_AFTER_F4_STEP = (0.47, 0.87)

# Four leaves, incompatible cherries {1,2} and {2,3}; the geodesic is the cone path
NNI_T1_NEWICK = "((a:1,b:1):1,c:1,d:1);"
NNI_T2_NEWICK = "(a:1,(b:1,c:1):1,d:1);"


def split_of(n: int, *leaves: int) -> Split:
    return Split.from_leaves(leaves, n)


def ratios_from_norms(pairs) -> List[Ratio]:
    return [Ratio.from_norms(a, b) for a, b in pairs]


def random_ratios(rng: np.random.Generator, k: int, high: float = 10.0) -> List[Ratio]:
    """k ratios with norms uniform on (0, high]"""
    norms = high * (1.0 - rng.random((k, 2)))
    return [Ratio.from_norms(float(a), float(b)) for a, b in norms]


def random_pair(n: int, rng: np.random.Generator) -> Tuple[WeightedTree, WeightedTree]:
    taxa = numbered_taxa(n)
    return random_tree(taxa, rng), random_tree(taxa, rng)


def random_no_common_pair(
    n: int, rng: np.random.Generator, max_tries: int = 10_000
) -> Tuple[WeightedTree, WeightedTree]:
    for _ in range(max_tries):
        T1, T2 = random_pair(n, rng)
        if not common_splits(T1, T2):
            return T1, T2
    raise RuntimeError(f"No pair without common splits after {max_tries} draws (n={n})")


def _lift_upper(block: int) -> int:
    """Leaves 1..4 stay, leaf 5 stands for the clade {5,6,7,8}"""
    lifted = block & 0b11110
    if block >> 5 & 1:
        lifted |= 0b111100000
    return lifted


def _grafted_tree(rng: np.random.Generator) -> Tuple[WeightedTree, Split]:
    upper = random_tree(numbered_taxa(5), rng)
    lower = random_tree(numbered_taxa(4), rng)
    n = 8
    e = Split(0b111100000, n)
    splits = {Split(_lift_upper(s.block), n): length for s, length in upper.splits.items()}
    splits.update({Split(s.block << 4, n): length for s, length in lower.splits.items()})
    splits[e] = float(1.0 - rng.random())
    tree = WeightedTree(splits=WeightedSplitSet(splits), leaf_lengths=(1.0,) * n, taxa=numbered_taxa(n))
    return tree, e


def pair_sharing_one_split(
    rng: np.random.Generator, max_tries: int = 10_000
) -> Tuple[WeightedTree, WeightedTree, Split]:
    """8-leaf pair whose only common split is the clade {5,6,7,8}"""
    for _ in range(max_tries):
        T1, e = _grafted_tree(rng)
        T2, _ = _grafted_tree(rng)
        if common_splits(T1, T2) == {e}:
            return T1, T2, e
    raise RuntimeError(f"No pair sharing exactly one split after {max_tries} draws")
