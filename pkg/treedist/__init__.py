"""
treedist - geodesic distances between rooted phylogenetic trees
"""

from treedist.errors import (
    ChainCapExceeded,
    CommonSplitError,
    NewickParseError,
    SettingsError,
    TaxaMismatchError,
    TreeDistError,
)
from treedist.geo_models import Algorithm, GeoOptions, OutputFormat
from treedist.tree_io import TaxaMap, parse_newick, weighted_trees_from_newick, write_newick
from treedist.splits import Split, WeightedSplitSet, WeightedTree, common_splits
from treedist.geodesic import (
    Geodesic,
    brute_force,
    geodemaps_divide,
    geodemaps_dynamic,
    geodesic_distance,
    tree_at,
)
from treedist.pairwise import distance_matrix

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "ChainCapExceeded",
    "CommonSplitError",
    "Geodesic",
    "GeoOptions",
    "NewickParseError",
    "OutputFormat",
    "SettingsError",
    "Split",
    "TaxaMap",
    "TaxaMismatchError",
    "TreeDistError",
    "WeightedSplitSet",
    "WeightedTree",
    "brute_force",
    "common_splits",
    "distance_matrix",
    "geodemaps_divide",
    "geodemaps_dynamic",
    "geodesic_distance",
    "parse_newick",
    "tree_at",
    "weighted_trees_from_newick",
    "write_newick",
]
