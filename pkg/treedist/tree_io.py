"""
Newick reading and writing for rooted, edge-weighted trees

Statements are read with dendropy into one shared TaxonNamespace, then
checked and copied into RawTree. The input's root node plays the role of
the extra taxon 0; leaves are numbered 1..n through a TaxaMap shared by
every tree being compared.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import dendropy
from dendropy.dataio.newickreader import NewickReader
from dendropy.utility.error import DataParseError

from treedist.errors import (
    DuplicateTaxonError,
    MissingBranchLengthError,
    NewickParseError,
    TaxaMismatchError,
)

if TYPE_CHECKING:
    from treedist.splits import WeightedTree

logger = logging.getLogger(__name__)

_NEEDS_QUOTES = set("(),:;[]' \t\r\n")


@dataclass(frozen=True)
class TaxaMap:
    """Leaf names in index order; index 0 is reserved for the root"""

    names: Tuple[str, ...]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("Taxon names must be unique")
        if any(not name for name in self.names):
            raise ValueError("Taxon names must be non-empty")
        lookup = {name: i + 1 for i, name in enumerate(self.names)}
        object.__setattr__(self, "index", MappingProxyType(lookup))

    def __reduce__(self):
        return (TaxaMap, (self.names,))

    @property
    def n(self) -> int:
        return len(self.names)

    def name_of(self, index: int) -> str:
        """Name for a leaf index; index 0 is the root"""
        if index == 0:
            return "0"
        return self.names[index - 1]


@dataclass(frozen=True)
class RawNode:
    """One node of a parsed Newick statement"""

    name: Optional[str]
    length: Optional[float]
    children: Tuple["RawNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def iter_leaves(self):
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))


@dataclass(frozen=True)
class RawTree:
    """Parse tree of one Newick statement with every non-root length filled in"""

    root: RawNode

    @property
    def leaf_names(self) -> List[str]:
        return [leaf.name for leaf in self.root.iter_leaves()]

    @property
    def internal_edge_count(self) -> int:
        count = 0
        stack = list(self.root.children)
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                count += 1
                stack.extend(node.children)
        return count


def _reader_error(e: DataParseError, error_class=NewickParseError) -> NewickParseError:
    message = getattr(e, "message", None) or str(e)
    return error_class(message, position=getattr(e, "col_num", None))


def _checked_length(
    value, label: str, is_root: bool, default_length: Optional[float]
) -> Optional[float]:
    if value is None:
        if is_root:
            return None
        if default_length is None:
            raise MissingBranchLengthError(f"Missing branch length for {label}")
        return float(default_length)
    # dendropy keeps a length it cannot convert as the raw string
    if isinstance(value, str) or not math.isfinite(value) or value < 0:
        raise NewickParseError(
            f"Branch length of {label} must be a finite non-negative number, got '{value}'"
        )
    return float(value)


def _to_raw_tree(tree: dendropy.Tree, default_length: Optional[float]) -> RawTree:
    built: Dict[int, RawNode] = {}
    seen = set()
    for node in tree.postorder_node_iter():
        children = tuple(built.pop(id(child)) for child in node.child_nodes())
        if children:
            name = node.label
            label = name or "internal node"
        else:
            name = node.taxon.label if node.taxon is not None else None
            if not name:
                raise NewickParseError("Leaf without a name")
            if name in seen:
                raise DuplicateTaxonError(f"Duplicate leaf name '{name}'")
            seen.add(name)
            label = name
        length = _checked_length(node.edge.length, label, node is tree.seed_node, default_length)
        built[id(node)] = RawNode(name=name, length=length, children=children)

    if len(seen) < 2:
        raise NewickParseError("A tree needs at least 2 leaves")
    root = built[id(tree.seed_node)]
    if len(root.children) > 2:
        logger.debug(
            f"Root has {len(root.children)} children; treated as a multifurcating rooted tree"
        )
    return RawTree(root=root)


def parse_newick(
    text: str,
    default_length: Optional[float] = None,
    taxon_namespace: Optional[dendropy.TaxonNamespace] = None,
) -> RawTree:
    """
    Parse one Newick statement terminated by ';'

    Args:
        text: The statement, quoted or unquoted labels, lengths after ':'
        default_length: Length for branches that have none; without it a
            missing length is an error
        taxon_namespace: Namespace shared with the other trees of one run;
            a fresh one is used when omitted

    Returns:
        RawTree with every non-root branch length filled in
    """
    if default_length is not None and (default_length < 0 or not math.isfinite(default_length)):
        raise ValueError(f"default_length must be finite and >= 0, got {default_length}")
    statement = text.strip()
    if not statement:
        raise NewickParseError("Empty Newick statement", position=0)
    if not statement.endswith(";"):
        raise NewickParseError("Statement must end with ';'", position=len(statement))

    if taxon_namespace is None:
        taxon_namespace = dendropy.TaxonNamespace(is_case_sensitive=True)
    try:
        trees = dendropy.TreeList.get(
            data=statement,
            schema="newick",
            taxon_namespace=taxon_namespace,
            rooting="force-rooted",
            preserve_underscores=True,
            case_sensitive_taxon_labels=True,
        )
    except NewickReader.NewickReaderDuplicateTaxonError as e:
        raise _reader_error(e, DuplicateTaxonError) from e
    except DataParseError as e:
        raise _reader_error(e) from e

    if len(trees) != 1:
        raise NewickParseError(f"Expected one tree statement, found {len(trees)}")
    return _to_raw_tree(trees[0], default_length)


def read_newick_file(
    path: Union[str, Path],
    default_length: Optional[float] = None,
    taxon_namespace: Optional[dendropy.TaxonNamespace] = None,
) -> List[RawTree]:
    """Read one tree per line, skipping blank lines and '#' comments"""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise NewickParseError(
            f"{path} is not valid UTF-8 ({e.reason})",
            position=e.start,
            line=data.count(b"\n", 0, e.start) + 1,
        ) from e

    namespace = (
        taxon_namespace
        if taxon_namespace is not None
        else dendropy.TaxonNamespace(is_case_sensitive=True)
    )
    trees = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            trees.append(parse_newick(stripped, default_length, namespace))
        except NewickParseError as e:
            raise type(e)(e.message, position=e.position, line=line_number) from e
    logger.info(f"Read {len(trees)} trees from {path}")
    return trees


def build_taxa_map(raw_trees: Iterable[RawTree]) -> TaxaMap:
    """One shared, lexicographically ordered TaxaMap for all trees"""
    raw_trees = list(raw_trees)
    if not raw_trees:
        raise ValueError("At least one tree is required to build a taxa map")
    reference = set(raw_trees[0].leaf_names)
    for tree in raw_trees[1:]:
        names = set(tree.leaf_names)
        if names != reference:
            raise TaxaMismatchError(missing=reference - names, extra=names - reference)
    return TaxaMap(names=tuple(sorted(reference)))


def weighted_trees_from_newick(
    source: Union[str, Path, Iterable[str]], default_length: Optional[float] = None
) -> Tuple[List["WeightedTree"], TaxaMap]:
    """
    Parse, index and convert in one step

    Args:
        source: A file path, Newick text with one statement per line, or an
            iterable of statements
        default_length: Passed through to the parser

    Returns:
        The weighted trees in input order and their shared TaxaMap
    """
    from treedist.splits import splits_of_tree

    namespace = dendropy.TaxonNamespace(is_case_sensitive=True)
    if isinstance(source, Path) or (isinstance(source, str) and ";" not in source):
        raw_trees = read_newick_file(source, default_length, namespace)
    elif isinstance(source, str):
        lines = (line.strip() for line in source.splitlines())
        raw_trees = [
            parse_newick(line, default_length, namespace)
            for line in lines
            if line and not line.startswith("#")
        ]
    else:
        raw_trees = [parse_newick(text, default_length, namespace) for text in source]
    taxa = build_taxa_map(raw_trees)
    return [splits_of_tree(raw, taxa) for raw in raw_trees], taxa


def format_length(value: float) -> str:
    """Shortest decimal text that parses back to the same float"""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def quote_label(name: str) -> str:
    if name and not any(char in _NEEDS_QUOTES for char in name):
        return name
    escaped = name.replace("'", "''")
    return f"'{escaped}'"


def write_newick(tree: "WeightedTree", taxa: Optional[TaxaMap] = None) -> str:
    """
    Canonical Newick for a weighted tree

    Children are ordered by their smallest leaf index and lengths use the
    shortest round-trip decimal form.
    """
    taxa = taxa or tree.taxa
    n = taxa.n
    # Every clade as a bitset over leaves 1..n, the root clade included
    clades = sorted(tree.splits, key=lambda split: split.size)
    blocks = [split.block for split in clades]
    lengths = [tree.splits[split] for split in clades]
    full = ((1 << (n + 1)) - 1) & ~1

    children: Dict[int, List[Tuple[int, str]]] = {full: []}
    for block in blocks:
        children[block] = []

    def parent_of(block: int) -> int:
        for candidate in blocks:
            if candidate != block and candidate & block == block:
                return candidate
        return full

    for leaf in range(1, n + 1):
        bit = 1 << leaf
        leaf_text = f"{quote_label(taxa.name_of(leaf))}:{format_length(tree.leaf_lengths[leaf - 1])}"
        children[parent_of(bit)].append((bit, leaf_text))

    # Smallest clades first so every child's text exists before its parent
    for block, length in zip(blocks, lengths):
        kids = sorted(children[block], key=lambda item: _lowest_bit(item[0]))
        text = "(" + ",".join(item[1] for item in kids) + f"):{format_length(length)}"
        children[parent_of(block)].append((block, text))

    kids = sorted(children[full], key=lambda item: _lowest_bit(item[0]))
    return "(" + ",".join(item[1] for item in kids) + ");"


def _lowest_bit(block: int) -> int:
    return (block & -block).bit_length()
