#!/usr/bin/env python3
"""
treedist command line
=====================
Geodesic distances between rooted phylogenetic trees read from a Newick
file with one tree per line.

Usage:
    treedist dist --input trees.nwk                 # distance between trees 0 and 1
    treedist dist --input trees.nwk --pair 2 5 -v   # with the carrier summary
    treedist matrix --input trees.nwk --output tsv  # all pairs
    treedist splits --input pair.nwk --dot          # poset diagnostics

Exit codes:
    0 - Success
    1 - Newick parse error or unreadable input
    2 - Trees on different leaf sets
    3 - Brute-force chain cap exceeded
    4 - Internal contract violation or unusable input
    5 - Invalid configuration
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

from pydantic import ValidationError

from instrumentation import configure_tracing
from treedist.errors import NewickParseError, SettingsError, TreeDistError
from treedist.geo_models import Algorithm, CliConfig, OutputFormat, Subcommand
from treedist.geodesic import geodesic_distance
from treedist.pairwise import distance_matrix, format_matrix
from treedist.posets import count_closed_sets, incompatibility_poset, to_dot, CLOSED_SET_ENUMERATION_LIMIT
from treedist.settings import TreeDistSettings, get_settings, load_settings
from treedist.splits import WeightedTree, common_splits
from treedist.tree_io import TaxaMap, format_length, weighted_trees_from_newick

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _load_trees(config: CliConfig, minimum: int = 2):
    trees, taxa = weighted_trees_from_newick(Path(config.input), config.default_length)
    if len(trees) < minimum:
        raise TreeDistError(f"{config.input} holds {len(trees)} tree(s); at least {minimum} needed")
    return trees, taxa


def _describe_taxa(taxa: TaxaMap) -> str:
    return " ".join(f"{i}={taxa.name_of(i)}" for i in range(1, taxa.n + 1))


def run_dist(config: CliConfig, out: Optional[TextIO] = None) -> int:
    """Distance between one pair of trees, printed with 12 decimals"""
    out = out or sys.stdout
    trees, taxa = _load_trees(config)
    if config.pair is not None:
        i, j = config.pair
        if max(i, j) >= len(trees):
            raise TreeDistError(f"--pair {i} {j} is out of range for {len(trees)} trees")
    else:
        i, j = 0, 1
        if len(trees) > 2:
            logger.warning(f"{len(trees)} trees in {config.input}; using trees 0 and 1 (see --pair)")

    geodesic = geodesic_distance(trees[i], trees[j], config.geo_options())

    if config.json_output:
        report = geodesic.to_dict()
        report["pair"] = [i, j]
        out.write(json.dumps(report, indent=2) + "\n")
        return 0

    out.write(f"{geodesic.distance:.12f}\n")
    if config.verbose:
        out.write(f"# taxa: {_describe_taxa(taxa)}\n")
        out.write(f"# algorithm: {geodesic.algorithm}\n")
        for k, ratio in enumerate(geodesic.carrier):
            dropped = " ".join(str(s) for s in sorted(ratio.dropped)) or "-"
            added = " ".join(str(s) for s in sorted(ratio.added)) or "-"
            out.write(f"# block {k}: drop {{{dropped}}} add {{{added}}} ratio {ratio}\n")
        for common in geodesic.common:
            out.write(
                f"# common {common.split}: {format_length(common.length1)} -> "
                f"{format_length(common.length2)}\n"
            )
        if config.include_leaves:
            out.write(f"# leaf contribution: {geodesic.leaf_contribution:.12g}\n")
    return 0


def run_matrix(config: CliConfig, out: Optional[TextIO] = None) -> int:
    """Symmetric all-pairs matrix in csv, tsv or json"""
    out = out or sys.stdout
    trees, _ = _load_trees(config)
    matrix = distance_matrix(trees, config.geo_options(), config.workers)
    text = format_matrix(matrix, config.output_format)
    if config.output_path is not None:
        Path(config.output_path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(trees)}x{len(trees)} matrix to {config.output_path}")
    else:
        out.write(text)
    return 0


def _write_splits(out: TextIO, label: str, tree: WeightedTree):
    out.write(f"{label}: {len(tree.splits)} splits\n")
    for split in sorted(tree.splits, key=lambda s: (s.size, s.block)):
        out.write(f"  {split}  {format_length(tree.splits[split])}\n")


def run_splits(config: CliConfig, out: Optional[TextIO] = None) -> int:
    """Splits of both trees, their common splits and the incompatibility poset"""
    out = out or sys.stdout
    trees, taxa = _load_trees(config)
    if len(trees) != 2:
        raise TreeDistError(f"splits needs exactly 2 trees, {config.input} holds {len(trees)}")
    T1, T2 = trees

    out.write(f"Taxa: {_describe_taxa(taxa)}\n")
    _write_splits(out, "Tree 0", T1)
    _write_splits(out, "Tree 1", T2)

    shared = common_splits(T1, T2)
    out.write(f"Common splits: {len(shared)}\n")
    for split in sorted(shared, key=lambda s: (s.size, s.block)):
        out.write(f"  {split}\n")

    ip = incompatibility_poset(
        [s for s in T1.splits if s not in shared], [s for s in T2.splits if s not in shared]
    )
    minimal = set(ip.minimal())
    out.write(f"Incompatibility poset: {len(ip)} classes, {len(minimal)} minimal\n")
    for k, (members, crossing) in enumerate(zip(ip.classes, ip.class_crossing)):
        tag = " [minimal]" if k in minimal else ""
        splits = " ".join(str(s) for s in sorted(members))
        crosses = " ".join(str(s) for s in sorted(crossing)) or "-"
        out.write(f"  class {k}{tag}: {splits} | crossing: {crosses}\n")
    if len(ip) <= CLOSED_SET_ENUMERATION_LIMIT:
        out.write(f"Path poset: {count_closed_sets(ip)} closed sets\n")

    if config.dot:
        out.write(to_dot(ip))
    return 0


COMMANDS = {
    Subcommand.DIST.value: run_dist,
    Subcommand.MATRIX.value: run_matrix,
    Subcommand.SPLITS.value: run_splits,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, type=Path, help="Newick file, one tree per line")
    common.add_argument(
        "--algorithm",
        "-a",
        choices=[a.value for a in Algorithm],
        help="Search used on each subproblem (default from settings: divide)",
    )
    common.add_argument("--leaves", action="store_true", default=None, help="Include leaf-edge lengths")
    common.add_argument("--default-length", type=float, help="Length for branches without one")
    common.add_argument("--chain-cap", type=int, help="Maximal chains brute force may enumerate")
    common.add_argument("--verbose", "-v", action="store_true", help="Carrier summary and INFO logging")
    common.add_argument("--log-level", help="Logging level (default from settings: WARNING)")
    common.add_argument("--env-file", type=Path, help="Settings file instead of .env.treedist")
    common.add_argument("--trace-console", action="store_true", help="Print OpenTelemetry spans")

    parser = argparse.ArgumentParser(
        prog="treedist",
        description="Geodesic distances between rooted phylogenetic trees",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Exit codes:" + __doc__.split("Exit codes:")[1],
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    dist = sub.add_parser("dist", parents=[common], help="Distance between two trees")
    dist.add_argument("--pair", nargs=2, type=int, metavar=("I", "J"), help="0-based tree indices")
    dist.add_argument("--json", action="store_true", dest="json_output", help="Full geodesic as JSON")

    matrix = sub.add_parser("matrix", parents=[common], help="All pairwise distances")
    matrix.add_argument("--output", "-o", choices=[f.value for f in OutputFormat], help="Matrix format")
    matrix.add_argument("--out", type=Path, dest="output_path", help="Write the matrix to a file")
    matrix.add_argument("--workers", "-w", type=int, help="Worker processes (default: physical cores)")

    splits = sub.add_parser("splits", parents=[common], help="Split and poset diagnostics")
    splits.add_argument("--dot", action="store_true", help="Append the poset as Graphviz DOT")
    return parser


def _configure_logging(settings: TreeDistSettings, args: argparse.Namespace):
    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    if args.verbose:
        logging.getLogger("treedist").setLevel(min(logging.INFO, logging.getLogger().level))


def build_config(args: argparse.Namespace, settings: TreeDistSettings) -> CliConfig:
    """Merge parsed flags over settings"""

    def pick(name: str, fallback):
        value = getattr(args, name, None)
        return fallback if value is None else value

    return CliConfig(
        subcommand=args.subcommand,
        input=args.input,
        algorithm=pick("algorithm", settings.algorithm),
        include_leaves=pick("leaves", settings.include_leaves),
        output_format=pick("output", settings.output_format),
        output_path=pick("output_path", None),
        default_length=pick("default_length", settings.default_length),
        pair=tuple(args.pair) if getattr(args, "pair", None) else None,
        chain_cap=pick("chain_cap", settings.chain_cap),
        workers=pick("workers", settings.workers),
        verbose=args.verbose,
        dot=pick("dot", False),
        json_output=pick("json_output", False),
    )


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    """Entry point; returns the process exit code"""
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = load_settings(args.env_file) if args.env_file else get_settings()
        if args.log_level:
            TreeDistSettings(log_level=args.log_level)
    except TreeDistError as e:
        print(f"treedist: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"treedist: invalid --log-level: {e.errors()[0]['msg']}", file=sys.stderr)
        return SettingsError.exit_code

    _configure_logging(settings, args)
    configure_tracing(settings.otlp_endpoint, console=args.trace_console or settings.trace_console)

    try:
        config = build_config(args, settings)
    except ValidationError as e:
        error = e.errors()[0]
        field = error["loc"][0] if error["loc"] else "option"
        print(f"treedist: invalid {field}: {error['msg']}", file=sys.stderr)
        return SettingsError.exit_code

    try:
        return COMMANDS[config.subcommand](config, out)
    except TreeDistError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"treedist: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"treedist: cannot read input: {e}", file=sys.stderr)
        return NewickParseError.exit_code


if __name__ == "__main__":
    sys.exit(main())
