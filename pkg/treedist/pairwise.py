"""
All-pairs distance matrices

Each unordered pair is computed once and mirrored. With more than one
worker the pairs run in a process pool driven from asyncio; every worker
receives the parsed trees once at start-up and owns its memo tables.
"""

import asyncio
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from instrumentation import traced_operation
from treedist.errors import TreeDistError
from treedist.geo_models import GeoOptions, OutputFormat
from treedist.geodesic import geodesic_distance
from treedist.splits import WeightedTree

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 100
VALUE_FORMAT = "%.12g"

_worker_trees: List[WeightedTree] = []
_worker_options: Optional[GeoOptions] = None


def _init_worker(trees: List[WeightedTree], options: dict):
    global _worker_trees, _worker_options
    _worker_trees = trees
    _worker_options = GeoOptions(**options)


def _pair_task(i: int, j: int) -> Tuple[int, int, float]:
    geodesic = geodesic_distance(_worker_trees[i], _worker_trees[j], _worker_options)
    return i, j, geodesic.distance


def _check_matrix(matrix: np.ndarray):
    if not np.array_equal(matrix, matrix.T):
        raise TreeDistError("Distance matrix is not symmetric")
    if np.any(np.diag(matrix) != 0.0):
        raise TreeDistError("Distance matrix has a non-zero diagonal")


async def distance_matrix_async(
    trees: Sequence[WeightedTree],
    options: Optional[GeoOptions] = None,
    workers: int = 1,
) -> np.ndarray:
    """
    Symmetric matrix of geodesic distances

    Args:
        trees: Trees on one shared TaxaMap
        options: Passed to geodesic_distance for every pair
        workers: Process count; 1 computes in this process

    Returns:
        n x n float64 array with a zero diagonal
    """
    options = options or GeoOptions()
    trees = list(trees)
    count = len(trees)
    matrix = np.zeros((count, count), dtype=np.float64)
    pairs = [(i, j) for i in range(count) for j in range(i + 1, count)]
    logger.info(f"Computing {len(pairs)} pairwise distances with {workers} worker(s)")

    with traced_operation(
        "distance_matrix", trees=count, pairs=len(pairs), workers=workers, algorithm=options.algorithm
    ):
        if workers <= 1 or len(pairs) <= 1:
            for done, (i, j) in enumerate(pairs, start=1):
                matrix[i, j] = matrix[j, i] = geodesic_distance(trees[i], trees[j], options).distance
                if done % PROGRESS_EVERY == 0:
                    logger.info(f"Matrix progress: {done}/{len(pairs)} pairs")
        else:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(
                max_workers=workers,
                initializer=_init_worker,
                initargs=(trees, options.model_dump()),
            ) as pool:
                futures = [loop.run_in_executor(pool, _pair_task, i, j) for i, j in pairs]
                for done, future in enumerate(asyncio.as_completed(futures), start=1):
                    i, j, distance = await future
                    matrix[i, j] = matrix[j, i] = distance
                    if done % PROGRESS_EVERY == 0:
                        logger.info(f"Matrix progress: {done}/{len(pairs)} pairs")

    _check_matrix(matrix)
    return matrix


def distance_matrix(
    trees: Sequence[WeightedTree],
    options: Optional[GeoOptions] = None,
    workers: int = 1,
) -> np.ndarray:
    """Blocking wrapper around distance_matrix_async"""
    return asyncio.run(distance_matrix_async(trees, options, workers))


def format_value(value: float) -> str:
    """12 significant digits"""
    return VALUE_FORMAT % value


def format_matrix(
    matrix: np.ndarray, fmt: str = OutputFormat.CSV, labels: Optional[Sequence[str]] = None
) -> str:
    """
    Render a distance matrix

    csv and tsv write a header row of labels (tree indices by default)
    followed by one row of values per tree; json writes
    {"labels": [...], "matrix": [[...]]}.
    """
    fmt = OutputFormat(fmt)
    labels = [str(label) for label in (labels if labels is not None else range(len(matrix)))]
    if len(labels) != len(matrix):
        raise ValueError(f"Expected {len(matrix)} labels, got {len(labels)}")

    if fmt is OutputFormat.JSON:
        rows = [[float(format_value(x)) for x in row] for row in matrix]
        return json.dumps({"labels": labels, "matrix": rows}, indent=2) + "\n"

    delimiter = "\t" if fmt is OutputFormat.TSV else ","
    buffer = io.StringIO()
    np.savetxt(
        buffer,
        np.asarray(matrix, dtype=float),
        fmt=VALUE_FORMAT,
        delimiter=delimiter,
        header=delimiter.join(labels),
        comments="",
    )
    return buffer.getvalue()
