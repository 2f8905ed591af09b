#!/usr/bin/env python3
"""
Geodesic Scaling Check
======================
Times the dynamic and divide searches on random tree pairs without common
splits and compares them with each other.

Pairs without common splits form a single subproblem, so they are the
worst case for both searches. The default run checks 20-leaf pairs
against a 10 second budget, then tries larger pairs under a timeout.

Usage:
    python scripts/scaling_check.py                # 20 leaves, then 40
    python scripts/scaling_check.py --pairs 10 -v  # more pairs, per-pair timings
    python scripts/scaling_check.py --large 0      # skip the large attempt

Exit codes:
    0 - All checks passed
    1 - Searches disagree
    3 - Budget exceeded
"""

import argparse
import multiprocessing
import os
import sys
import time
import traceback
from queue import Empty
from typing import List, Tuple

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from treedist.geo_models import GeoOptions  # noqa: E402
from treedist.geodesic import geodesic_distance, numbered_taxa, random_tree  # noqa: E402
from treedist.splits import WeightedTree, common_splits  # noqa: E402

# Colors for terminal output
RED = "\033[0;31m"
GREEN = "\033[0;32m"
YELLOW = "\033[1;33m"
BLUE = "\033[0;34m"
CYAN = "\033[0;36m"
NC = "\033[0m"  # No Color

SEARCHES = ("dynamic", "divide")


def no_common_pair(n: int, rng: np.random.Generator, max_tries: int = 100_000) -> Tuple[WeightedTree, WeightedTree]:
    taxa = numbered_taxa(n)
    for _ in range(max_tries):
        T1, T2 = random_tree(taxa, rng), random_tree(taxa, rng)
        if not common_splits(T1, T2):
            return T1, T2
    raise RuntimeError(f"No {n}-leaf pair without common splits after {max_tries} draws")


def timed_distance(T1: WeightedTree, T2: WeightedTree, algorithm: str) -> Tuple[float, float, int]:
    """distance, seconds, nodes visited"""
    start = time.perf_counter()
    geodesic = geodesic_distance(T1, T2, GeoOptions(algorithm=algorithm))
    return geodesic.distance, time.perf_counter() - start, geodesic.stats.nodes_visited


def _distance_into(results: multiprocessing.Queue, T1: WeightedTree, T2: WeightedTree, algorithm: str):
    results.put(timed_distance(T1, T2, algorithm))


class ScalingCheck:
    """Timing and agreement checks for the core searches"""

    def __init__(self, leaves: int, pairs: int, budget: float, large: int, timeout: float, seed: int, verbose: bool):
        self.leaves = leaves
        self.pairs = pairs
        self.budget = budget
        self.large = large
        self.timeout = timeout
        self.rng = np.random.default_rng(seed)
        self.verbose = verbose
        self.results: List[Tuple[str, bool]] = []
        self.disagreement = False

    def log(self, message: str, level: str = "info"):
        """Colored output based on level"""
        colors = {"error": RED, "success": GREEN, "warning": YELLOW, "info": BLUE, "debug": CYAN}
        prefix = {"error": "✗", "success": "✓", "warning": "⚠", "info": "→", "debug": "·"}.get(level, "•")
        print(f"{colors.get(level, NC)}{prefix} {message}{NC}")

    def log_section(self, title: str):
        print(f"\n{BLUE}{'='*60}{NC}")
        print(f"{BLUE}{title}{NC}")
        print(f"{BLUE}{'='*60}{NC}")

    def check_budget(self) -> bool:
        """Every search finishes each pair within the budget and the searches agree"""
        self.log_section(f"{self.leaves} leaves, {self.pairs} pair(s), budget {self.budget:g}s")
        ok = True
        for k in range(self.pairs):
            T1, T2 = no_common_pair(self.leaves, self.rng)
            distances = {}
            for algorithm in SEARCHES:
                distance, seconds, visited = timed_distance(T1, T2, algorithm)
                distances[algorithm] = distance
                within = seconds < self.budget
                ok &= within
                if self.verbose or not within:
                    self.log(
                        f"pair {k} {algorithm:8s} d={distance:.12g} {seconds:.3f}s ({visited} nodes)",
                        "debug" if within else "error",
                    )
            spread = max(distances.values()) - min(distances.values())
            if spread > 1e-9:
                self.log(f"pair {k}: searches differ by {spread:.3g}", "error")
                self.disagreement = True
                ok = False
        self.log(f"{self.leaves}-leaf pairs {'within' if ok else 'over'} budget", "success" if ok else "error")
        return ok

    def check_large(self) -> bool:
        """One large pair per search under a wall-clock timeout; running out is only a warning"""
        self.log_section(f"{self.large} leaves, timeout {self.timeout:g}s")
        T1, T2 = no_common_pair(self.large, self.rng)
        for algorithm in SEARCHES:
            results = multiprocessing.Queue()
            worker = multiprocessing.Process(
                target=_distance_into, args=(results, T1, T2, algorithm), daemon=True
            )
            worker.start()
            try:
                distance, seconds, visited = results.get(timeout=self.timeout)
                self.log(f"{algorithm}: d={distance:.12g} in {seconds:.2f}s ({visited} nodes)", "success")
            except Empty:
                self.log(f"{algorithm}: no result within {self.timeout:g}s", "warning")
            finally:
                if worker.is_alive():
                    worker.terminate()
                worker.join()
        return True

    def run(self) -> int:
        print(f"\n{BLUE}{'='*60}{NC}")
        print(f"{BLUE}Geodesic Scaling Check{NC}")
        print(f"{BLUE}{'='*60}{NC}")

        stages = [("Budget", self.check_budget)]
        if self.large:
            stages.append(("Large", self.check_large))

        for stage_name, stage_func in stages:
            try:
                self.results.append((stage_name, stage_func()))
            except Exception as e:
                self.log(f"Stage {stage_name} crashed: {str(e)}", "error")
                if self.verbose:
                    traceback.print_exc()
                self.results.append((stage_name, False))

        self.log_section("Scaling Check Summary")
        for stage, ok in self.results:
            color = GREEN if ok else RED
            print(f"  {color}{stage:20s}: {'PASS' if ok else 'FAIL'}{NC}")

        if all(ok for _, ok in self.results):
            print(f"\n{GREEN}✓ All {len(self.results)} checks passed{NC}")
            return 0
        if self.disagreement:
            return 1
        return 3


def main() -> int:
    parser = argparse.ArgumentParser(
        description="Timing check for the geodesic searches",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exit codes:
  0 - All checks passed
  1 - Searches disagree
  3 - Budget exceeded
        """,
    )
    parser.add_argument("--leaves", type=int, default=20, help="Leaves per tree in the budget check")
    parser.add_argument("--pairs", type=int, default=3, help="Random pairs in the budget check")
    parser.add_argument("--budget", type=float, default=10.0, help="Seconds allowed per pair and search")
    parser.add_argument("--large", type=int, default=40, help="Leaves for the large attempt (0 skips it)")
    parser.add_argument("--timeout", type=float, default=60.0, help="Seconds allowed for the large attempt")
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("-v", "--verbose", action="store_true", help="Per-pair timings")
    args = parser.parse_args()

    checker = ScalingCheck(
        leaves=args.leaves,
        pairs=args.pairs,
        budget=args.budget,
        large=args.large,
        timeout=args.timeout,
        seed=args.seed,
        verbose=args.verbose,
    )
    return checker.run()


if __name__ == "__main__":
    sys.exit(main())
