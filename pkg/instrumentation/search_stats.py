"""
Counters collected while searching the path poset.
"""

from dataclasses import asdict, dataclass
from typing import Dict


@dataclass
class SearchStats:
    """Work done by one geodesic computation"""

    nodes_visited: int = 0
    nodes_pruned: int = 0
    memo_hits: int = 0
    subproblems: int = 0
    path_space_geo_calls: int = 0
    chains: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)

    def record_on(self, span) -> None:
        if span is not None and span.is_recording():
            for key, value in asdict(self).items():
                span.set_attribute(f"treedist.search.{key}", value)
