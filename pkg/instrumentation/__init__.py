"""
OpenTelemetry instrumentation for treedist.

Spans record problem sizes, search counters and process memory for each
distance computation. Exporters are opt-in; see configure_tracing().
"""

from .search_stats import SearchStats
from .tracing import configure_tracing, memory_metrics, traced_operation

__all__ = [
    "SearchStats",
    "configure_tracing",
    "memory_metrics",
    "traced_operation",
]
