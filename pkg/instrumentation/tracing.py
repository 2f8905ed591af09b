"""
OpenTelemetry tracing for distance computations.

Spans wrap each geodesic and matrix computation and carry problem sizes,
search counters and process memory. Until configure_tracing() installs an
SDK provider, the API's no-op tracer is active and spans cost nothing.
"""

import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

try:
    import psutil
except ImportError:
    psutil = None

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter, SimpleSpanProcessor
from opentelemetry.semconv.resource import ResourceAttributes
from opentelemetry.trace import Status, StatusCode

logger = logging.getLogger(__name__)

SERVICE_NAME = "treedist"
SERVICE_VERSION = "0.1.0"

_configured = False


def configure_tracing(
    otlp_endpoint: Optional[str] = None,
    console: bool = False,
    service_name: str = SERVICE_NAME,
) -> bool:
    """
    Install an SDK tracer provider when an exporter is requested.

    Args:
        otlp_endpoint: OTLP gRPC collector, e.g. "localhost:4317"
        console: Print finished spans to stdout
        service_name: Resource service name

    Returns:
        True if a provider was installed by this call
    """
    global _configured
    if _configured or not (otlp_endpoint or console):
        return False

    resource = Resource.create(
        {
            ResourceAttributes.SERVICE_NAME: service_name,
            ResourceAttributes.SERVICE_VERSION: SERVICE_VERSION,
        }
    )
    provider = TracerProvider(resource=resource)

    if otlp_endpoint:
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter

        provider.add_span_processor(
            BatchSpanProcessor(OTLPSpanExporter(endpoint=otlp_endpoint, insecure=True))
        )
    if console:
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))

    trace.set_tracer_provider(provider)
    _configured = True
    logger.info(
        f"Tracing enabled: otlp={otlp_endpoint or 'off'}, console={'on' if console else 'off'}"
    )
    return True


def memory_metrics() -> Dict[str, float]:
    """Process and system memory snapshot; empty when psutil is missing."""
    if not psutil:
        return {}

    try:
        process = psutil.Process()
        system_memory = psutil.virtual_memory()
        return {
            "process_memory_mb": process.memory_info().rss / 1024 / 1024,
            "process_memory_percent": process.memory_percent(),
            "system_memory_percent": system_memory.percent,
        }
    except Exception as e:
        logger.error(f"Error getting memory metrics: {e}")
        return {}


def _set_attributes(span, attributes: Dict[str, Any], prefix: str = "treedist.") -> None:
    for key, value in attributes.items():
        if value is None:
            continue
        # OpenTelemetry only accepts primitive attribute values
        if not isinstance(value, (str, int, float, bool)):
            value = str(value)
        span.set_attribute(f"{prefix}{key}", value)


@contextmanager
def traced_operation(name: str, **attributes) -> Iterator[Any]:
    """
    Run a block inside a span.

    Failures set ERROR status and record the exception before it
    propagates; memory metrics and elapsed time are attached on exit.

    Yields:
        The active span; callers may add attributes to it
    """
    tracer = trace.get_tracer(SERVICE_NAME, SERVICE_VERSION)
    start = time.perf_counter()
    with tracer.start_as_current_span(name) as span:
        _set_attributes(span, attributes)
        try:
            yield span
            span.set_status(Status(StatusCode.OK))
        except Exception as e:
            span.set_status(Status(StatusCode.ERROR, str(e)))
            span.record_exception(e)
            raise
        finally:
            if span.is_recording():
                _set_attributes(span, memory_metrics(), prefix="process.")
                span.set_attribute("treedist.elapsed_ms", (time.perf_counter() - start) * 1000)
