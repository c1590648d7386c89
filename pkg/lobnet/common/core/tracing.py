from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.sdk.resources import Resource

from lobnet.common.core.config import settings
import logging

logger = logging.getLogger(__name__)

_tracing_initialized = False


def create_resource():

    return Resource(attributes={
        "service.name": settings.service_name,
        "service.version": settings.service_version,
        "service.environment": settings.environment,
    })


def setup_tracing() -> bool:
    """
    Install a tracer provider exporting to the OTLP collector.

    Without it every span opened through trace.get_tracer() is a no-op, which
    is the default for batch runs. Returns True when export is active.
    """
    global _tracing_initialized
    if _tracing_initialized or not settings.tracing_enabled:
        return _tracing_initialized
    _tracing_initialized = True

    from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter

    trace_provider = TracerProvider(resource=create_resource())
    otlp_exporter = OTLPSpanExporter(endpoint=settings.otlp_endpoint, insecure=True)
    trace_provider.add_span_processor(BatchSpanProcessor(otlp_exporter))
    trace.set_tracer_provider(trace_provider)

    logger.info(f"Tracing enabled, exporting to {settings.otlp_endpoint}")
    return True
