import logging
import sys

from lobnet.common.core.config import settings
from lobnet.common.core.tracing import create_resource

_logger_initialized = False


def _attach_otlp_log_handler(root_logger: logging.Logger) -> None:
    from opentelemetry._logs import set_logger_provider
    from opentelemetry.sdk._logs import LoggerProvider, LoggingHandler
    from opentelemetry.sdk._logs.export import BatchLogRecordProcessor
    from opentelemetry.exporter.otlp.proto.grpc._log_exporter import OTLPLogExporter

    logger_provider = LoggerProvider(resource=create_resource())
    set_logger_provider(logger_provider)

    otlp_exporter = OTLPLogExporter(endpoint=settings.otlp_endpoint, insecure=True)
    logger_provider.add_log_record_processor(BatchLogRecordProcessor(otlp_exporter))
    root_logger.addHandler(LoggingHandler(logger_provider=logger_provider))


def initialize_logger(level: str | None = None):
    global _logger_initialized
    if _logger_initialized:
        return logging.getLogger(__name__)
    _logger_initialized = True

    level = (level or settings.log_level).upper()

    # stdout carries command output, so logs go to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    console_handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.addHandler(console_handler)

    if settings.tracing_enabled:
        _attach_otlp_log_handler(root_logger)

    logger = logging.getLogger(__name__)
    logger.debug("Logger initialized with console output")

    return logger
