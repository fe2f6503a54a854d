"""Logging configuration using structlog."""
import logging
import sys
import structlog
from typing import Optional
from structlog.types import FilteringBoundLogger

from app.config import settings


def configure_logging(debug: Optional[bool] = None) -> None:
    """Configure structlog for the application and the CLI."""

    if debug is None:
        debug = settings.DEBUG

    # Determine log level based on DEBUG setting
    log_level = logging.DEBUG if debug else logging.INFO

    # Configure standard library logging
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=log_level,
    )

    if debug or not settings.LOG_JSON:
        renderer = structlog.dev.ConsoleRenderer()
    else:
        renderer = structlog.processors.JSONRenderer()

    structlog.configure(
        processors=[
            # Add log level to event dict
            structlog.stdlib.add_log_level,
            # Add timestamp
            structlog.processors.TimeStamper(fmt="iso"),
            # Add context bound with bind_contextvars (command, record id, ...)
            structlog.contextvars.merge_contextvars,
            # Format stack traces
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(log_level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> FilteringBoundLogger:
    """Get a configured logger instance."""
    return structlog.get_logger(name)
