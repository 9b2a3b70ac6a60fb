"""Tracing of sizing, table and simulation runs through Logfire."""

from __future__ import annotations

import logging
from functools import wraps
from typing import Any, Callable

try:
    import logfire
    LOGFIRE_AVAILABLE = True
except ImportError:
    LOGFIRE_AVAILABLE = False

from .config import settings

logger = logging.getLogger(__name__)

_configured = False


def setup_logfire() -> bool:
    """Initialize Logfire with the token from config.

    Returns:
        True when spans will be exported
    """
    global _configured
    if not LOGFIRE_AVAILABLE:
        logger.debug("Logfire not installed, tracing disabled")
        return False

    if not settings.logfire_api_key:
        logger.debug("NB_LOGFIRE_TOKEN not configured, tracing disabled")
        return False

    try:
        logfire.configure(token=settings.logfire_api_key, service_name="nb-trials")
        _configured = True
        logger.info(f"✅ Logfire initialized ({settings.environment})")
    except Exception as e:
        logger.error(f"Failed to initialize Logfire: {e}")
    return _configured


def span_attributes(operation: str) -> dict[str, str]:
    """Attributes stamped on every span and simulation record."""
    return {"operation": operation, "environment": settings.environment}


def traced(operation: str) -> Callable:
    """Decorator that wraps a computation in a Logfire span.

    Args:
        operation: Span name suffix, e.g. "size_trial"

    Returns:
        Decorator function
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            if not (LOGFIRE_AVAILABLE and _configured):
                return func(*args, **kwargs)

            with logfire.span(f"nb_trials_{operation}", _level="info") as span:
                for key, value in span_attributes(operation).items():
                    span.set_attribute(key, value)
                try:
                    result = func(*args, **kwargs)
                except Exception as e:
                    span.set_attribute("status", "error")
                    logfire.error(f"{operation} failed: {e}")
                    raise
                span.set_attribute("status", "success")
                return result

        return wrapper
    return decorator


def log_simulation_report(label: str, report: dict[str, Any]) -> None:
    """Log a finished Monte Carlo run to Logfire.

    Args:
        label: Free-form description of the simulated configuration
        report: SimReport fields
    """
    if not (LOGFIRE_AVAILABLE and _configured):
        return

    try:
        logfire.info("simulation_finished", label=label, **span_attributes("monte_carlo"), **report)
    except Exception as e:
        logger.error(f"Failed to log simulation report to Logfire: {e}")
