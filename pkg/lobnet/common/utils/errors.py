"""
Decorator mapping lobnet failures to CLI exit codes.

0 ok, 1 runtime failure, 2 usage/config error (click's own usage errors
already exit with 2).
"""
import logging
from functools import wraps
from typing import Any, Callable

import click
from pydantic import ValidationError

from lobnet.common.core.exceptions import ConfigError, LobnetError

logger = logging.getLogger(__name__)

EXIT_RUNTIME_FAILURE = 1
EXIT_USAGE = 2


def cli_errors(func: Callable) -> Callable:
    """Wrap a click command so domain errors exit with the documented codes."""
    @wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        try:
            return func(*args, **kwargs)
        except (ConfigError, ValidationError) as e:
            logger.error(f"Configuration error: {e}")
            raise click.UsageError(str(e))
        except LobnetError as e:
            logger.error(f"Run failed: {e}")
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_RUNTIME_FAILURE)

    return wrapper
