import logging

import click
import sentry_sdk

from app.errors import VerifierError, ParseError, SortError, SolverTimeout

logger = logging.getLogger(__name__)

EXIT_VALID = 0
EXIT_INVALID = 1
EXIT_TIMEOUT = 2
EXIT_USAGE = 3
EXIT_INTERNAL = 4

_VERDICT_CODES = {
    'valid': EXIT_VALID,
    'invalid': EXIT_INVALID,
    'timeout': EXIT_TIMEOUT,
}


def exit_code_for(outcome):
    """
    Maps a verdict or an exception onto the command-line exit code.

    Args:
        outcome: A `Verdict` (anything with a `status` whose value is
                 'valid', 'invalid' or 'timeout') or an exception.

    Returns:
        int: 0 Valid, 1 Invalid, 2 Timeout, 3 usage/parse/sort errors, 4 internal errors.
    """
    status = getattr(outcome, 'status', None)
    if status is not None and not isinstance(outcome, BaseException):
        key = getattr(status, 'value', status)
        return _VERDICT_CODES.get(str(key).lower(), EXIT_INTERNAL)
    if isinstance(outcome, click.UsageError):
        return EXIT_USAGE
    if isinstance(outcome, VerifierError):
        return outcome.exit_code
    if isinstance(outcome, (FileNotFoundError, IsADirectoryError)):
        return EXIT_USAGE
    return EXIT_INTERNAL


def handle_error(error, log=None):
    """
    Logs a failure and returns the exit code the process should end with.

    Expected failures (bad input, timeouts) are logged as warnings without a
    traceback. Anything else is logged with `logger.exception` and, when Sentry
    is configured, reported there as well.

    Args:
        error (BaseException): The exception that ended the run.
        log (logging.Logger, optional): Logger to use; defaults to this module's logger.

    Returns:
        int: The exit code for `error`.
    """
    log = log or logger
    code = exit_code_for(error)
    if isinstance(error, (ParseError, SortError, click.UsageError, FileNotFoundError)):
        log.warning(f"Input error: {error}")
    elif isinstance(error, SolverTimeout):
        log.warning(f"Timeout in stage '{error.stage}' (last size {error.last_size}): {error}")
    elif isinstance(error, VerifierError) and code != EXIT_INTERNAL:
        log.warning(f"Verification stopped: {error}")
    else:
        log.exception(f"Internal error: {error}")
        sentry_sdk.capture_exception(error)
    return code
