import functools
import logging
import time
from contextlib import contextmanager

from app.errors import VerifierError, StageError

logger = logging.getLogger(__name__)


def stage(name):
    """
    Decorator marking a function as a named pipeline stage.

    The decorated function accepts an extra keyword-only argument `timings`
    (a dict). When given, the elapsed wall time of the call is added under
    `name`. Start and finish are logged at INFO level. Exceptions that are
    not `VerifierError` subclasses are wrapped into `StageError(name, ...)`
    so callers always learn which stage failed.

    Args:
        name (str): Stage name used in logs, timings and error messages.

    Returns:
        function: The decorator.
    """
    def decorator(f):
        @functools.wraps(f)
        def decorated_function(*args, timings=None, **kwargs):
            logger.debug(f"stage {name}: start")
            start = time.perf_counter()
            try:
                result = f(*args, **kwargs)
            except VerifierError:
                raise
            except Exception as exc:
                logger.exception(f"stage {name}: unexpected failure")
                raise StageError(name, exc) from exc
            finally:
                elapsed = time.perf_counter() - start
                if timings is not None:
                    timings[name] = timings.get(name, 0.0) + elapsed
            logger.info(f"stage {name}: done in {elapsed:.3f}s")
            return result
        decorated_function.stage_name = name
        return decorated_function
    return decorator


@contextmanager
def stage_timer(name, timings=None):
    """
    Context-manager form of `stage` for inline blocks.

    Args:
        name (str): Stage name.
        timings (dict, optional): Receives the elapsed seconds under `name`.
    """
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        if timings is not None:
            timings[name] = timings.get(name, 0.0) + elapsed
        logger.debug(f"{name}: {elapsed:.3f}s")
