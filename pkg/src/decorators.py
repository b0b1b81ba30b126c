"""Command decorators"""

import logging
import time
from functools import wraps

from .errors import InvalidConfigError, InvariantViolation, OutputError, SolverFailure, WaveguideError
from .utils import create_result, invalid_config, invariant_violation, io_error, solver_failure, success_result

logger = logging.getLogger(__name__)


def command_handler(f):
    """
    Run a command and turn its outcome into a result envelope

    The wrapped command returns (message, data). Toolkit errors are logged
    and mapped to their exit status; the envelope's payLoad carries the
    resolved descriptor.
    """
    @wraps(f)
    def decorated_function(descriptor, *args, **kwargs):
        command = descriptor.get("command", f.__name__)
        started = time.perf_counter()
        try:
            message, data = f(descriptor, *args, **kwargs)
            result = success_result(message, data, descriptor)
        except InvalidConfigError as e:
            logger.warning("Invalid configuration", extra={"command": command, "violations": e.violations})
            result = invalid_config(str(e), {"violations": e.violations})
        except SolverFailure as e:
            logger.error("Solver failure", extra={"command": command, "best_residual": e.best_residual})
            result = solver_failure(str(e), {"best_residual": e.best_residual})
        except InvariantViolation as e:
            logger.error("Invariant violation", extra={"command": command, "error": str(e)})
            result = invariant_violation(str(e))
        except OutputError as e:
            logger.error("Output error", extra={"command": command, "error": str(e)})
            result = io_error(str(e))
        except WaveguideError as e:
            logger.error("Run failed", extra={"command": command, "error": str(e)})
            result = create_result(e.exit_code, str(e))
        elapsed = time.perf_counter() - started
        logger.info("Command finished", extra={"command": command, "code": result[1],
                                                "elapsed_seconds": round(elapsed, 3)})
        limits = descriptor.get("time_limits_seconds")
        limit = limits.get(command) if isinstance(limits, dict) else None
        if isinstance(limit, (int, float)) and elapsed > limit:
            logger.warning("Command exceeded its desk-scale time limit",
                           extra={"command": command, "limit_seconds": limit})
        return result
    return decorated_function
