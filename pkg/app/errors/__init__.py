"""
Exception hierarchy shared by every stage of the verifier.

Each stage raises a subclass of `VerifierError`; `app.errors.handlers` maps
them onto command-line exit codes and log levels. Errors carry enough context
(source location, stage name, artifact paths) to be reported without a
traceback.
"""


class VerifierError(Exception):
    """Base class for all expected verifier failures."""

    exit_code = 4

    def __init__(self, message):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return self.message


class ParseError(VerifierError):
    """
    Raised by the frontend when source text does not follow the grammar.

    Attributes:
        line (int): 1-based line of the offending token, if known.
        col (int): 1-based column of the offending token, if known.
    """

    exit_code = 3

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} at line {line}:{col}"
        super().__init__(message)


class SortError(VerifierError):
    """Raised when a term, atom or command does not respect declared sorts."""

    exit_code = 3


class ArityError(SortError):
    """Raised when an atom or template has the wrong number of arguments."""


class EvaluationError(VerifierError):
    """Raised by `evaluate` on unbound variables or uninterpreted symbols."""


class LoweringError(VerifierError):
    """Raised when a formula leaves the two-variable fragment during lowering."""


class NormalizationError(VerifierError):
    """Raised when a formula cannot be brought into Scott normal form."""


class EncodingError(VerifierError):
    """Raised by the CNF encoder on malformed input."""


class ResourceLimitError(VerifierError):
    """
    Raised when an enumeration would exceed a configured cap.

    Attributes:
        count (int): The size of the space that was refused.
    """

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class SolverTimeout(VerifierError):
    """
    Raised when the time budget runs out.

    Attributes:
        stage (str): The stage that was running.
        last_size (int): The largest universe size whose instance was decided.
    """

    exit_code = 2

    def __init__(self, message, stage='solve', last_size=None):
        super().__init__(message)
        self.stage = stage
        self.last_size = last_size


class InflationError(VerifierError):
    """Raised when a program cannot be replicated by `inflate`."""

    exit_code = 3


class InternalCheckError(VerifierError):
    """Raised when a self-check (model re-validation, assignment check) fails."""


class StageError(VerifierError):
    """
    Wraps an unexpected exception raised inside a pipeline stage.

    Attributes:
        stage (str): Name of the failing stage.
        cause (BaseException): The original exception.
        artifacts (list): Paths of dumps written for post-mortem inspection.
    """

    def __init__(self, stage, cause, artifacts=None):
        self.stage = stage
        self.cause = cause
        self.artifacts = list(artifacts or [])
        message = f"stage '{stage}' failed: {cause}"
        if self.artifacts:
            message += f" (artifacts: {', '.join(self.artifacts)})"
        super().__init__(message)


__all__ = [
    'VerifierError',
    'ParseError',
    'SortError',
    'ArityError',
    'EvaluationError',
    'LoweringError',
    'NormalizationError',
    'EncodingError',
    'ResourceLimitError',
    'SolverTimeout',
    'InflationError',
    'InternalCheckError',
    'StageError',
]
