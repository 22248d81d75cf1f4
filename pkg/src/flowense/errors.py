"""Exception hierarchy.

``DataError`` covers everything wrong with user-supplied inputs (missing
files, malformed schemas, empty tables) and carries a stable machine-readable
``code``. ``PipelineError`` marks a failed experiment stage. The CLI maps
DataError to exit code 2 and PipelineError (or anything unexpected) to 3.
"""


class FlowenseError(Exception):
    """Base class for all package errors."""


class DataError(FlowenseError):
    """Invalid input data or schema; carries a stable error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class PipelineError(FlowenseError):
    """An experiment stage failed; partial artifacts may exist."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
