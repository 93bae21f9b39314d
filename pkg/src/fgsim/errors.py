"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class FgsimError(Exception):
    """Base class for all simulator errors."""


class InvalidArgument(FgsimError, ValueError):
    """Raised for malformed inputs (bad indices, angles, probabilities)."""


class InvalidState(FgsimError, ValueError):
    """Raised when an operation is not defined for the given state."""


class ResourceLimit(FgsimError, RuntimeError):
    """Raised when a configured size or rank budget would be exceeded."""

    def __init__(self, message, *, requested=None, limit=None):
        super().__init__(message)
        self.requested = requested
        self.limit = limit


class ValidationError(InvalidArgument):
    """Semantic error in a circuit description, tagged with the element index."""

    def __init__(self, message, *, element=None):
        if element is not None:
            message = f"element {element}: {message}"
        super().__init__(message)
        self.element = element


class ParseError(InvalidArgument):
    """Malformed JSON input, with the position reported by the decoder."""

    def __init__(self, message, *, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
