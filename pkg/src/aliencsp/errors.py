"""Exception hierarchy shared by all modules."""


class AlienCSPError(Exception):
    """Base class for every error raised by this package."""


class FormatError(AlienCSPError, ValueError):
    """A serialized document could not be turned into a valid object."""

    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if line is not None:
            where = f"line {line}: "
        if path:
            where += f"at {path}: "
        super().__init__(where + message)


class MalformedDocument(FormatError):
    pass


class ArityMismatch(FormatError):
    pass


class UnknownSymbol(FormatError):
    pass


class DomainBoundViolation(FormatError):
    pass


class NameClash(FormatError):
    pass


class PreconditionError(AlienCSPError, ValueError):
    """An operation was called on input outside its documented precondition."""


class BudgetExceeded(AlienCSPError):
    """An enumeration or search ran past its configured budget."""
