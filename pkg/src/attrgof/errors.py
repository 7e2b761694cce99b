"""Exception types raised across the package."""


class AttrGofError(Exception):
    """Base class for all package errors."""


class GraphValidationError(AttrGofError, ValueError):
    """Graph structure or attribute vector violates the data model."""


class EmptyGraphError(AttrGofError, ValueError):
    """Statistic requested on a graph with no edges."""


class DegenerateMarginError(AttrGofError, ValueError):
    """A contingency margin is zero, so phi is undefined."""


class DomainError(AttrGofError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ParseError(AttrGofError, ValueError):
    """Input file could not be parsed.

    ``line`` is the 1-based line number when known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class UnsupportedConstructError(ParseError):
    """GML input uses a construct outside the supported subset."""
