"""Exception hierarchy shared by all modules."""


class LadderError(Exception):
    """Base class for every error raised by this package."""


class ModelError(LadderError, ValueError):
    """A resonator or branch parameter violates its invariants."""


class ResonanceNotFoundError(LadderError):
    """A branch extremum was not bracketed inside the scan range."""

    def __init__(self, branch, message):
        self.branch = branch
        super().__init__(f"branch {branch!r}: {message}")


class SingularNetworkError(LadderError, ArithmeticError):
    """The two-port conversion hit a zero or non-finite denominator."""

    def __init__(self, index, frequency=None):
        self.index = index
        self.frequency = frequency
        where = f"frequency index {index}"
        if frequency is not None:
            where += f" ({frequency:.6g} Hz)"
        super().__init__(f"singular network at {where}")


class MetricsError(LadderError):
    """A filter metric could not be extracted from a sweep."""


class NoPassbandError(MetricsError):
    pass


class BandEdgeError(MetricsError):
    pass


class FitError(LadderError):
    pass


class InsufficientPeaksError(FitError):
    def __init__(self, requested, found):
        self.requested = requested
        self.found = list(found)
        listing = ", ".join(f"{f / 1e9:.6g} GHz" for f in self.found) or "none"
        super().__init__(
            f"insufficient peaks: requested {requested} branches, found {len(self.found)} ({listing})"
        )


class ParseError(LadderError, ValueError):
    """A file could not be parsed; carries a 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        self.reason = message
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)


class SchemaError(ParseError):
    """A design or spec document is structurally valid JSON but fails validation."""

    def __init__(self, message, path=(), line=None, column=None):
        self.path = tuple(path)
        where = "/".join(str(p) for p in self.path)
        if where:
            message = f"at '{where}': {message}"
        super().__init__(message, line=line, column=column)
