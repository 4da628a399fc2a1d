"""Exception types shared across the package."""


class DynwalkError(Exception):
    """Base class for all errors raised by dynwalk."""


class InvalidDelta(DynwalkError):
    pass


class EmptyGraph(DynwalkError):
    pass


class UnknownVertex(DynwalkError, KeyError):
    pass


class ParseError(DynwalkError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfLoop(ParseError):
    pass


class StaleCorpus(DynwalkError):
    pass


class MissingVertex(DynwalkError, KeyError):
    pass


class TooFewVertices(DynwalkError):
    pass


class EmptyDataset(DynwalkError):
    pass


class IncompatibleCombo(DynwalkError, ValueError):
    pass


class DatasetNotFound(DynwalkError, FileNotFoundError):
    pass


class DegenerateClass(UserWarning):
    """A class had no positive training examples; it will never be predicted."""
