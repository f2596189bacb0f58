"""Exception hierarchy shared by all prosobench modules."""


class ProsobenchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ProsobenchError):
    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class MissingTier(ProsobenchError):
    pass


class InvalidInterval(ProsobenchError):
    pass


class AlignmentError(ProsobenchError):
    pass


class SplitError(ProsobenchError):
    pass


class FitError(ProsobenchError):
    pass


class MissingAnnotation(ProsobenchError):
    pass


class FoldError(ProsobenchError):
    pass


class UnsupportedFormat(ProsobenchError):
    pass


class SignalTooShort(ProsobenchError):
    pass


class EmptyInput(ProsobenchError):
    pass


class UndefinedCorrelation(ProsobenchError):
    pass
