"""Exception types shared across the toolkit."""


class SbcheckError(Exception):
    """Base class for every error raised by this package."""


class SourceError(SbcheckError):
    """An error tied to a position in some piece of source text."""

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        if line is None:
            super().__init__(message)
        else:
            super().__init__(f"{line}:{col}: {message}")


class FormulaError(SourceError):
    """Syntax or type error in a constraint formula."""


class CtlError(SourceError):
    """Syntax error in a CTL formula, or an atom that does not fit the model."""


class ModelFileError(SourceError):
    """Syntax or semantic error in a model file."""


class ModelError(SbcheckError):
    """Semantic violation while building or using a model in memory."""
