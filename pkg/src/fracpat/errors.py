"""Exception hierarchy shared by all modules."""


class FracpatError(Exception):
    """Base class for library errors."""


class ParameterError(FracpatError, ValueError):
    """An argument is outside its admissible range."""


class ResolutionError(ParameterError):
    """A grid is too coarse for the requested construction."""


class PreconditionError(FracpatError, ValueError):
    """A mathematical hypothesis of a construction does not hold for the input."""


class NotFoundError(FracpatError, LookupError):
    """A search over a finite family came back empty."""


class AccuracyError(FracpatError, ArithmeticError):
    """A quadrature cannot certify the requested accuracy."""


class DivergenceError(FracpatError, ArithmeticError):
    """The requested integral is not finite."""


class StageError(FracpatError, RuntimeError):
    """A pipeline stage failed; carries the stage name and the underlying cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
