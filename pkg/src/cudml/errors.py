"""Exception types raised by the cudml package.

Every error deriving from :class:`CudmlError` signals a contract violation
or a degenerate input; callers that orchestrate many estimations (the
simulation harness, the CLI) catch the base class and turn it into a
failure record or an exit code.
"""


class CudmlError(Exception):
    """Base class for all cudml errors."""


# --- data ingestion ---------------------------------------------------------

class MissingColumn(CudmlError):
    """A named CSV column is absent from the header."""


class ParseError(CudmlError):
    """A CSV cell could not be parsed as a number."""


class InvalidTreatment(CudmlError):
    """A treatment value is outside {0, 1}."""


# --- partitioning / sampling ------------------------------------------------

class InvalidK(CudmlError):
    """Fold count outside the valid range [2, n]."""


class EmptyResult(CudmlError):
    """An undersampling draw left no observations at all."""


# --- learners ----------------------------------------------------------------

class SingleClass(CudmlError):
    """Classification training data contains only one class."""


class TooFewRows(CudmlError):
    """Not enough training rows for the requested leaf size."""


class DimensionMismatch(CudmlError):
    """Prediction input has a different column count than the training data."""


# --- estimation ---------------------------------------------------------------

class PropensityOutOfRange(CudmlError):
    """A propensity given to the score function is not strictly inside (0, 1)."""


class NoControls(CudmlError):
    """The sample contains no control observations."""


class NoTreated(CudmlError):
    """The sample contains no treated observations."""


class OutOfRange(CudmlError):
    """A numeric argument is outside its admissible range."""


class DegenerateFold(CudmlError):
    """A cross-fitting training complement lacks treated or control rows."""


class ZeroWeightSum(CudmlError):
    """An inverse-propensity weight group sums to zero and cannot be normalized."""


class TooFewScores(CudmlError):
    """Fewer than two scores; no variance can be estimated."""


class EmptyInput(CudmlError):
    """An aggregation operation received no data."""
