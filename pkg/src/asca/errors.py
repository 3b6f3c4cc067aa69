"""Exception types shared across the toolkit.

Everything raised on purpose derives from AscaError so the CLI can map
domain failures to a single exit code.
"""


class AscaError(Exception):
    """Base class for all domain errors."""


# audio I/O
class ParseError(AscaError):
    """Malformed RIFF/WAVE structure."""


class UnsupportedFormat(AscaError):
    """WAV codec or layout we do not handle."""


class EmptyAudio(AscaError):
    """File parsed fine but carries zero samples."""


class TooShort(AscaError):
    """Input shorter than the operation's minimum length."""


# DSP / features
class InvalidLength(AscaError):
    pass


class InvalidRange(AscaError):
    pass


class EmptyFrame(AscaError):
    pass


class ShapeError(AscaError):
    """Dimension mismatch between data and model/basis."""


# filters
class InvalidCutoff(AscaError):
    pass


# models
class EmptyDataset(AscaError):
    pass


class StratifyError(AscaError):
    """A class is too small to split."""


class DivergenceError(AscaError):
    """Training loss became non-finite."""


class ConvergenceWarning(UserWarning):
    """Optimizer hit its iteration cap; carried on the model, not fatal."""


# synthesis
class InvalidSpec(AscaError):
    pass


# harness
class IngestError(AscaError):
    pass


class LabelError(AscaError):
    pass


class FormatError(AscaError):
    """Bad model container (magic, version, kind, or truncation)."""
