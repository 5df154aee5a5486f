"""Exception types shared across the package."""


class BandselError(Exception):
    """Base class for all bandsel errors."""


class InvalidArgumentError(BandselError, ValueError):
    """An argument violates a documented precondition."""


class NotOvercompleteError(InvalidArgumentError):
    """Dictionary construction needs fewer sampled pixels than bands."""


class DegenerateInputError(BandselError, ValueError):
    """Input is degenerate for the requested statistic (e.g. zero variance)."""


class InsufficientClassSamplesError(InvalidArgumentError):
    """A class does not have enough labeled pixels for the requested split."""


class CorruptFileError(BandselError, IOError):
    """File payload is missing, truncated, or inconsistent with its header."""


class UnsupportedFormatError(BandselError, IOError):
    """File declares a layout or data type outside the supported subset."""


class InvalidDataError(BandselError, ValueError):
    """Loaded values are unusable (NaN or infinity in the payload)."""
