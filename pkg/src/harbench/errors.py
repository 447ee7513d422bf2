"""Exception types shared across the toolkit.

Every error raised by harbench derives from HarbenchError so CLI code can
catch one base class and map it to a nonzero exit code.
"""


class HarbenchError(Exception):
    """Base class for all harbench errors."""


class SchemaError(HarbenchError):
    """A log line or file does not have the expected column layout."""


class ParseError(HarbenchError):
    """A token could not be parsed as a finite number."""

    def __init__(self, message, *, path=None, line=None, token=None):
        super().__init__(message)
        self.path = path
        self.line = line
        self.token = token


class LabelRangeError(HarbenchError):
    """A label value is outside the 0..12 activity-code domain."""


class EmptyInputError(HarbenchError):
    """An operation received no input files or no rows."""


class EmptyDatasetError(HarbenchError):
    """A transform produced a dataset with zero rows."""


class DimensionMismatchError(HarbenchError):
    """Feature vector length differs from what a model was trained on."""


class DivergenceError(HarbenchError):
    """Iterative training produced a non-finite loss."""

    def __init__(self, message, *, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class FileFormatError(HarbenchError):
    """A binary file is not in the expected container layout."""


class VersionError(HarbenchError):
    """A container file was written with an unsupported format version."""


class TruncatedFileError(HarbenchError):
    """A container file ends before its declared payload."""


class ChecksumError(HarbenchError):
    """A container file's checksum does not match its contents."""


class ConfigError(HarbenchError):
    """A configuration file or flag combination is invalid."""
