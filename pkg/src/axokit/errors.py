"""Exception types shared across the toolkit.

The CLI maps these onto distinct exit codes, so raise the most specific
class available.
"""


class AxokitError(Exception):
    """Base class for all toolkit errors."""


class InvalidOperatorError(AxokitError):
    """Operator family/width combination that the model does not support."""


class CapacityError(AxokitError):
    """A request that would enumerate or simulate past the configured guards."""


class DuplicateConfigError(AxokitError):
    """A dataset or config sequence contains the same configuration twice."""


class SchemaError(AxokitError):
    """A file does not match its documented schema (CSV, model, run config)."""


class ModelFormatError(SchemaError):
    """A model file failed version, structure, or checksum validation."""


class WidthMismatchError(AxokitError):
    """Bit-widths of a model, config, or dataset do not line up."""
