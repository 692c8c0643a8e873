"""Exception hierarchy shared across the package."""


class FpselectError(Exception):
    """Base class for all errors raised by fpselect."""


class SchemaError(FpselectError):
    """A dataset, catalog, or PMF file violates its documented schema."""


class ConfigError(FpselectError):
    """A parameter or run configuration is invalid or unsatisfiable."""
