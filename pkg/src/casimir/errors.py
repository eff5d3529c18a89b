"""Exception types shared by the engine and the CLI."""


class CasimirError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CasimirError, ValueError):
    """Argument outside the domain where a quantity is defined."""


class UnsupportedModelError(CasimirError):
    """Operation not available for the given material or mirror model."""


class FormatError(CasimirError, ValueError):
    """Malformed tabulated data or configuration text."""


class ValidityError(CasimirError, ValueError):
    """Input is well formed but physically invalid (e.g. negative loss)."""


class InsufficientDataError(CasimirError, ValueError):
    """Too few samples to build a tabulated model."""


class ConfigError(CasimirError, ValueError):
    """Invalid run configuration."""
