"""Exception hierarchy. All engine errors derive from TokenSieveError so the
CLI can map them to exit status 1 (I/O failures stay OSError, status 2)."""


class TokenSieveError(Exception):
    pass


class FormatError(TokenSieveError):
    """Malformed file content (bad magic, header, flags, payload size)."""


class ShapeError(TokenSieveError):
    """Array rank or dimension mismatch."""


class SizeError(TokenSieveError):
    """Value outside the supported size range (image too small, oracle too big)."""


class DomainError(TokenSieveError):
    """Numeric argument outside its mathematical domain."""


class ConfigError(TokenSieveError):
    """Invalid configuration value or unknown mode/flag."""


class ValidationError(TokenSieveError):
    """Content-level validation failure (non-finite data, schema violation)."""


class RangeError(TokenSieveError):
    """Integer result exceeds the supported 128-bit range."""
