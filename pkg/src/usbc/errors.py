"""Exception types raised across the package."""


class UsbcError(Exception):
    """Base class for all package errors."""


class CodebookSizeError(UsbcError, ValueError):
    """The Hadamard order cannot supply the requested balanced orthogonal rows."""


class LengthMismatchError(UsbcError, ValueError):
    """Two sequences that must align frame-by-frame have different lengths."""


class ConfigError(UsbcError, ValueError):
    """Invalid simulation configuration (bad key, value or combination)."""


class QuadratureError(UsbcError, ArithmeticError):
    """Numerical integration failed to reach the requested accuracy."""
