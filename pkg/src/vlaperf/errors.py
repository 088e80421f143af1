"""Exception types shared across the toolkit."""


class VlaperfError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(VlaperfError, ValueError):
    """An argument or data value violates a documented precondition."""


class CatalogError(VlaperfError, ValueError):
    """A catalog file failed schema validation.

    The message names the offending file, entry, and field.
    """


class CalibrationError(VlaperfError, ValueError):
    """A measured latency cannot be reconciled with the roofline lower bound."""
