"""Exception types shared across the package."""


class IngbError(Exception):
    """Base class for all errors raised by ingb."""


class ContractError(IngbError, ValueError):
    """A precondition or flag value was violated by the caller."""


class DataFormatError(IngbError, ValueError):
    """Input data could not be parsed."""
