class AlloyRemError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParams(AlloyRemError, ValueError):
    pass


class DiscriminantNegative(AlloyRemError, ValueError):
    pass


class NotStableRegime(AlloyRemError):
    pass


class NotCovered(AlloyRemError):
    """No limit theorem covers the requested (params, beta) point."""


class UnsupportedAlpha(AlloyRemError, ValueError):
    pass


class BudgetExceeded(AlloyRemError):
    pass


class RegimeMismatch(AlloyRemError):
    pass


class DegenerateTail(AlloyRemError, ValueError):
    pass


class ConfigError(AlloyRemError, ValueError):
    pass
