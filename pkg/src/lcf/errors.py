"""Exception types raised across the package."""


class LCFError(Exception):
    """Base class for all errors raised by :mod:`lcf`."""


class MalformedRowError(LCFError, ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateInteractionError(LCFError, ValueError):
    def __init__(self, line, user, item):
        super().__init__(f"line {line}: duplicate interaction ({user!r}, {item!r})")
        self.line = line


class EmptyDatasetError(LCFError, ValueError):
    pass


class ExposureError(LCFError, ValueError):
    """Exposure sets are inconsistent with the dataset or missing an item."""


class UndefinedCTRError(LCFError, ZeroDivisionError):
    pass


class UndefinedRatioError(LCFError, ZeroDivisionError):
    pass


class UnsupportedExposureError(LCFError, TypeError):
    pass


class InsufficientDataError(LCFError, ValueError):
    pass


class DegenerateDistributionError(LCFError, ValueError):
    pass


class DegenerateSplitError(LCFError, ValueError):
    pass


class ItemLookupError(LCFError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""
