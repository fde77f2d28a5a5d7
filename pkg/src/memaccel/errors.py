"""Exception types shared across the package."""


class MemAccelError(Exception):
    pass


class BudgetExceeded(MemAccelError):
    """A table does not fit in the memory budget it was built against."""


class FormatMismatch(MemAccelError):
    pass


class SpecDigestMismatch(MemAccelError):
    """A table was built for a different code or quantization."""


class TruncatedFile(MemAccelError):
    pass


class ZeroMemory(MemAccelError, ZeroDivisionError):
    pass


class ZeroDenominator(MemAccelError, ZeroDivisionError):
    pass


class InvalidGraph(MemAccelError, ValueError):
    pass


class TooLarge(MemAccelError, ValueError):
    pass


class IndexOutOfRange(MemAccelError, IndexError):
    pass
