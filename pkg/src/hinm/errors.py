"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, shape/file problems with 3, and search-space guards with 4.
"""


class HiNMError(Exception):
    """Base class for all library-specific errors."""


class DimensionError(HiNMError, ValueError):
    """A matrix shape is incompatible with the configured block sizes."""


class BudgetError(HiNMError, ValueError):
    """The vector keep budget cannot be expressed in whole N:M groups."""


class GroupingError(HiNMError, ValueError):
    """Survivor count of a tile is not a multiple of the group size."""


class CapacityError(HiNMError, ValueError):
    """A sampling or union operation violates a partition's capacity."""


class CountError(HiNMError, ValueError):
    """Sample count does not match clusters times cluster size."""


class ShapeMismatch(HiNMError, ValueError):
    """Two matrices that must agree in shape do not."""


class NegativeScore(HiNMError, ValueError):
    """A saliency file contains negative scores."""


class InvariantViolation(HiNMError, ValueError):
    """A mask pair or encoding does not satisfy its structural invariants."""


class FormatError(HiNMError, ValueError):
    """A binary matrix file is malformed (bad magic, version, or size)."""


class SizeGuard(HiNMError, RuntimeError):
    """An exhaustive enumeration would exceed the configured search bound."""


# Exit codes used by the command line front end.
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SHAPE = 3
EXIT_GUARD = 4


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code contract."""
    if isinstance(exc, SizeGuard):
        return EXIT_GUARD
    if isinstance(exc, (ShapeMismatch, NegativeScore, FormatError, OSError, IndexError)):
        return EXIT_SHAPE
    if isinstance(exc, (DimensionError, BudgetError, GroupingError, ValueError, KeyError)):
        return EXIT_CONFIG
    return EXIT_CONFIG
