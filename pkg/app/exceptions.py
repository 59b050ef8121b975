"""
Exception hierarchy for BivQFT

Every error carries the process exit code the CLI reports for it.
"""


class BivQFTError(Exception):
    """Base class for all library errors"""

    exit_code = 1


class InvalidInputError(BivQFTError, ValueError):
    """Input violates a documented precondition"""

    exit_code = 2


class GridMismatchError(InvalidInputError):
    """Two frequency grids (or a grid and a signal) disagree"""


class NonphysicalDensityError(InvalidInputError):
    """Quaternion density whose vector part exceeds its scalar part"""


class MalformedFileError(InvalidInputError):
    """CSV input that cannot be parsed or fails row validation"""


class NumericalFailureError(BivQFTError, ArithmeticError):
    """Computation produced a result that cannot be trusted"""

    exit_code = 3
