"""
Exceptions

Error hierarchy shared by every module of the package. The CLI maps
ConfigError to exit code 2 and every other ToeplitzError to exit code 1.
"""


class ToeplitzError(Exception):
    """Base class for all package errors."""


class DomainError(ToeplitzError, ValueError):
    """An argument violates an operation's precondition."""


class OnCurveError(DomainError):
    """Lambda lies on the symbol curve, so winding and index are undefined."""

    def __init__(self, lam, distance):
        self.lam = lam
        self.distance = distance
        super().__init__(f"lambda={lam} lies on the symbol curve (distance {distance:.3e})")


class WindingMismatchError(ToeplitzError):
    """Root-count winding disagrees with the curve winding."""

    def __init__(self, lam, root_winding, curve_winding):
        self.lam = lam
        self.root_winding = root_winding
        self.curve_winding = curve_winding
        super().__init__(
            f"winding mismatch at lambda={lam}: roots give {root_winding}, "
            f"curve gives {curve_winding}"
        )


class NearSingularError(ToeplitzError):
    """Matrix is singular to working precision where an inverse is needed."""


class SingularMatrixError(NearSingularError):
    """Linear solve on a matrix whose condition number exceeds 1/eps."""


class EigensolverError(ToeplitzError):
    """Dense eigen or singular value decomposition failed to converge."""


class MatrixParseError(ToeplitzError, ValueError):
    """An ingested matrix file could not be parsed.

    Args:
        message (str): What went wrong
        row (int, optional): 1-based row of the offending entry
        col (int, optional): 1-based column of the offending entry
    """

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", col {col})" if col is not None else ")")
        super().__init__(message + where)


class ConfigError(ToeplitzError):
    """Invalid experiment configuration or command-line arguments."""
