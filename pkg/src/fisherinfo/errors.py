"""Exception hierarchy shared by every module in the package."""


class FisherInfoError(Exception):
    """Base class for all package errors."""


class GridError(FisherInfoError, ValueError):
    """Invalid grid specification."""


class InvalidDensity(FisherInfoError, ValueError):
    """Values violate a density invariant (negative values, bad mass, ...)."""


class SupportTooNarrow(InvalidDensity):
    """The grid truncates the density: boundary values exceed the tail floor."""


class GridMismatch(FisherInfoError, ValueError):
    """Two densities live on grids with different steps."""


class ZeroScale(FisherInfoError, ValueError):
    pass


class DegenerateDensity(FisherInfoError, ArithmeticError):
    """Too little of the grid carries usable density to form a score."""


class SolverFailed(FisherInfoError, RuntimeError):
    pass


class TSweepTooShort(FisherInfoError, ValueError):
    pass


class InsufficientSamples(FisherInfoError, ValueError):
    pass


class ParseError(FisherInfoError):
    """Malformed configuration text."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(FisherInfoError):
    """Configuration violates one or more invariants; all are listed."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
