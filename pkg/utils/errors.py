"""Exception hierarchy shared by services and command handlers."""
from typing import Optional


class SchemeKitError(Exception):
    """Base class for every error the CLI reports as invalid input."""


class ParseError(SchemeKitError):
    """Malformed scheme, certificate, map spec or facts file."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.field = field
        super().__init__(str(self))

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
            if self.column is not None:
                where.append(f"column {self.column}")
        if self.field:
            where.append(f"field '{self.field}'")
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message


class WordSyntaxError(ParseError):
    """Bad free-group word literal."""


class ValidationFailed(SchemeKitError):
    def __init__(self, label: str, report):
        self.label = label
        self.report = report
        super().__init__(f"{label} violates {len(report.violations)} invariant(s)")


class RankMismatch(SchemeKitError):
    pass


class EigenvalueError(SchemeKitError):
    """Eigenvalues outside 0 < |lambda| < 1 < |mu|."""


class DegenerateModulus(SchemeKitError):
    pass


class NoFiniteOrder(SchemeKitError):
    pass


class FiniteDifferenceMismatch(SchemeKitError):
    pass


class NonHyperbolic(SchemeKitError):
    pass


class FixtureError(SchemeKitError):
    pass


class NonPartitioningPairing(SchemeKitError):
    pass
