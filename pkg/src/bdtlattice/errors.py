"""Exception hierarchy shared by every module.

Each concrete class carries an ``exit_code`` so the command line front end
can map domain failures to distinct process exit statuses.
"""

from __future__ import annotations


class BdtError(Exception):
    """Base class for all domain errors raised by :mod:`bdtlattice`."""

    exit_code = 10


# ingestion -----------------------------------------------------------------

class DataError(BdtError):
    exit_code = 20


class CsvParseError(DataError):
    exit_code = 21

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(DataError):
    exit_code = 22


class OrderingError(DataError):
    exit_code = 23


class SanityRangeError(DataError):
    exit_code = 24


class ExtrapolationError(DataError):
    exit_code = 25


class ZeroValueError(DataError):
    """A zero observation makes the simple return undefined."""

    exit_code = 26


# model ----------------------------------------------------------------------

class DegenerateProbabilityError(BdtError):
    exit_code = 30


class CalibrationInfeasibleError(BdtError):
    exit_code = 31


class LatticeIndexError(BdtError, IndexError):
    exit_code = 32


class ProbabilityRangeError(BdtError):
    """Risk-neutral probability left [0, 1]; ``node`` is ``(n, k)`` when known."""

    exit_code = 33

    def __init__(self, value: float, node: tuple[int, int] | None = None):
        self.value = value
        self.node = node
        where = f" at node {node}" if node is not None else ""
        super().__init__(f"risk-neutral probability {value!r} outside [0, 1]{where}")


class OracleSizeError(BdtError):
    exit_code = 34


# inversion ------------------------------------------------------------------

class UnattainablePriceError(BdtError):
    exit_code = 40

    def __init__(self, target: float, low: float, high: float):
        self.target, self.low, self.high = target, low, high
        super().__init__(
            f"target price {target!r} outside attainable bracket [{low!r}, {high!r}]"
        )


class NonIdentifiableError(BdtError):
    exit_code = 41


class IndeterminateSigmaError(BdtError):
    exit_code = 42


class NumericDomainError(BdtError):
    exit_code = 43


class WrongBranchError(BdtError):
    exit_code = 44

    def __init__(self, message: str, roots: tuple[float, float]):
        self.roots = roots
        super().__init__(f"{message}; roots={roots!r}")
