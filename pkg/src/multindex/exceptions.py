"""Exception hierarchy.

Every error raised deliberately by the package derives from :class:`MultindexError`.
Indices carried by errors are zero-based.
"""

from __future__ import annotations

from typing import Any, Sequence


class MultindexError(Exception):
    """Base class for all package errors."""


class ValidationError(MultindexError, ValueError):
    """Input data violates a dataset rule."""


class DimensionMismatch(ValidationError):
    def __init__(self, message: str = "price and quantity matrices have different shapes"):
        super().__init__(message)


class NonPositivePrice(ValidationError):
    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"price[{i}, {j}] = {value!r} is not strictly positive")


class NegativeQuantity(ValidationError):
    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"quantity[{i}, {j}] = {value!r} is negative")


class EmptyCommodityRow(ValidationError):
    def __init__(self, i: int):
        self.i = i
        super().__init__(f"commodity row {i} has no positive quantity")


class EmptyCountryColumn(ValidationError):
    def __init__(self, j: int):
        self.j = j
        super().__init__(f"country column {j} has no positive quantity")


class ParseError(MultindexError, ValueError):
    """Malformed CSV input. ``line`` and ``column`` are one-based, as in editors."""

    def __init__(self, path: str, line: int, column: int, message: str):
        self.path, self.line, self.column = path, line, column
        super().__init__(f"{path}:{line}:{column}: {message}")


class UnsupportedMethod(MultindexError, ValueError):
    def __init__(self, method: Any, where: str = ""):
        self.method = method
        suffix = f" by {where}" if where else ""
        super().__init__(f"method {method!s} is not supported{suffix}")


class Disconnected(MultindexError):
    """The quantity matrix is not connected; no unique solution exists."""

    def __init__(self, report: Any):
        self.report = report
        comps = getattr(report, "country_components", None)
        super().__init__(f"quantity matrix is disconnected; country components: {comps}")


class NoConvergence(MultindexError):
    def __init__(self, iterations: int, history: Sequence[float] = (), message: str = ""):
        self.iterations = iterations
        self.history = list(history)
        msg = message or f"no convergence after {iterations} iterations"
        if self.history:
            msg += f" (last changes: {', '.join(f'{h:.3g}' for h in self.history[-5:])})"
        super().__init__(msg)


class TransformDomain(MultindexError, ArithmeticError):
    """A transform was applied outside the positive reals."""


class IncompatibleTriplet(MultindexError):
    def __init__(self, report: Any):
        self.report = report
        super().__init__(f"DAD triplet fails the compatibility condition: {report.violating_sets}")


class ScaleMismatch(MultindexError, ValueError):
    def __init__(self, total_c: float, total_d: float):
        self.total_c, self.total_d = total_c, total_d
        super().__init__(f"sum(c) = {total_c!r} differs from sum(d) = {total_d!r}")


class TooLarge(MultindexError, ValueError):
    """Instance exceeds the size cap of an exhaustive oracle."""


class ZeroQuantityUnderInteriorPreference(MultindexError, ValueError):
    def __init__(self, family: Any, i: int, j: int):
        self.family, self.i, self.j = family, i, j
        super().__init__(
            f"{family!s} demand is undefined for quantity[{i}, {j}] = 0; "
            "use LEONTIEF or a strictly positive dataset"
        )


class EigenvalueNotOne(MultindexError):
    """A converged eigenpair has eigenvalue different from one, so no PPPs are recovered."""

    def __init__(self, diagnostic: Any):
        self.diagnostic = diagnostic
        super().__init__(f"converged eigenvalue {diagnostic.lambda_estimate!r} is not 1; no solution emitted")
