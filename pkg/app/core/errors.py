from typing import Any, Optional


# -----------------------------------------------------------------------------
# ERRORS MODULE
# Purpose: one exception hierarchy for arithmetic, geometry, solver and I/O failures.
# Why: the CLI maps every failure to an exit code through `exit_code`.
# -----------------------------------------------------------------------------


class LGMirrorError(Exception):
    """Base class of every error raised by the package."""

    exit_code: int = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": {k: str(v) for k, v in self.details.items()},
        }


# =========================
# Input / model errors
# =========================
class ModelError(LGMirrorError):
    exit_code = 4


class ParseError(ModelError):
    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}", line=line, column=column)
        self.line = line
        self.column = column


class SizeBoundViolated(ModelError):
    def __init__(self, size, bound):
        super().__init__(
            f"blowup size {size} is not below the bound r = {bound}",
            size=size,
            bound=bound,
        )
        self.bound = bound


class DuplicateEpsilon(ModelError):
    pass


class OrderingError(ModelError):
    pass


class InadmissiblePerturbation(ModelError):
    pass


class OutOfRange(ModelError):
    pass


# =========================
# Arithmetic errors
# =========================
class ArithmeticFailure(LGMirrorError):
    pass


class ZeroInverse(ArithmeticFailure):
    pass


class Divergent(ArithmeticFailure):
    pass


class EmptySeries(ArithmeticFailure):
    pass


class NonUnitSubstitution(ArithmeticFailure):
    pass


class DegenerateLift(ArithmeticFailure):
    pass


# =========================
# Solver errors
# =========================
class SolverError(LGMirrorError):
    pass


class DegenerateConfiguration(SolverError):
    exit_code = 3


class SingularHessian(SolverError):
    pass


class NoProgress(SolverError):
    pass


class ContractionPreconditionFailed(SolverError):
    def __init__(self, condition: str, message: str):
        super().__init__(f"{condition}: {message}", condition=condition)
        self.condition = condition


class NotAnEdgeCase(SolverError):
    pass


class UnsupportedEdgeShape(SolverError):
    pass


class GenericityViolation(LGMirrorError):
    exit_code = 3


class VerificationFailure(LGMirrorError):
    exit_code = 2
