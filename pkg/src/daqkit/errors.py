"""Exception types raised across the package."""

from __future__ import annotations


class DaqkitError(Exception):
    """Base class for all package errors."""


class MissingParameter(DaqkitError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"no value supplied for parameter '{self.name}'"


class DomainError(DaqkitError, ValueError):
    pass


class ParameterConflict(DaqkitError, ValueError):
    """Two parameters share a name but disagree on kind or value."""


class OverlappingSupport(DaqkitError, ValueError):
    pass


class EmptyComposition(DaqkitError, ValueError):
    pass


class DuplicateQubit(DaqkitError, ValueError):
    pass


class InvalidGate(DaqkitError, ValueError):
    pass


class InvalidSpacing(DaqkitError, ValueError):
    pass


class EmptyRegister(DaqkitError, ValueError):
    pass


class CoincidentAtoms(DaqkitError, ValueError):
    pass


class StrengthLengthMismatch(DaqkitError, ValueError):
    pass


class NonHermitianCoefficient(DaqkitError, ValueError):
    pass


class NonIsingGenerator(DaqkitError, ValueError):
    pass


class SingularTransform(DaqkitError, ValueError):
    pass


class UnsupportedStrategy(DaqkitError, ValueError):
    pass


class NonUnitaryBlockInCircuit(DaqkitError, ValueError):
    pass


class TooManyQubitsForDense(DaqkitError, ValueError):
    pass


class BadBitstring(DaqkitError, ValueError):
    pass


class NonHermitianObservable(DaqkitError, ValueError):
    pass


class NonHermitianGenerator(DaqkitError, ValueError):
    pass


class IllConditionedShifts(DaqkitError, ArithmeticError):
    pass


class UnsupportedDerivative(DaqkitError, ValueError):
    """The requested differentiation mode cannot handle this circuit."""


class AnalogBlockInAdjoint(UnsupportedDerivative):
    pass


class NaNLoss(DaqkitError, FloatingPointError):
    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


class EmbeddingNotConverged(UserWarning):
    pass
