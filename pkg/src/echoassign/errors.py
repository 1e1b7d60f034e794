"""Exception types raised across the package."""


class EchoAssignError(Exception):
    """Base class for all package errors."""


class EmptyNeighborhood(EchoAssignError):
    pass


class InvalidAssignment(EchoAssignError):
    pass


class LengthMismatch(EchoAssignError):
    pass


class InvalidAmplitudes(EchoAssignError):
    pass


class NonNormalized(EchoAssignError):
    pass


class MissingWeight(EchoAssignError):
    pass


class ZeroF0(EchoAssignError):
    pass


class WitnessNotFound(EchoAssignError):
    pass


class SingularConfusion(EchoAssignError):
    pass


class AllTied(EchoAssignError):
    pass


class EmptyCondition(EchoAssignError):
    pass


class InsufficientStates(EchoAssignError):
    pass


class InsufficientData(EchoAssignError):
    pass


class BudgetExceeded(EchoAssignError):
    pass
