"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line: 2 for bad
input, 3 for a computation that is infeasible or degenerate on valid input.
"""


class LevelSetError(Exception):
    exit_code = 3


class InputError(LevelSetError, ValueError):
    exit_code = 2


class ComputationError(LevelSetError):
    exit_code = 3


class EmptyCloud(InputError):
    pass


class InvalidRadius(InputError):
    pass


class InvalidDimension(InputError):
    pass


class InvalidDelta(InputError):
    pass


class InvalidN(InputError):
    pass


class InvalidArgument(InputError):
    pass


class EmptyTarget(InputError):
    pass


class EmptySet(InputError):
    pass


class OffManifold(InputError):
    pass


class SpecValidationError(InputError):
    """A density spec failed validation; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class KTooLarge(ComputationError, ValueError):
    pass


class InfeasibleK(ComputationError):
    pass


class EmptyRange(ComputationError):
    pass


class DegenerateSample(ComputationError):
    pass


class DegenerateBeta(ComputationError):
    def __init__(self, message, d_hat_level=None):
        super().__init__(message)
        self.d_hat_level = d_hat_level


class RadiusOutOfRange(ComputationError, ValueError):
    pass


class EpsOrderViolation(ComputationError, ValueError):
    pass


class InternalInvariant(ComputationError, AssertionError):
    pass


class NonFiniteIntegral(ComputationError):
    pass


class RejectionStall(ComputationError):
    pass


class EmptyLevelSet(ComputationError):
    pass


class UnsupportedLevel(ComputationError):
    pass
