"""Exception types raised across the toolkit.

``ValidationFailure`` subclasses mark caller mistakes (bad parameters,
malformed input); the CLI maps them to exit code 2. Everything else that
escapes is a runtime failure (exit code 3).
"""


class RicciflowError(Exception):
    """Base class for all toolkit errors."""


class ValidationFailure(RicciflowError):
    """Caller-side error: invalid parameters or malformed input."""


class ParameterError(ValidationFailure):
    """A numeric or structural parameter is outside its valid range."""


class IsolatedNodeError(ValidationFailure):
    """A node with no neighbors cannot carry a probability measure."""


class UnreachableError(ValidationFailure):
    """Hop distance requested between nodes in different components."""


class DisconnectedError(ValidationFailure):
    """An operation requires a connected graph."""


class DegenerateWeightsError(ValidationFailure):
    """All edge weights are zero; normalization is undefined."""


class MarginalMismatchError(ValidationFailure):
    """Transport endpoints carry different total mass."""


class CostError(ValidationFailure):
    """A ground-cost entry is infinite or otherwise unusable."""


class OracleScopeError(ValidationFailure):
    """Inputs exceed the size the brute-force transport oracle accepts."""


class GainError(ValidationFailure):
    """Control gain below the stability threshold."""


class TargetMissingError(ValidationFailure):
    """Closed-loop step requested without a target weight field."""


class EstimatorMissingError(ValidationFailure):
    """Estimator step requested without an estimator weight field."""


class TargetError(ValidationFailure):
    """An input event names nodes that do not exist in the graph."""


class ParseError(ValidationFailure):
    """A telemetry, schedule, or graph file could not be parsed."""
