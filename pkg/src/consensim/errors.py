"""Exception hierarchy. The CLI maps these to stable exit codes:
ConfigurationError -> 2, NumericalError -> 3, DivergenceError -> 4."""


class ConsensimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ConsensimError):
    """Invalid inputs, incompatible scenario pieces, or missing gains."""


class DimensionError(ConfigurationError):
    """Shape, squareness, symmetry, or size-cap violation."""


class GraphClassError(ConfigurationError):
    """Graph does not belong to the class an operation requires."""


class NotApplicableError(ConfigurationError):
    """Operation is undefined for the requested protocol variant."""


class SchemaError(ConfigurationError):
    """A file does not match its documented schema."""


class NumericalError(ConsensimError):
    """A numeric procedure failed to produce a certified result."""


class ConvergenceError(NumericalError):
    """Iteration exhausted its budget before meeting tolerance."""


class RankError(NumericalError):
    """A matrix was numerically rank-deficient where full rank is required."""


class SpectrumConflictError(NumericalError):
    """Spectra of the operands make the linear matrix equation singular."""


class NotStabilizableError(NumericalError):
    """(A, B) has an unstable mode that no feedback can move."""


class SynthesisError(NumericalError):
    """Gain construction finished but failed its own certificate."""


class CertificationError(NumericalError):
    """A required definiteness or stability certificate does not hold."""


class DivergenceError(ConsensimError):
    """Simulation state left the representable range (NaN/Inf)."""

    def __init__(self, message, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace
