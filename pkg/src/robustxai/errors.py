"""Exception types shared across the toolkit."""


class ContractViolation(ValueError):
    """An operation was called with arguments outside its stated contract."""


class DegenerateVariance(ArithmeticError):
    """Correlation is undefined because at least one vector is constant."""


class SurrogateRankError(RuntimeError):
    """The local surrogate design matrix is rank deficient."""


class SeedMisclassified(RuntimeError):
    """The unperturbed seed is already adversarial (its top class is not a strict argmax)."""


class ConfigError(ValueError):
    """A run configuration failed validation. Carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class BridgeError(RuntimeError):
    """Base class for failures of the out-of-process evaluation bridge."""


class BridgeTimeout(BridgeError):
    """The adapter did not answer within the configured timeout."""


class ProtocolError(BridgeError):
    """The adapter sent a frame that violates the wire protocol."""

    def __init__(self, message: str, offending_line: str | None = None):
        self.offending_line = offending_line
        if offending_line is not None:
            message = f"{message} (offending line: {offending_line!r})"
        super().__init__(message)


class RemoteEvaluationError(BridgeError):
    """The adapter answered ok=false for an evaluation request."""


class NondeterministicAdapter(BridgeError):
    """The adapter declared itself non-deterministic and was not explicitly allowed."""
