"""Exception hierarchy."""


class QpeError(Exception):
    """Base class for all package errors."""


class DomainError(QpeError, ValueError):
    """An argument is outside the operation's domain."""


class CapacityError(QpeError):
    """The requested register exceeds the simulator's qubit ceiling."""


class RewriteIneligibleError(QpeError):
    """The circuit does not match the ancilla-removal pattern."""


class DegenerateSampleError(QpeError, ValueError):
    """Both cosine and sine estimates are zero; the angle is undefined."""


class InconsistentEstimatesError(QpeError, ValueError):
    def __init__(self, k: int, message: str):
        super().__init__(message)
        self.k = k


class PhaseParseError(QpeError, ValueError):
    def __init__(self, text: str, position: int, reason: str):
        super().__init__(f"cannot parse phase {text!r} at position {position}: {reason}")
        self.text = text
        self.position = position
