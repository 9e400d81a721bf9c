"""Exception hierarchy"""


class Umbilic4Error(Exception):
    """Base class for toolkit errors"""


class ValidationError(Umbilic4Error, ValueError):
    """Input rejected before any computation (bad parameters, keys, shapes)"""


class DomainError(ValidationError):
    """Chart or flow parameters outside the admissible domain"""


class ClosureError(Umbilic4Error):
    """Group closure did not terminate below the configured cap"""

    def __init__(self, cap: int):
        super().__init__(f"not closed at cap {cap}")
        self.cap = cap


class FrameError(Umbilic4Error):
    """Rank-deficient Jacobian or degenerate coframe"""


class ExtractionError(Umbilic4Error):
    """Finite-difference cubic failed its symmetry check"""


class ClassificationError(Umbilic4Error):
    """Cubic is not on a continuous-stabilizer orbit"""
