"""Exception hierarchy shared by the algebra, geometry and reporting layers."""

from typing import Dict, Optional


class SpinformError(Exception):
    """Base class for every error raised by the engine."""


class ContractViolation(SpinformError, ValueError):
    """An operation was called outside its documented preconditions."""


class AdjointTypeNotRealized(SpinformError):
    """No admissible pairing of the requested adjoint type exists."""

    def __init__(self, p: int, q: int, s: int, kind: str):
        self.p = p
        self.q = q
        self.s = s
        self.kind = kind
        super().__init__(f"No {kind} pairing of adjoint type s={s:+d} in signature ({p},{q})")


class NotASquareError(SpinformError):
    """The form is not the square of any spinor."""


class RepresentationError(SpinformError):
    """Internal inconsistency in a spinor representation."""


class ConstraintViolation(SpinformError):
    """A normal form failed one or more of its defining equations."""

    def __init__(self, violations: Dict[str, float], tolerance: float, signature: Optional[str] = None):
        self.violations = dict(violations)
        self.tolerance = tolerance
        names = ", ".join(f"{name} ({value:.3e})" for name, value in self.violations.items())
        where = f" in {signature}" if signature else ""
        super().__init__(f"Normal form constraints violated{where}: {names} > {tolerance:.1e}")


class DegenerateMetric(SpinformError, ValueError):
    """The chart metric is singular or has the wrong signature at a point."""


class UnknownFamily(SpinformError, KeyError):
    """A solution family name is not in the registry."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown family"
