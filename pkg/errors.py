#!/usr/bin/env python3
"""
Lagrange-Ops Error Types
Every failure the engine reports, grouped under one base class
"""

from typing import Any, Mapping, Optional


class LagrangeOpsError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(LagrangeOpsError, ValueError):
    """An environment or settings value could not be used."""


class ParseError(LagrangeOpsError, ValueError):
    """Expression text does not follow the grammar."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte offset {offset}")


class UnknownFunction(ParseError):
    """A call names a function outside exp, ln, abs, sin, cos, sqrt."""

    def __init__(self, name: str, offset: int, text: str = ""):
        self.name = name
        super().__init__(f"unknown function '{name}'", offset, text)


class DomainError(LagrangeOpsError, ArithmeticError):
    """Evaluation left the real domain of an expression."""

    def __init__(self, message: str, point: Optional[Mapping[str, float]] = None):
        self.point = dict(point) if point is not None else None
        super().__init__(message)

    def at(self, point: Mapping[str, float]) -> "DomainError":
        """Return a copy that records the offending point."""
        return DomainError(str(self), point)


class MissingVariable(LagrangeOpsError, LookupError):
    """A Var has no value in the evaluation point."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no value for variable '{name}'")


class SamplingExhausted(LagrangeOpsError, RuntimeError):
    """The domain guards rejected too many draws."""

    def __init__(self, requested: int, accepted: int, rejected: int):
        self.requested = requested
        self.accepted = accepted
        self.rejected = rejected
        super().__init__(
            f"sampling exhausted: {accepted}/{requested} points accepted after {rejected} rejections"
        )


class EmptyDomain(LagrangeOpsError, ValueError):
    """An interval intersection is empty."""


class InvalidOperator(LagrangeOpsError, ValueError):
    """Coefficients do not describe a genuine first-order operator."""


class NotAKernelElement(LagrangeOpsError, ValueError):
    """(L+q)η is not numerically zero on the sampled domain."""

    def __init__(self, max_residual: float, tolerance: float, detail: str = ""):
        self.max_residual = max_residual
        self.tolerance = tolerance
        message = f"not a kernel element: max residual {max_residual:.3e} > tolerance {tolerance:.1e}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class EtaVanishes(LagrangeOpsError, ValueError):
    """η comes closer to zero than the domain's guard epsilon."""

    def __init__(self, min_abs: float, epsilon: float):
        self.min_abs = min_abs
        self.epsilon = epsilon
        super().__init__(f"eta vanishes: min |eta| = {min_abs:.3e} <= {epsilon:.1e}")


class NonIntegerExponentWithoutAbs(LagrangeOpsError, ValueError):
    """A non-integer power of η was requested without |η|."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(f"alpha = {alpha!r} is not an integer; use the |eta| form")


class PowerLimitExceeded(LagrangeOpsError, ValueError):
    """An operator power above the configured cap was requested."""

    def __init__(self, k: int, limit: int):
        self.k = k
        self.limit = limit
        super().__init__(f"operator power k = {k} exceeds the limit {limit}")


class NegativePower(LagrangeOpsError, ValueError):
    """A negative operator power was requested."""

    def __init__(self, k: int):
        self.k = k
        super().__init__(f"operator power k = {k} is negative; (L+q)^k needs k >= 0")


class DependentInvariants(LagrangeOpsError, ValueError):
    """The numeric Jacobian rank is below the required rank."""

    def __init__(self, rank: int, expected: int):
        self.rank = rank
        self.expected = expected
        super().__init__(f"functionally dependent: rank {rank} < {expected}")


class ArityMismatch(LagrangeOpsError, ValueError):
    """Template placeholders and supplied invariants differ in number."""


class IdenticalParticulars(LagrangeOpsError, ValueError):
    """χ1 − χ0 is numerically zero, so it cannot serve as η."""


class UnknownCoordinate(LagrangeOpsError, LookupError):
    """An expression uses a variable that is not a declared coordinate."""

    def __init__(self, name: str, where: str = ""):
        self.name = name
        suffix = f" in {where}" if where else ""
        super().__init__(f"unknown coordinate '{name}'{suffix}")


class DuplicateName(LagrangeOpsError, ValueError):
    """A name is declared twice."""


class ProblemFileError(LagrangeOpsError, ValueError):
    """A problem file line could not be understood."""

    def __init__(self, message: str, line: int, path: Any = None):
        self.line = line
        self.path = path
        where = f"{path}:{line}" if path is not None else f"line {line}"
        super().__init__(f"{where}: {message}")


class UnknownName(LagrangeOpsError, LookupError):
    """A command refers to an expression or template that was never declared."""

    def __init__(self, name: str, kind: str = "expression"):
        self.name = name
        super().__init__(f"no {kind} named '{name}'")


class MissingDeclaration(LagrangeOpsError, LookupError):
    """A command needs a declaration the problem file does not provide."""
