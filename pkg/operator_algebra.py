#!/usr/bin/env python3
"""
Operator Algebra for Lagrange-Ops
First-order totally linear operators L + q and the factorization
eta L eta^-1 = L + q with its corollaries
"""

import sys
from dataclasses import dataclass
from typing import Sequence, Tuple

from errors import (
    DomainError,
    EtaVanishes,
    InvalidOperator,
    NegativePower,
    NonIntegerExponentWithoutAbs,
    NotAKernelElement,
    PowerLimitExceeded,
)
from expr_core import (
    ONE,
    ZERO,
    Abs,
    Add,
    Const,
    CoordinateSystem,
    Div,
    Expr,
    Mul,
    Pow,
    differentiate,
    evaluate,
    is_const,
    node_count,
    normalize,
    parse,
    to_text,
)
from numeric_verify import Domain, VerificationReport, compare_expressions

DEFAULT_MAX_POWER = 3
DEFAULT_NODE_BUDGET = 20000


@dataclass(frozen=True)
class DifferentialOperator:
    """L + q with L = sum of a_k d/dx_k over coords; scalar Const 0 means homogeneous."""

    coords: CoordinateSystem
    field_coeffs: Tuple[Expr, ...]
    scalar: Expr = ZERO

    def __post_init__(self):
        coeffs = tuple(self.field_coeffs)
        if len(coeffs) != len(self.coords):
            raise InvalidOperator(
                f"{len(coeffs)} field coefficient(s) for {len(self.coords)} coordinate(s)"
            )
        if all(is_const(normalize(c), 0.0) for c in coeffs):
            raise InvalidOperator("every field coefficient is zero; L is not a vector field")
        object.__setattr__(self, "field_coeffs", coeffs)

    @classmethod
    def from_text(cls, coords: CoordinateSystem, field_texts: Sequence[str], scalar_text: str = "0") -> "DifferentialOperator":
        return cls(coords, tuple(parse(text) for text in field_texts), parse(scalar_text))

    @property
    def is_homogeneous(self) -> bool:
        return is_const(normalize(self.scalar), 0.0)

    def field_part(self) -> "DifferentialOperator":
        """The homogeneous operator L underlying L + q."""
        if self.scalar == ZERO:
            return self
        return DifferentialOperator(self.coords, self.field_coeffs, ZERO)

    def apply(self, e: Expr) -> Expr:
        return apply(self, e)

    def describe(self) -> str:
        terms = []
        for name, coeff in zip(self.coords, self.field_coeffs):
            coeff = normalize(coeff)
            if is_const(coeff, 0.0):
                continue
            derivative = f"∂/∂{name}"
            if is_const(coeff, 1.0):
                terms.append(derivative)
            elif " " in to_text(coeff):
                terms.append(f"({to_text(coeff)})·{derivative}")
            else:
                terms.append(f"{to_text(coeff)}·{derivative}")
        text = " + ".join(terms)
        if not self.is_homogeneous:
            text += f" + ({to_text(normalize(self.scalar))})"
        return text

    def to_lines(self) -> Tuple[str, str]:
        """Problem-file serialization: the field line and the q line."""
        return (
            "field: " + " | ".join(to_text(c) for c in self.field_coeffs),
            "q: " + to_text(self.scalar),
        )


@dataclass(frozen=True)
class KernelCertificate:
    """Evidence that eta is a non-vanishing kernel element of operator on domain."""

    eta: Expr
    operator: DifferentialOperator
    domain: Domain
    max_residual: float
    tolerance: float
    samples: int
    seed: int
    min_abs_eta: float


def apply(D: DifferentialOperator, e: Expr) -> Expr:
    """(L + q)e = sum of a_k de/dx_k plus q e, normalized."""
    total: Expr = Mul(D.scalar, e)
    for name, coeff in zip(D.coords, D.field_coeffs):
        if is_const(coeff, 0.0):
            continue
        total = Add(total, Mul(coeff, differentiate(e, name)))
    return normalize(total)


def conjugate(D: DifferentialOperator, eta: Expr) -> DifferentialOperator:
    """eta^-1 D eta collapsed to a first-order operator: q -> q + L(eta)/eta."""
    L = D.field_part()
    scalar = normalize(Add(D.scalar, Div(apply(L, eta), eta)))
    return DifferentialOperator(D.coords, D.field_coeffs, scalar)


def recompose(L: DifferentialOperator, eta: Expr) -> DifferentialOperator:
    """eta L eta^-1 as an operator L + q with q = -L(eta)/eta."""
    return conjugate(L.field_part(), normalize(Div(ONE, eta)))


def scalar_shift(D: DifferentialOperator, Q: Expr) -> DifferentialOperator:
    return DifferentialOperator(D.coords, D.field_coeffs, normalize(Add(D.scalar, Q)))


def measure_kernel(D: DifferentialOperator, eta: Expr, d: Domain, samples: int, seed: int) -> Tuple[float, float, int]:
    """(max relative residual of D eta, min |eta|, accepted samples)."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    image = apply(D, eta)
    points = d.sample(samples, seed)
    worst = 0.0
    smallest = float("inf")
    for point in points:
        value = evaluate(eta, point)
        smallest = min(smallest, abs(value))
        worst = max(worst, abs(evaluate(image, point)) / max(1.0, abs(value)))
    return worst, smallest, len(points)


def check_kernel(
    D: DifferentialOperator,
    eta: Expr,
    d: Domain,
    samples: int = 200,
    tol: float = 1e-8,
    seed: int = 42,
) -> KernelCertificate:
    """Certify (L+q)eta = 0 and |eta| > epsilon on the sampled domain."""
    worst, smallest, accepted = measure_kernel(D, eta, d, samples, seed)
    if worst > tol:
        raise NotAKernelElement(worst, tol)
    if smallest <= d.epsilon:
        raise EtaVanishes(smallest, d.epsilon)
    return KernelCertificate(eta, D, d, worst, tol, accepted, seed, smallest)


def kernel_report(
    D: DifferentialOperator,
    eta: Expr,
    d: Domain,
    samples: int,
    tol: float,
    seed: int,
    check: str = "kernel",
    equation: str = "Eq.1 kernel element",
) -> VerificationReport:
    """check_kernel as a report; vanishing eta or domain errors fail the check."""
    detail = ""
    try:
        worst, smallest, accepted = measure_kernel(D, eta, d, samples, seed)
        detail = f"min |eta| = {smallest:.6e}"
        if smallest <= d.epsilon:
            detail = f"eta vanishes: {detail} <= {d.epsilon:g}"
            worst = None
    except DomainError as error:
        worst, accepted = None, samples
        detail = f"DomainError: {error} at {error.point}"
    return VerificationReport(
        check=check,
        max_residual=worst,
        tolerance=tol,
        samples_requested=samples,
        samples_accepted=accepted,
        seed=seed,
        domain=d.describe(),
        detail=detail,
        equation=equation,
        operator=D.describe(),
        candidate=to_text(eta),
    )


def factor_to_homogeneous(
    D: DifferentialOperator,
    eta: Expr,
    d: Domain,
    samples: int = 200,
    tol: float = 1e-8,
    seed: int = 42,
) -> Tuple[DifferentialOperator, KernelCertificate]:
    """L = eta^-1 (L+q) eta: certify eta, then confirm the conjugated scalar vanishes."""
    certificate = check_kernel(D, eta, d, samples, tol, seed)
    conjugated = conjugate(D, eta)
    for point in d.sample(samples, seed):
        leftover = abs(evaluate(conjugated.scalar, point)) / max(1.0, abs(evaluate(D.scalar, point)))
        if leftover > tol:
            raise NotAKernelElement(leftover, tol, "conjugated scalar part is not zero")
    return D.field_part(), certificate


def apply_power(
    D: DifferentialOperator,
    k: int,
    e: Expr,
    max_power: int = DEFAULT_MAX_POWER,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Expr:
    """(L+q)^k e by repeated application; k = 0 returns e."""
    if k < 0:
        raise NegativePower(k)
    if k > max_power:
        raise PowerLimitExceeded(k, max_power)
    result = e
    for _ in range(k):
        result = apply(D, result)
    size = node_count(result)
    if size > node_budget:
        print(f"⚠️ (L+q)^{k} produced {size} nodes (budget {node_budget})", file=sys.stderr)
    return result


def power_via_conjugation(L: DifferentialOperator, eta: Expr, k: int, psi: Expr, max_power: int = DEFAULT_MAX_POWER) -> Expr:
    """eta L^k (psi / eta), the right-hand side of (L+q)^k = eta L^k eta^-1."""
    return normalize(Mul(eta, apply_power(L.field_part(), k, Div(psi, eta), max_power)))


def kernel_power(eta: Expr, alpha: float, D: DifferentialOperator, use_abs: bool = False) -> Tuple[DifferentialOperator, Expr]:
    """(L + alpha q, eta^alpha) or (L + alpha q, |eta|^alpha)."""
    alpha = float(alpha)
    if not use_abs and not alpha.is_integer():
        raise NonIntegerExponentWithoutAbs(alpha)
    base = Abs(eta) if use_abs else eta
    shifted = scalar_shift(D.field_part(), Mul(Const(alpha), D.scalar))
    return shifted, normalize(Pow(base, Const(alpha)))


def eigen_shift(eta: Expr, psi_lambda: Expr) -> Expr:
    """eta psi_lambda: an eigenfunction of L mapped to one of L + q."""
    return normalize(Mul(eta, psi_lambda))


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------

def conjugation_report(D: DifferentialOperator, L: DifferentialOperator, eta: Expr, psi: Expr, d: Domain, samples: int, tol: float, seed: int) -> VerificationReport:
    """(L+q)psi = eta L(psi/eta), sampled only where eta's guards hold."""
    lhs = apply(D, psi)
    rhs = normalize(Mul(eta, apply(L, Div(psi, eta))))
    return compare_expressions(
        f"conjugation[{to_text(psi)}]", lhs, rhs, d, samples, seed, tol,
        equation="Eq.2 conjugation", operator=D.describe(), candidate=to_text(psi),
    )


def round_trip_report(D: DifferentialOperator, eta: Expr, d: Domain, samples: int, tol: float, seed: int) -> VerificationReport:
    """conjugate(conjugate(D, eta), 1/eta) restores the scalar part of D."""
    restored = conjugate(conjugate(D, eta), normalize(Div(ONE, eta)))
    return compare_expressions(
        "conjugation-round-trip", restored.scalar, D.scalar, d, samples, seed, tol,
        equation="Eq.3 factorization (both directions)", operator=D.describe(), candidate=to_text(eta),
    )


def power_report(D: DifferentialOperator, L: DifferentialOperator, eta: Expr, k: int, psi: Expr, d: Domain, samples: int, tol: float, seed: int, max_power: int = DEFAULT_MAX_POWER) -> VerificationReport:
    lhs = apply_power(D, k, psi, max_power)
    rhs = power_via_conjugation(L, eta, k, psi, max_power)
    return compare_expressions(
        f"power[k={k}, {to_text(psi)}]", lhs, rhs, d, samples, seed, tol,
        equation="Eq.4 operator power", operator=D.describe(), candidate=to_text(psi),
    )


def shift_report(D: DifferentialOperator, L: DifferentialOperator, eta: Expr, Q: Expr, psi: Expr, d: Domain, samples: int, tol: float, seed: int) -> VerificationReport:
    """eta^-1 (L+q+Q) eta psi = (L+Q) psi."""
    lhs = normalize(Div(apply(scalar_shift(D, Q), Mul(eta, psi)), eta))
    rhs = apply(scalar_shift(L, Q), psi)
    return compare_expressions(
        f"scalar-shift[{to_text(Q)}, {to_text(psi)}]", lhs, rhs, d, samples, seed, tol,
        equation="Eq.7 scalar shift", operator=D.describe(), candidate=to_text(psi),
    )


def eigen_report(D: DifferentialOperator, eta: Expr, psi_lambda: Expr, lam: float, d: Domain, samples: int, tol: float, seed: int) -> Tuple[VerificationReport, VerificationReport]:
    """Residuals of (L - lambda) on psi_lambda and of (L+q-lambda) on eta psi_lambda."""
    shift = Const(-float(lam))
    base = kernel_report(
        scalar_shift(D.field_part(), shift), psi_lambda, d, samples, tol, seed,
        check=f"eigenfunction[lambda={lam:g}]", equation="Eq.8 eigenfunction of L",
    )
    shifted = kernel_report(
        scalar_shift(D, shift), eigen_shift(eta, psi_lambda), d, samples, tol, seed,
        check=f"eigen-shift[lambda={lam:g}]", equation="Eq.8 eigen-shift",
    )
    return base, shifted
