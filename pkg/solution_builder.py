#!/usr/bin/env python3
"""
Solution Builder for Lagrange-Ops
Lifting, ratios, general solutions from invariants and reconstruction of the
general solution of (L+q)chi = b from particular solutions
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from errors import ArityMismatch, DependentInvariants, IdenticalParticulars
from expr_core import (
    ONE,
    ZERO,
    Add,
    Const,
    CoordinateSystem,
    Div,
    Expr,
    Mul,
    Sub,
    evaluate,
    normalize,
    substitute,
    to_text,
    variables,
)
from numeric_verify import Domain, Guard, independence_rank, intersect

DEFAULT_RANK_POINTS = 9


@dataclass(frozen=True)
class InvariantBasis:
    """n - 1 homogeneous solutions phi_1..phi_{n-1} with their numeric rank."""

    invariants: Tuple[Expr, ...]
    coords: CoordinateSystem
    rank: Optional[int] = None
    point_ranks: Tuple[int, ...] = ()

    def __post_init__(self):
        invariants = tuple(self.invariants)
        if len(invariants) != len(self.coords) - 1:
            raise ArityMismatch(
                f"an invariant basis over {len(self.coords)} coordinates needs {len(self.coords) - 1} "
                f"invariants, got {len(invariants)}"
            )
        if self.rank is not None and self.rank != len(invariants):
            raise DependentInvariants(self.rank, len(invariants))
        object.__setattr__(self, "invariants", invariants)

    def __len__(self) -> int:
        return len(self.invariants)

    @classmethod
    def verified(cls, invariants: Sequence[Expr], coords: CoordinateSystem, d: Domain, n_points: int = DEFAULT_RANK_POINTS, seed: int = 42) -> "InvariantBasis":
        """Run the Jacobian rank test and record it; dependent families raise."""
        invariants = tuple(invariants)
        rank, point_ranks = independence_rank(invariants, d, n_points, seed)
        if rank < len(invariants):
            raise DependentInvariants(rank, len(invariants))
        return cls(invariants, coords, rank, point_ranks)


@dataclass(frozen=True)
class SolutionTemplate:
    """The arbitrary function f as an expression over placeholder names."""

    placeholders: Tuple[str, ...]
    body: Expr

    def __post_init__(self):
        placeholders = tuple(self.placeholders)
        stray = variables(self.body) - set(placeholders)
        if stray:
            raise ValueError(f"template body uses {sorted(stray)} outside placeholders {placeholders}")
        object.__setattr__(self, "placeholders", placeholders)

    @classmethod
    def standard(cls, body: Expr, arity: int) -> "SolutionTemplate":
        """Template over u1..u_arity."""
        return cls(tuple(f"u{i}" for i in range(1, arity + 1)), body)

    def restricted(self, arity: int) -> "SolutionTemplate":
        """The same body over the first arity placeholders only."""
        kept = self.placeholders[:arity]
        dropped = sorted(variables(self.body) & set(self.placeholders[arity:]))
        if dropped:
            raise ArityMismatch(
                f"template uses {', '.join(dropped)} but only {len(kept)} invariant(s) are available"
            )
        return SolutionTemplate(kept, self.body)

    def instantiate(self, arguments: Sequence[Expr]) -> Expr:
        if len(arguments) != len(self.placeholders):
            raise ArityMismatch(
                f"template takes {len(self.placeholders)} argument(s), got {len(arguments)}"
            )
        return substitute(self.body, dict(zip(self.placeholders, arguments)))

    def __str__(self):
        return f"f({', '.join(self.placeholders)}) = {to_text(self.body)}"


def lift(eta: Expr, phi: Expr) -> Expr:
    """phi solves L phi = 0 iff eta phi solves (L+q)psi = 0."""
    return normalize(Mul(eta, phi))


def ratio(psi: Expr, eta: Expr) -> Expr:
    """psi / eta; for two kernel elements this solves L phi = 0."""
    return normalize(Div(psi, eta))


def lift_domain(eta_domain: Domain, phi_domain: Domain) -> Domain:
    """Where eta phi is a solution: E_phi ∩ E_eta."""
    return intersect(phi_domain, eta_domain)


def ratio_domain(psi_domain: Domain, eta_domain: Domain, eta: Expr, epsilon: Optional[float] = None) -> Domain:
    """Where psi / eta is a solution: E_psi ∩ E_eta minus the zero set of eta."""
    common = intersect(psi_domain, eta_domain)
    return common.with_guard(Guard(eta, "nonzero", epsilon if epsilon is not None else common.epsilon))


def invariants_from_kernel(
    eta: Expr,
    others: Sequence[Expr],
    coords: CoordinateSystem,
    d: Domain,
    n_points: int = DEFAULT_RANK_POINTS,
    seed: int = 42,
) -> InvariantBasis:
    """phi_j = eta_j / eta for n - 1 further kernel elements, rank-checked."""
    if len(others) != len(coords) - 1:
        raise ArityMismatch(f"need {len(coords) - 1} further kernel elements, got {len(others)}")
    return InvariantBasis.verified([ratio(other, eta) for other in others], coords, d, n_points, seed)


def general_reduced(eta: Expr, basis: InvariantBasis, f: SolutionTemplate) -> Expr:
    """psi = eta f(phi_1, ..., phi_{n-1}), the general solution of (L+q)psi = 0."""
    return normalize(Mul(eta, f.instantiate(basis.invariants)))


def general_total(chi0: Expr, eta: Expr, basis: InvariantBasis, f: SolutionTemplate) -> Expr:
    """chi = chi0 + eta f(phi_1, ..., phi_{n-1}), the general solution of (L+q)chi = b."""
    return normalize(Add(chi0, general_reduced(eta, basis, f)))


def further_solution_ratio(eta_n: Expr, eta: Expr) -> Expr:
    """eta_n / eta for an extra kernel element: some f0 of the basis invariants."""
    return ratio(eta_n, eta)


@dataclass(frozen=True)
class CrossRatioFamily:
    """chi0 + eta f(phi_1, ...) built from particular solutions chi0..chi_m."""

    solution: Expr
    eta: Expr
    ratios: Tuple[Expr, ...]
    rank: Optional[int]


def build_cross_ratio_family(
    particulars: Sequence[Expr],
    f: SolutionTemplate,
    d: Domain,
    basis: Optional[InvariantBasis] = None,
    samples: int = 200,
    seed: int = 42,
    n_points: int = DEFAULT_RANK_POINTS,
) -> CrossRatioFamily:
    """General solution in terms of particular solutions.

    eta = chi1 - chi0 and phi_j = (chi_{j+1} - chi0) / eta. With only two
    particulars the template binds to the caller's basis instead. Fewer
    than n + 1 particulars give a sub-family: the template keeps only the
    placeholders that have a ratio to bind to.
    """
    m = len(particulars) - 1
    n = len(d.coords)
    if m < 1:
        raise ValueError("at least two particular solutions are required")
    if m > n:
        raise ArityMismatch(f"{m + 1} particular solutions over {n} coordinates are functionally dependent")
    chi0 = particulars[0]
    eta = normalize(Sub(particulars[1], chi0))
    if all(abs(evaluate(eta, point)) <= d.epsilon for point in d.sample(samples, seed)):
        raise IdenticalParticulars(f"chi1 - chi0 = {to_text(eta)} vanishes on the sampled domain")

    rank = None
    if m == 1:
        ratios = tuple(basis.invariants) if basis is not None else ()
        rank = basis.rank if basis is not None else None
    else:
        ratios = tuple(ratio(normalize(Sub(chi, chi0)), eta) for chi in particulars[2:])
        rank, _ = independence_rank(ratios, d, n_points, seed)
        if rank < len(ratios):
            raise DependentInvariants(rank, len(ratios))
    template = f if len(ratios) >= len(f.placeholders) else f.restricted(len(ratios))
    solution = normalize(Add(chi0, Mul(eta, template.instantiate(ratios))))
    return CrossRatioFamily(solution, eta, ratios, rank)


def cross_ratio(
    particulars: Sequence[Expr],
    f: SolutionTemplate,
    d: Domain,
    basis: Optional[InvariantBasis] = None,
    samples: int = 200,
    seed: int = 42,
) -> Expr:
    return build_cross_ratio_family(particulars, f, d, basis, samples, seed).solution


def linear_combination(terms: Sequence[Tuple[float, Expr]]) -> Expr:
    """c1 psi1 + c2 psi2 + ..., normalized."""
    total: Expr = ZERO
    for coefficient, expr in terms:
        total = Add(total, Mul(Const(coefficient), expr))
    return normalize(total)


def product(factors: Sequence[Expr]) -> Expr:
    total: Expr = ONE
    for factor in factors:
        total = Mul(total, factor)
    return normalize(total)
