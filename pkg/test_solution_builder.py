#!/usr/bin/env python3
"""
Test Solution Builder
Lifting, ratios, invariant bases, general solutions and cross-ratio reconstruction
"""

import os
import sys
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from errors import ArityMismatch, DependentInvariants, EmptyDomain, IdenticalParticulars
from expr_core import CoordinateSystem, Div, Var, numeric_equal, parse, to_text
from numeric_verify import Domain, Guard, residual_max
from operator_algebra import DifferentialOperator, check_kernel
from solution_builder import (
    InvariantBasis,
    SolutionTemplate,
    build_cross_ratio_family,
    cross_ratio,
    further_solution_ratio,
    general_reduced,
    general_total,
    invariants_from_kernel,
    lift,
    lift_domain,
    linear_combination,
    product,
    ratio,
    ratio_domain,
)

XYZ = CoordinateSystem(("x", "y", "z"))
CUBE = Domain.cube(XYZ, 0.5, 2.0)
TOTAL = DifferentialOperator.from_text(XYZ, ["x", "y", "z"], "1")
L = TOTAL.field_part()
RHS = parse("3*x^2")
PARTICULARS = [parse(t) for t in ("x^2", "x^2 + 1/x", "x^2 + 1/y", "x^2 + 1/z")]
INVARIANTS = [parse("y/x"), parse("z/x")]


def expect_error(error_type, fn, *args, **kwargs):
    """Return the error fn raises; fail if it raises nothing."""
    try:
        fn(*args, **kwargs)
    except error_type as error:
        return error
    raise AssertionError(f"expected {error_type.__name__}")


def template(body, arity=2):
    return SolutionTemplate.standard(parse(body), arity)


def test_invariant_basis():
    basis = InvariantBasis.verified(INVARIANTS, XYZ, CUBE)
    assert basis.rank == 2 and len(basis) == 2
    expect_error(ArityMismatch, InvariantBasis, (parse("y/x"),), XYZ)
    error = expect_error(DependentInvariants, InvariantBasis.verified, [parse("y/x"), parse("2*y/x")], XYZ, CUBE)
    assert error.rank == 1 and error.expected == 2


def test_templates():
    f = template("u1*u2 + 1")
    assert f.placeholders == ("u1", "u2")
    assert f.instantiate([parse("a"), parse("b")]) == parse("a*b + 1")
    expect_error(ArityMismatch, f.instantiate, [parse("a")])
    expect_error(ValueError, SolutionTemplate.standard, parse("u3"), 2)
    assert str(f) == "f(u1, u2) = u1*u2 + 1"


def test_lift_and_ratio():
    eta = parse("1/x")
    phi = parse("y/x")
    lifted = lift(eta, phi)
    assert residual_max(TOTAL, lifted, parse("0"), CUBE, 100, 42).passed
    assert ratio(lifted, eta) == Div(lifted, eta)
    assert residual_max(L, ratio(parse("1/y"), eta), parse("0"), CUBE, 100, 42).passed


def test_domains_of_constructions():
    psi_domain = Domain.cube(XYZ, 0.0, 2.0)
    eta_domain = Domain.cube(XYZ, 0.5, 3.0)
    assert lift_domain(eta_domain, psi_domain).box == ((0.5, 2.0),) * 3
    guarded = ratio_domain(psi_domain, eta_domain, parse("x - 1"))
    assert guarded.guards == (Guard(parse("x - 1"), "nonzero", 1e-6),)
    expect_error(EmptyDomain, lift_domain, Domain.cube(XYZ, 3.0, 4.0), psi_domain)


def test_invariants_from_kernel():
    eta = parse("1/x")
    basis = invariants_from_kernel(eta, [parse("1/y"), parse("1/z")], XYZ, CUBE)
    assert [to_text(phi) for phi in basis.invariants] == ["x/y", "x/z"]
    expect_error(ArityMismatch, invariants_from_kernel, eta, [parse("1/y")], XYZ, CUBE)
    expect_error(DependentInvariants, invariants_from_kernel, eta, [parse("1/y"), parse("2/y")], XYZ, CUBE)


def test_general_solutions():
    eta = parse("1/x")
    basis = InvariantBasis.verified(INVARIANTS, XYZ, CUBE)
    for body in ("u1", "u2^2", "u1*u2 + 1"):
        chi = general_total(PARTICULARS[0], eta, basis, template(body))
        assert residual_max(TOTAL, chi, RHS, CUBE, 200, 42).passed, body
        psi = general_reduced(eta, basis, template(body))
        assert residual_max(TOTAL, psi, parse("0"), CUBE, 200, 42).passed, body


def test_further_solution_ratio():
    eta = parse("1/x")
    eta_n = lift(eta, product(INVARIANTS))
    assert check_kernel(TOTAL, eta_n, CUBE).max_residual <= 1e-8
    f0 = further_solution_ratio(eta_n, eta)
    assert residual_max(L, f0, parse("0"), CUBE, 100, 42).passed
    assert further_solution_ratio(parse("1/y"), eta) == Div(Var("x"), Var("y"))


def test_cross_ratio_family():
    family = build_cross_ratio_family(PARTICULARS, template("u1"), CUBE)
    assert family.eta == parse("1/x")
    assert [to_text(phi) for phi in family.ratios] == ["x/y", "x/z"]
    assert family.rank == 2
    assert residual_max(TOTAL, family.solution, RHS, CUBE, 200, 42).passed
    assert residual_max(TOTAL, family.solution, RHS, CUBE, 200, 42).max_residual <= 1e-8
    assert cross_ratio(PARTICULARS, template("u1*u2 + 1"), CUBE) is not None


def test_cross_ratio_with_two_particulars_uses_basis():
    basis = InvariantBasis.verified(INVARIANTS, XYZ, CUBE)
    family = build_cross_ratio_family(PARTICULARS[:2], template("u1 + u2"), CUBE, basis)
    assert family.ratios == basis.invariants
    assert residual_max(TOTAL, family.solution, RHS, CUBE, 200, 42).passed


def test_cross_ratio_errors():
    f = template("u1")
    expect_error(ValueError, build_cross_ratio_family, PARTICULARS[:1], f, CUBE)
    expect_error(ArityMismatch, build_cross_ratio_family, PARTICULARS + [parse("x^2 + 2/x")], f, CUBE)
    expect_error(IdenticalParticulars, build_cross_ratio_family, [PARTICULARS[0], PARTICULARS[0], PARTICULARS[2], PARTICULARS[3]], f, CUBE)
    dependent = [PARTICULARS[0], PARTICULARS[1], PARTICULARS[2], parse("x^2 + 2/y")]
    expect_error(DependentInvariants, build_cross_ratio_family, dependent, f, CUBE)


def test_closure_helpers():
    combination = linear_combination([(1.5, parse("1/x")), (0.5, parse("1/y"))])
    assert check_kernel(TOTAL, combination, CUBE).max_residual <= 1e-8
    assert residual_max(L, product(INVARIANTS), parse("0"), CUBE, 100, 42).passed


def test_lift_and_ratio_are_inverse():
    rng = np.random.default_rng(5)
    phis = [parse(t) for t in ("y/x", "sin(x*z)", "x^2 + y", "exp(-y)*z")]
    for trial in range(10):
        a, b = (round(float(c), 3) for c in rng.uniform(-2.0, 2.0, size=2))
        eta = parse(f"exp({a}*x)*y^({b})")
        for phi in phis:
            assert numeric_equal(ratio(lift(eta, phi), eta), phi, CUBE, tol=1e-10, seed=trial), (to_text(eta), to_text(phi))
            assert numeric_equal(lift(eta, ratio(phi, eta)), phi, CUBE, tol=1e-10, seed=trial), (to_text(eta), to_text(phi))


def test_lift_correspondence_both_directions():
    eta = parse("1/x")
    for text in ("y/x", "z/x", "(y/x)^2", "sin(z/x)", "(y + z)/x", "exp(y/x - z/x)"):
        phi = parse(text)
        assert residual_max(L, phi, parse("0"), CUBE, 100, 42).passed, text
        assert check_kernel(TOTAL, lift(eta, phi), CUBE).max_residual <= 1e-8, text
    for text in ("1/y", "1/z", "y/x^2", "1/(x + y + z)", "1/sqrt(x*y)"):
        psi = parse(text)
        assert check_kernel(TOTAL, psi, CUBE).max_residual <= 1e-8, text
        assert residual_max(L, ratio(psi, eta), parse("0"), CUBE, 100, 42).passed, text
    assert not residual_max(TOTAL, lift(eta, parse("x")), parse("0"), CUBE, 100, 42).passed
    assert not residual_max(L, ratio(parse("1"), eta), parse("0"), CUBE, 100, 42).passed


def test_cross_ratio_sub_family():
    family = build_cross_ratio_family(PARTICULARS[:3], template("u1"), CUBE)
    assert [to_text(phi) for phi in family.ratios] == ["x/y"]
    assert family.rank == 1
    assert residual_max(TOTAL, family.solution, RHS, CUBE, 200, 42).passed
    squared = build_cross_ratio_family(PARTICULARS[:3], template("sin(u1)^2"), CUBE)
    assert residual_max(TOTAL, squared.solution, RHS, CUBE, 200, 42).passed
    error = expect_error(ArityMismatch, build_cross_ratio_family, PARTICULARS[:3], template("u2"), CUBE)
    assert "u2" in str(error)
    assert template("u1*u2").restricted(2) == template("u1*u2")



def main():
    print("🧪 TESTING SOLUTION BUILDER")
    print("=" * 40)
    tests = [value for name, value in globals().items() if name.startswith("test_") and callable(value)]
    failed = 0
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except AssertionError as e:
            failed += 1
            print(f"❌ {test.__name__}: {e}")
    print("=" * 40)
    print(f"📊 {len(tests) - failed}/{len(tests)} passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
