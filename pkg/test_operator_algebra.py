#!/usr/bin/env python3
"""
Test Operator Algebra
Operators L + q, kernel certificates, conjugation and the corollaries built on it
"""

import io
import os
import sys
from contextlib import redirect_stderr
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from errors import (
    EtaVanishes,
    InvalidOperator,
    NegativePower,
    NonIntegerExponentWithoutAbs,
    NotAKernelElement,
    PowerLimitExceeded,
)
from expr_core import ZERO, Const, CoordinateSystem, Point, evaluate, node_count, parse
from numeric_verify import Domain, Guard, compare_expressions
from operator_algebra import (
    DifferentialOperator,
    apply,
    apply_power,
    check_kernel,
    conjugate,
    conjugation_report,
    eigen_report,
    factor_to_homogeneous,
    kernel_power,
    kernel_report,
    power_report,
    recompose,
    round_trip_report,
    scalar_shift,
    shift_report,
)

X = CoordinateSystem(("x",))
XYZ = CoordinateSystem(("x", "y", "z"))
GAUSS = DifferentialOperator.from_text(X, ["1"], "2*x")
GAUSS_DOMAIN = Domain(X, ((-2.0, 2.0),))
ETA = parse("exp(-x^2)")
RADIAL = DifferentialOperator.from_text(XYZ, ["x", "y", "z"], "3/2")
CUBE = Domain.cube(XYZ, 0.5, 2.0, [Guard(parse("x"), "positive")])


def expect_error(error_type, fn, *args, **kwargs):
    """Return the error fn raises; fail if it raises nothing."""
    try:
        fn(*args, **kwargs)
    except error_type as error:
        return error
    raise AssertionError(f"expected {error_type.__name__}")


def test_operator_validation():
    expect_error(InvalidOperator, DifferentialOperator, XYZ, (parse("x"),))
    expect_error(InvalidOperator, DifferentialOperator.from_text, X, ["0*x"])
    assert not GAUSS.is_homogeneous
    assert GAUSS.field_part().is_homogeneous
    assert GAUSS.field_part().scalar == ZERO
    assert GAUSS.describe() == "∂/∂x + (2*x)"
    assert RADIAL.describe() == "x·∂/∂x + y·∂/∂y + z·∂/∂z + (1.5)"
    assert RADIAL.to_lines() == ("field: x | y | z", "q: 3/2")


def test_apply():
    image = apply(GAUSS, parse("x^2"))
    p = Point.of(x=1.5)
    assert abs(evaluate(image, p) - (2 * 1.5 + 2 * 1.5**3)) <= 1e-12
    assert apply(GAUSS, ETA) != ETA
    assert abs(evaluate(apply(GAUSS, ETA), p)) <= 1e-15


def test_check_kernel():
    certificate = check_kernel(GAUSS, ETA, GAUSS_DOMAIN)
    assert certificate.max_residual <= 1e-8
    assert certificate.samples == 200
    assert certificate.min_abs_eta >= 0.018
    error = expect_error(NotAKernelElement, check_kernel, GAUSS, parse("exp(x^2)"), GAUSS_DOMAIN)
    assert error.max_residual > 1e-8
    expect_error(EtaVanishes, check_kernel, GAUSS, parse("1e-9*exp(-x^2)"), GAUSS_DOMAIN)


def test_kernel_report_never_raises():
    report = kernel_report(GAUSS, parse("exp(x^2)"), GAUSS_DOMAIN, 50, 1e-8, 42)
    assert not report.passed and report.equation == "Eq.1 kernel element"
    vanishing = kernel_report(GAUSS, parse("1e-9*exp(-x^2)"), GAUSS_DOMAIN, 50, 1e-8, 42)
    assert vanishing.max_residual is None and "vanishes" in vanishing.detail
    undefined = kernel_report(GAUSS, parse("ln(x)"), GAUSS_DOMAIN, 50, 1e-8, 42)
    assert undefined.max_residual is None and "DomainError" in undefined.detail


def test_factor_and_recompose():
    L, certificate = factor_to_homogeneous(GAUSS, ETA, GAUSS_DOMAIN)
    assert L.is_homogeneous and L.field_coeffs == GAUSS.field_coeffs
    assert certificate.eta == ETA
    conjugated = conjugate(GAUSS, ETA)
    assert compare_expressions("scalar", conjugated.scalar, ZERO, GAUSS_DOMAIN, 100, 42, 1e-12).passed
    restored = recompose(L, ETA)
    assert compare_expressions("q", restored.scalar, GAUSS.scalar, GAUSS_DOMAIN, 100, 42, 1e-12).passed
    expect_error(NotAKernelElement, factor_to_homogeneous, GAUSS, parse("exp(x)"), GAUSS_DOMAIN)


def test_conjugation_identity():
    L = GAUSS.field_part()
    for text in ["1", "x", "sin(x)", "exp(x)"]:
        report = conjugation_report(GAUSS, L, ETA, parse(text), GAUSS_DOMAIN, 200, 1e-8, 42)
        assert report.passed, report.to_text()
        assert report.equation == "Eq.2 conjugation"
    assert round_trip_report(GAUSS, ETA, GAUSS_DOMAIN, 200, 1e-8, 42).passed


def test_operator_powers():
    assert apply_power(GAUSS, 0, parse("x")) == parse("x")
    expect_error(PowerLimitExceeded, apply_power, GAUSS, 4, parse("x"))
    expect_error(ValueError, apply_power, GAUSS, -1, parse("x"))
    L = GAUSS.field_part()
    for k in (0, 1, 2):
        report = power_report(GAUSS, L, ETA, k, parse("sin(x)"), GAUSS_DOMAIN, 100, 1e-6, 42)
        assert report.passed, report.to_text()


def test_kernel_power():
    eta = parse("x^-1.5")
    assert check_kernel(RADIAL, eta, CUBE).max_residual <= 1e-8
    squared_operator, squared = kernel_power(eta, 2, RADIAL)
    assert squared_operator.scalar == Const(3.0)
    assert check_kernel(squared_operator, squared, CUBE).max_residual <= 1e-8
    root_operator, root = kernel_power(eta, 0.5, RADIAL, use_abs=True)
    assert root_operator.scalar == Const(0.75)
    assert check_kernel(root_operator, root, CUBE).max_residual <= 1e-8
    error = expect_error(NonIntegerExponentWithoutAbs, kernel_power, eta, 0.5, RADIAL)
    assert error.alpha == 0.5


def test_scalar_shift():
    shifted = scalar_shift(GAUSS, Const(1.0))
    assert compare_expressions("q", shifted.scalar, parse("2*x + 1"), GAUSS_DOMAIN, 50, 42, 1e-12).passed
    L = GAUSS.field_part()
    for text in ["x", "sin(x)"]:
        assert shift_report(GAUSS, L, ETA, Const(1.0), parse(text), GAUSS_DOMAIN, 200, 1e-8, 42).passed


def test_eigen_shift():
    for lam in (0.0, 1.0, -2.5):
        psi = parse(f"exp({lam}*x)")
        base, shifted = eigen_report(GAUSS, ETA, psi, lam, GAUSS_DOMAIN, 200, 1e-8, 42)
        assert base.passed and shifted.passed
        assert shifted.equation == "Eq.8 eigen-shift"
    base, shifted = eigen_report(GAUSS, ETA, parse("exp(x)"), 2.0, GAUSS_DOMAIN, 200, 1e-8, 42)
    assert not base.passed and not shifted.passed


def test_negative_power_is_rejected():
    error = expect_error(NegativePower, apply_power, GAUSS, -1, parse("x"))
    assert error.k == -1


def test_conjugation_commutes_with_scalar_shift():
    cases = [
        (GAUSS, ETA, GAUSS_DOMAIN, ["1", "x^2", "cos(x)"]),
        (RADIAL, parse("x^-1.5"), CUBE, ["1", "x*y", "sin(z) - y"]),
        (RADIAL, parse("exp(x/y)"), CUBE, ["z^2", "ln(x)"]),
    ]
    for D, eta, d, shifts in cases:
        for text in shifts:
            Q = parse(text)
            left = conjugate(scalar_shift(D, Q), eta)
            right = scalar_shift(conjugate(D, eta), Q)
            assert left.field_coeffs == right.field_coeffs
            report = compare_expressions(f"commute[{text}]", left.scalar, right.scalar, d, 100, 42, 1e-12)
            assert report.passed, report.to_text()


def test_power_node_budget_warning():
    err = io.StringIO()
    with redirect_stderr(err):
        result = apply_power(GAUSS, 3, parse("sin(x)*exp(x^2)"), node_budget=5)
    assert "⚠️" in err.getvalue() and "budget 5" in err.getvalue()
    assert node_count(result) > 5
    quiet = io.StringIO()
    with redirect_stderr(quiet):
        apply_power(GAUSS, 1, parse("x"))
    assert quiet.getvalue() == ""



def main():
    print("🧪 TESTING OPERATOR ALGEBRA")
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
