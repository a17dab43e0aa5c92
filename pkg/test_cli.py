#!/usr/bin/env python3
"""
Test Lagrange-Ops Command Line
Problem-file loading, command dispatch, exit codes and record output
"""

import io
import json
import os
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from errors import ConfigurationError, DuplicateName, ProblemFileError, UnknownCoordinate
from expr_core import ONE, Const, parse
from lagrange_ops import RunFlags, load_problem, main, run
from numeric_verify import RECORD_FIELDS
from settings import VerificationSettings, default_settings

FIXTURES = Path(os.path.dirname(os.path.abspath(__file__))) / "fixtures"
GAUSSIAN = FIXTURES / "gaussian.txt"
RADIAL_TOTAL = FIXTURES / "radial_total.txt"

HEADER = """coords: x y z
field: x | y | z
q: 1
b: 3*x^2
box: x 0.5 2 | y 0.5 2 | z 0.5 2
"""


def expect_error(error_type, fn, *args, **kwargs):
    """Return the error fn raises; fail if it raises nothing."""
    try:
        fn(*args, **kwargs)
    except error_type as error:
        return error
    raise AssertionError(f"expected {error_type.__name__}")


def write_problem(directory, text, name="problem.txt"):
    path = Path(directory) / name
    path.write_text(text, encoding="utf-8")
    return path


def run_quietly(command, spec, flags=RunFlags()):
    out = io.StringIO()
    with redirect_stderr(io.StringIO()):
        code, reports = run(command, spec, flags, out=out)
    return code, reports, out.getvalue()


def main_quietly(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def test_load_radial_fixture():
    spec = load_problem(RADIAL_TOTAL, VerificationSettings())
    assert spec.coords.names == ("x", "y", "z")
    assert spec.operator.scalar == ONE
    assert spec.rhs == parse("3*x^2")
    assert list(spec.candidates) == ["chi0", "chi1", "chi2", "chi3"]
    assert list(spec.templates) == ["f", "g", "h"]
    assert spec.settings.samples == 200 and spec.settings.seed == 42
    assert spec.domain.box == ((0.5, 2.0),) * 3
    assert spec.name == "radial_total"


def test_defaults_and_homogeneous_operator():
    with tempfile.TemporaryDirectory() as tmp:
        spec = load_problem(write_problem(tmp, "coords: x y\nfield: x | y\nbox: x 1 2 | y 1 2\n"), VerificationSettings())
    assert spec.operator.is_homogeneous
    assert spec.is_reduced
    assert spec.shift == Const(1.0)
    s = spec.settings
    assert (s.samples, s.tol, s.seed, s.step, s.t_end) == (200, 1e-8, 42, 1e-3, 1.0)


def test_set_lines_and_guards():
    text = HEADER + "guard: nonzero x - 1 1e-3\nguard: positive y\nset samples 50\nset tol 1e-6\nset lambdas 2 3\n"
    with tempfile.TemporaryDirectory() as tmp:
        spec = load_problem(write_problem(tmp, text), VerificationSettings())
    assert spec.settings.samples == 50 and spec.settings.tol == 1e-6
    assert spec.lambdas == (2.0, 3.0)
    kinds = [(g.kind, g.epsilon) for g in spec.domain.guards]
    assert kinds == [("nonzero", 1e-3), ("positive", 1e-6)]
    assert spec.domain.guards[0].expr == parse("x - 1")


def test_problem_file_errors():
    with tempfile.TemporaryDirectory() as tmp:
        error = expect_error(UnknownCoordinate, load_problem, write_problem(tmp, HEADER + "candidate c: x + w\n"))
        assert error.name == "w"
        expect_error(DuplicateName, load_problem, write_problem(tmp, HEADER + "candidate c: x\nkernel c: 1/x\n"))
        error = expect_error(ProblemFileError, load_problem, write_problem(tmp, HEADER + "candidate c: x +* 2\n"))
        assert error.line == 6
        error = expect_error(ProblemFileError, load_problem, write_problem(tmp, "field: x\n"))
        assert error.line == 1
        expect_error(ProblemFileError, load_problem, write_problem(tmp, "coords: x y\nfield: x\nbox: x 0 1 | y 0 1\n"))
        expect_error(ProblemFileError, load_problem, write_problem(tmp, "coords: x\nfield: 1\n"))
        expect_error(ProblemFileError, load_problem, write_problem(tmp, "coords: x\nfield: 1\nbox: x 2 1\n"))
        expect_error(ProblemFileError, load_problem, write_problem(tmp, HEADER + "set samples -3\n"))
        expect_error(ProblemFileError, load_problem, write_problem(tmp, HEADER + "template f: u3\n"))
        expect_error(ProblemFileError, load_problem, write_problem(tmp, HEADER + "colour: blue\n"))
        expect_error(ProblemFileError, load_problem, Path(tmp) / "missing.txt")


def test_verify_kernel_on_gaussian():
    spec = load_problem(GAUSSIAN, VerificationSettings())
    code, reports, text = run_quietly("verify-kernel", spec, RunFlags(eta="eta1"))
    assert code == 0
    assert len(reports) == 1 and reports[0].passed
    assert "Eq.1 kernel element" in text


def test_cross_ratio_identity_template():
    spec = load_problem(RADIAL_TOTAL, VerificationSettings())
    code, reports, text = run_quietly("cross-ratio", spec, RunFlags(f="u1"))
    assert code == 0
    assert "Eq.24 cross-ratio solution" in text
    assert "phi1 = x/y" in text and "phi2 = x/z" in text
    assert "chi = x^2 + " in text
    assert all(report.passed for report in reports)


def test_failing_candidate_exits_one():
    with tempfile.TemporaryDirectory() as tmp:
        spec = load_problem(write_problem(tmp, HEADER + "candidate junk: x*y\n"), VerificationSettings())
    code, reports, text = run_quietly("verify-solution", spec, RunFlags(candidate="junk"))
    assert code == 1
    assert reports[0].max_residual > 1.0
    assert "max_residual:" in text and "Eq.10 totally linear" in text


def test_input_errors_exit_two():
    spec = load_problem(GAUSSIAN, VerificationSettings())
    code, _, _ = run_quietly("verify-kernel", spec, RunFlags(eta="nope"))
    assert code == 2
    code, _, _ = run_quietly("build-general", spec)
    assert code == 2
    code, _, _ = run_quietly("factor", spec, RunFlags(k=7))
    assert code == 2
    code, _, _ = run_quietly("teleport", spec)
    assert code == 2
    code, _, _ = run_quietly("cross-ratio", load_problem(RADIAL_TOTAL, VerificationSettings()), RunFlags(f="u1 +"))
    assert code == 2


def test_main_exit_codes():
    code, _, err = main_quietly(["verify-kernel", "--problem", str(FIXTURES / "absent.txt")])
    assert code == 2 and "❌" in err
    code, _, _ = main_quietly(["verify-kernel", "--problem", str(GAUSSIAN), "--samples", "0"])
    assert code == 2
    code, _, _ = main_quietly(["no-such-command", "--problem", str(GAUSSIAN)])
    assert code == 2
    code, out, _ = main_quietly(["eigen-shift", "--problem", str(GAUSSIAN), "--lambda", "1.5", "--samples", "50"])
    assert code == 0
    assert "eigen-shift[lambda=1.5]" in out


def test_json_records():
    code, out, _ = main_quietly(["verify-solution", "--problem", str(RADIAL_TOTAL), "--json", "--samples", "40", "--seed", "3"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4
    for line in lines:
        record = json.loads(line)
        assert tuple(record) == RECORD_FIELDS
        assert record["status"] == "pass"
        assert record["samples_requested"] == 40 and record["seed"] == 3


def test_flags_override_file():
    code, out, _ = main_quietly(["verify-kernel", "--problem", str(RADIAL_TOTAL), "--json", "--tol", "1e-6"])
    assert code == 0
    assert all(json.loads(line)["tolerance"] == 1e-6 for line in out.strip().splitlines())


def test_factor_reports_every_corollary():
    spec = load_problem(GAUSSIAN, VerificationSettings(samples=60))
    code, reports, text = run_quietly("factor", spec)
    assert code == 0, [r.check for r in reports if not r.passed]
    equations = {report.equation for report in reports}
    for label in ("Eq.1 kernel element", "Eq.2 conjugation", "Eq.3 factorization (both directions)",
                  "Eq.4 operator power", "Eq.5 kernel power", "Eq.6 kernel power of |eta|", "Eq.7 scalar shift"):
        assert label in equations, label
    assert "eta^-1 (L+q) eta = ∂/∂x" in text


def test_html_report():
    spec = load_problem(GAUSSIAN, VerificationSettings(samples=30))
    with tempfile.TemporaryDirectory() as tmp:
        target = Path(tmp) / "report.html"
        code, _, _ = run_quietly("verify-kernel", spec, RunFlags(html=str(target)))
        html = target.read_text(encoding="utf-8")
    assert code == 0
    assert "Eq.1 kernel element" in html
    assert "<li>" in html or "<br>" in html


def test_bad_numeric_flags_exit_two():
    code, _, err = main_quietly(["factor", "--problem", str(GAUSSIAN), "--k", "-1", "--samples", "30"])
    assert code == 2 and "negative" in err
    code, _, err = main_quietly(["eigen-shift", "--problem", str(GAUSSIAN), "--lambda", "nan"])
    assert code == 2 and "--lambda" in err
    code, _, err = main_quietly(["factor", "--problem", str(GAUSSIAN), "--alpha", "nan"])
    assert code == 2 and "--alpha" in err
    code, _, _ = main_quietly(["characteristics", "--problem", str(RADIAL_TOTAL), "--t-end", "nan"])
    assert code == 2


def test_deeply_nested_expression_exits_two():
    nested = "(" * 3000 + "x" + ")" * 3000
    with tempfile.TemporaryDirectory() as tmp:
        path = write_problem(tmp, HEADER + f"candidate deep: {nested}\n")
        error = expect_error(ProblemFileError, load_problem, path, VerificationSettings())
        assert "nested too deeply" in str(error)
        code, _, err = main_quietly(["verify-solution", "--problem", str(path)])
    assert code == 2 and "nested too deeply" in err


def test_html_into_missing_directory_exits_two():
    spec = load_problem(GAUSSIAN, VerificationSettings(samples=30))
    with tempfile.TemporaryDirectory() as tmp:
        target = Path(tmp) / "missing" / "report.html"
        code, reports, _ = run_quietly("verify-kernel", spec, RunFlags(html=str(target)))
        assert not target.exists()
    assert code == 2
    assert reports and reports[0].passed


def test_large_transport_stays_finite():
    # the integral of q reaches 770 along the flow, past what exp() can hold
    problem = "coords: x\nfield: 1\nq: 700\nbox: x -1 -0.5\nkernel e: exp(-700*x)\nset t_end 1.1\nset flow_seeds 5\n"
    with tempfile.TemporaryDirectory() as tmp:
        spec = load_problem(write_problem(tmp, problem), VerificationSettings())
    code, reports, _ = run_quietly("characteristics", spec)
    assert code in (0, 1)
    assert [report.check for report in reports] == ["transport[e]"]
    assert reports[0].max_residual is not None


def test_blow_up_flow_is_truncated():
    # dy/dt = y^2 leaves every bounded box in finite time
    problem = "coords: x y\nfield: 1 | y^2\nbox: x 0 1 | y 0.1 2\ninvariant phi: x + 1/y\nkernel k: exp(x + 1/y)\n"
    with tempfile.TemporaryDirectory() as tmp:
        spec = load_problem(write_problem(tmp, problem), VerificationSettings(flow_seeds=10))
    code, reports, _ = run_quietly("characteristics", spec)
    assert code in (0, 1)
    assert [report.check for report in reports] == ["invariance[phi]", "transport[k]"]
    for report in reports:
        assert report.max_residual is not None, report.to_text()
        assert "trajectories truncated" in report.detail


def test_cross_ratio_with_fewer_particulars():
    problem = HEADER + "candidate chi0: x^2\ncandidate chi1: x^2 + 1/x\ncandidate chi2: x^2 + 1/y\ntemplate f: u1\n"
    with tempfile.TemporaryDirectory() as tmp:
        spec = load_problem(write_problem(tmp, problem), VerificationSettings(samples=60))
    code, reports, text = run_quietly("cross-ratio", spec)
    assert code == 0, [report.to_text() for report in reports if not report.passed]
    assert "phi1 = x/y" in text
    assert "phi2" not in text
    code, _, _ = run_quietly("cross-ratio", spec, RunFlags(f="u1 + u2"))
    assert code == 2


def test_malformed_environment_exits_two():
    previous = os.environ.get("LAGRANGE_OPS_SAMPLES")
    os.environ["LAGRANGE_OPS_SAMPLES"] = "many"
    try:
        expect_error(ConfigurationError, default_settings)
        code, _, err = main_quietly(["verify-kernel", "--problem", str(GAUSSIAN)])
    finally:
        if previous is None:
            del os.environ["LAGRANGE_OPS_SAMPLES"]
        else:
            os.environ["LAGRANGE_OPS_SAMPLES"] = previous
    assert code == 2
    assert "LAGRANGE_OPS_SAMPLES" in err



def main_tests():
    print("🧪 TESTING COMMAND LINE")
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
    sys.exit(main_tests())
