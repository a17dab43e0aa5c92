#!/usr/bin/env python3
"""
Lagrange-Ops Command Line
Problem-file loading, command dispatch and report output for first-order
totally linear equations (L+q)chi = b

Usage:
    python lagrange_ops.py all --problem fixtures/radial_total.txt
    python lagrange_ops.py cross-ratio --problem fixtures/radial_total.txt --f "u1"
"""

import argparse
import itertools
import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from errors import (
    DependentInvariants,
    DomainError,
    DuplicateName,
    EtaVanishes,
    IdenticalParticulars,
    LagrangeOpsError,
    MissingDeclaration,
    NotAKernelElement,
    ProblemFileError,
    UnknownCoordinate,
    UnknownName,
)
from expr_core import (
    ONE,
    ZERO,
    Const,
    CoordinateSystem,
    Exp,
    Expr,
    Mul,
    Sin,
    Sub,
    Var,
    normalize,
    parse,
    substitute,
    to_text,
    variables,
)
from numeric_verify import (
    GUARD_KINDS,
    Domain,
    Guard,
    VerificationReport,
    compare_expressions,
    drift_report,
    flows,
    independence_rank,
    invariance_drift_on,
    oracle_agreement,
    residual_max,
    transport_drift_on,
)
from operator_algebra import (
    DifferentialOperator,
    conjugation_report,
    eigen_report,
    factor_to_homogeneous,
    kernel_power,
    kernel_report,
    power_report,
    recompose,
    round_trip_report,
    shift_report,
)
from report_formatting import format_report, format_section, record_stream, render_html, report_markdown, summary_table
from settings import VerificationSettings, default_settings
from solution_builder import (
    InvariantBasis,
    SolutionTemplate,
    build_cross_ratio_family,
    further_solution_ratio,
    general_reduced,
    general_total,
    invariants_from_kernel,
    linear_combination,
    product,
    ratio,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

COMMANDS = (
    "verify-kernel",
    "verify-solution",
    "factor",
    "build-general",
    "cross-ratio",
    "eigen-shift",
    "independence",
    "characteristics",
    "closure",
    "oracle",
    "all",
)
ALL_SEQUENCE = COMMANDS[:-1]

EIGEN_VARIABLE = "lam"
DEFAULT_LAMBDAS = (0.0, 1.0, -2.5)
DEFAULT_ALPHA = 0.5
CLOSURE_DRAWS = 5

DECLARATION = re.compile(r"^(?P<key>[a-z_]+)(?:\s+(?P<name>[A-Za-z_][A-Za-z_0-9]*))?\s*:\s*(?P<value>.*)$")
SET_LINE = re.compile(r"^set\s+(?P<key>[a-z_]+)\s+(?P<value>.+)$")
NAMED_KEYS = ("candidate", "kernel", "invariant", "eigenfunction", "template")
PLAIN_KEYS = ("coords", "field", "q", "b", "box", "guard", "shift")
REPEATABLE_KEYS = ("guard",)


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """A parsed problem file: operator, right-hand side, named expressions and domain."""

    name: str
    coords: CoordinateSystem
    operator: DifferentialOperator
    domain: Domain
    settings: VerificationSettings
    rhs: Expr = ZERO
    candidates: Dict[str, Expr] = field(default_factory=dict)
    kernels: Dict[str, Expr] = field(default_factory=dict)
    invariants: Dict[str, Expr] = field(default_factory=dict)
    eigenfunctions: Dict[str, Expr] = field(default_factory=dict)
    templates: Dict[str, SolutionTemplate] = field(default_factory=dict)
    shift: Expr = ONE
    lambdas: Tuple[float, ...] = DEFAULT_LAMBDAS

    @property
    def is_reduced(self) -> bool:
        return self.rhs == ZERO

    def expression(self, name: str) -> Expr:
        for table in (self.candidates, self.kernels, self.invariants):
            if name in table:
                return table[name]
        raise UnknownName(name)

    def with_settings(self, settings: VerificationSettings) -> "ProblemSpec":
        return replace(self, settings=settings)


class _ProblemReader:
    """Line-by-line accumulator behind load_problem."""

    def __init__(self, path: Path):
        self.path = path
        self.coords: Optional[CoordinateSystem] = None
        self.field: Optional[Tuple[Expr, ...]] = None
        self.scalar: Expr = ZERO
        self.rhs: Expr = ZERO
        self.shift: Expr = ONE
        self.box: Optional[Tuple[Tuple[float, float], ...]] = None
        self.guards: List[Tuple[str, Expr, Optional[float]]] = []
        self.named: Dict[str, Dict[str, Expr]] = {key: {} for key in NAMED_KEYS if key != "template"}
        self.templates: Dict[str, Expr] = {}
        self.settings: Dict[str, Any] = {}
        self.lambdas: Tuple[float, ...] = DEFAULT_LAMBDAS
        self.lines: Dict[str, int] = {}
        self.last_line = 0

    def read(self, text: str, base: VerificationSettings) -> ProblemSpec:
        for lineno, raw in enumerate(text.splitlines(), 1):
            self.last_line = lineno
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                self._declare(line, lineno)
            except (UnknownCoordinate, DuplicateName, ProblemFileError):
                raise
            except (LagrangeOpsError, ValueError) as e:
                raise ProblemFileError(str(e), lineno, self.path) from None
            except RecursionError:
                raise ProblemFileError("expression is nested too deeply", lineno, self.path) from None
        return self._finish(base)

    def _error(self, message: str, lineno: int) -> ProblemFileError:
        return ProblemFileError(message, lineno, self.path)

    def _declare(self, line: str, lineno: int):
        set_match = SET_LINE.match(line)
        if set_match:
            self._set(set_match["key"], set_match["value"].split(), lineno)
            return
        match = DECLARATION.match(line)
        if not match:
            raise self._error(f"unrecognised declaration {line!r}", lineno)
        key, name, value = match["key"], match["name"], match["value"].strip()
        if key in NAMED_KEYS:
            if name is None:
                raise self._error(f"'{key}' needs a name, as in '{key} NAME: expr'", lineno)
            self._named(key, name, value, lineno)
        elif key in PLAIN_KEYS:
            if name is not None:
                raise self._error(f"'{key}' does not take a name", lineno)
            if key in self.lines and key not in REPEATABLE_KEYS:
                raise self._error(f"'{key}' already declared on line {self.lines[key]}", lineno)
            if key != "coords" and self.coords is None:
                raise self._error(f"'{key}' must come after 'coords'", lineno)
            self.lines[key] = lineno
            getattr(self, f"_{key}")(value, lineno)
        else:
            raise self._error(f"unknown declaration '{key}'", lineno)

    def _expr(self, text: str, lineno: int, extra: Sequence[str] = ()) -> Expr:
        e = parse(text)
        stray = variables(e) - set(self.coords.names) - set(extra)
        if stray:
            raise UnknownCoordinate(sorted(stray)[0], f"{self.path}:{lineno}")
        return e

    def _coords(self, value: str, lineno: int):
        self.coords = CoordinateSystem(tuple(value.split()))

    def _field(self, value: str, lineno: int):
        parts = value.split("|")
        if len(parts) != len(self.coords):
            raise self._error(f"'field' needs {len(self.coords)} '|'-separated coefficient(s), got {len(parts)}", lineno)
        self.field = tuple(self._expr(part, lineno) for part in parts)

    def _q(self, value: str, lineno: int):
        self.scalar = self._expr(value, lineno)

    def _b(self, value: str, lineno: int):
        self.rhs = self._expr(value, lineno)

    def _shift(self, value: str, lineno: int):
        self.shift = self._expr(value, lineno)

    def _box(self, value: str, lineno: int):
        intervals: Dict[str, Tuple[float, float]] = {}
        for part in value.split("|"):
            tokens = part.split()
            if len(tokens) != 3:
                raise self._error(f"box entries look like 'x 0.5 2', got {part.strip()!r}", lineno)
            name, lo, hi = tokens
            if name not in self.coords:
                raise UnknownCoordinate(name, f"{self.path}:{lineno}")
            if name in intervals:
                raise self._error(f"box gives '{name}' twice", lineno)
            intervals[name] = (float(lo), float(hi))
        missing = [name for name in self.coords if name not in intervals]
        if missing:
            raise self._error(f"box has no interval for {', '.join(missing)}", lineno)
        self.box = tuple(intervals[name] for name in self.coords)

    def _guard(self, value: str, lineno: int):
        tokens = value.split()
        if not tokens or tokens[0] not in GUARD_KINDS:
            raise self._error(f"guard lines start with one of {', '.join(GUARD_KINDS)}", lineno)
        rest = tokens[1:]
        if not rest:
            raise self._error("guard needs an expression", lineno)
        epsilon = None
        if len(rest) >= 2 and _is_number(rest[-1]):
            try:
                expr = self._expr(" ".join(rest[:-1]), lineno)
                epsilon = float(rest[-1])
            except LagrangeOpsError:
                expr = self._expr(" ".join(rest), lineno)
        else:
            expr = self._expr(" ".join(rest), lineno)
        self.guards.append((tokens[0], expr, epsilon))

    def _named(self, key: str, name: str, value: str, lineno: int):
        if self.coords is None:
            raise self._error(f"'{key}' must come after 'coords'", lineno)
        if key == "template":
            if name in self.templates:
                raise DuplicateName(f"template '{name}' declared twice ({self.path}:{lineno})")
            body = parse(value)
            SolutionTemplate.standard(body, len(self.coords) - 1)
            self.templates[name] = body
            return
        if any(name in table for table in self.named.values()):
            raise DuplicateName(f"'{name}' declared twice ({self.path}:{lineno})")
        extra = (EIGEN_VARIABLE,) if key == "eigenfunction" else ()
        self.named[key][name] = self._expr(value, lineno, extra)

    def _set(self, key: str, values: List[str], lineno: int):
        if key == "lambdas":
            self.lambdas = tuple(float(v) for v in values)
            return
        if len(values) != 1:
            raise self._error(f"'set {key}' takes exactly one value", lineno)
        self.settings[key] = VerificationSettings.coerce(key, values[0])

    def _finish(self, base: VerificationSettings) -> ProblemSpec:
        for key in ("coords", "field", "box"):
            if key not in self.lines:
                raise self._error(f"missing '{key}' declaration", self.last_line)
        try:
            settings = base.merged(**self.settings)
        except LagrangeOpsError as e:
            raise self._error(str(e), self.last_line) from None
        try:
            operator = DifferentialOperator(self.coords, self.field, self.scalar)
        except LagrangeOpsError as e:
            raise self._error(str(e), self.lines["field"]) from None
        guards = [
            Guard(expr, kind, epsilon if epsilon is not None else settings.guard_epsilon)
            for kind, expr, epsilon in self.guards
        ]
        try:
            domain = Domain(self.coords, self.box, tuple(guards))
        except ValueError as e:
            raise self._error(str(e), self.lines["box"]) from None
        arity = len(self.coords) - 1
        return ProblemSpec(
            name=self.path.stem,
            coords=self.coords,
            operator=operator,
            domain=domain,
            settings=settings,
            rhs=normalize(self.rhs),
            candidates=self.named["candidate"],
            kernels=self.named["kernel"],
            invariants=self.named["invariant"],
            eigenfunctions=self.named["eigenfunction"],
            templates={name: SolutionTemplate.standard(body, arity) for name, body in self.templates.items()},
            shift=self.shift,
            lambdas=self.lambdas,
        )


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_problem(path: Any, base: Optional[VerificationSettings] = None) -> ProblemSpec:
    """Parse and validate a problem file; errors carry the line number."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ProblemFileError(f"cannot read problem file: {e}", 0, path) from None
    return _ProblemReader(path).read(text, base if base is not None else default_settings())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunFlags:
    json: bool = False
    eta: Optional[str] = None
    candidate: Optional[str] = None
    f: Optional[str] = None
    lam: Optional[float] = None
    alpha: Optional[float] = None
    k: Optional[int] = None
    html: Optional[str] = None


class ProblemRunner:
    """Runs commands against one problem, collecting reports and text blocks in order."""

    def __init__(self, spec: ProblemSpec, flags: RunFlags = RunFlags()):
        self.spec = spec
        self.flags = flags
        self.settings = spec.settings
        self.reports: List[VerificationReport] = []
        self.blocks: List[str] = []
        self.commands: Dict[str, Callable[[], None]] = {
            "verify-kernel": self.verify_kernel,
            "verify-solution": self.verify_solution,
            "factor": self.factor,
            "build-general": self.build_general,
            "cross-ratio": self.cross_ratio,
            "eigen-shift": self.eigen_shift,
            "independence": self.independence,
            "characteristics": self.characteristics,
            "closure": self.closure,
            "oracle": self.oracle,
            "all": self.run_all,
        }

    @property
    def D(self) -> DifferentialOperator:
        return self.spec.operator

    @property
    def L(self) -> DifferentialOperator:
        return self.spec.operator.field_part()

    def execute(self, command: str):
        self.commands[command]()

    # -- bookkeeping -------------------------------------------------------

    def _record(self, report: VerificationReport):
        self.reports.append(report)
        self.blocks.append(format_report(report))

    def _note(self, title: str, lines: Sequence[str]):
        self.blocks.append(format_section(title, lines))

    def _failed(self, check: str, equation: str, error: Exception, candidate: str = "") -> VerificationReport:
        s = self.settings
        return VerificationReport(
            check=check,
            max_residual=None,
            tolerance=s.tol,
            samples_requested=s.samples,
            samples_accepted=0,
            seed=s.seed,
            domain=self.spec.domain.describe(),
            detail=f"{type(error).__name__}: {error}",
            equation=equation,
            operator=self.D.describe(),
            candidate=candidate,
        )

    def _compare(self, check: str, lhs: Expr, rhs: Expr, equation: str, candidate: Expr, d: Optional[Domain] = None, tol: Optional[float] = None) -> VerificationReport:
        s = self.settings
        return compare_expressions(
            check, lhs, rhs, d if d is not None else self.spec.domain, s.samples, s.seed,
            s.tol if tol is None else tol,
            equation=equation, operator=self.D.describe(), candidate=to_text(candidate), workers=s.workers,
        )

    def _rank_report(self, check: str, equation: str, exprs: Sequence[Expr], d: Domain) -> VerificationReport:
        s = self.settings
        rank, point_ranks = independence_rank(exprs, d, s.rank_points, s.seed)
        return VerificationReport(
            check=check,
            max_residual=float(len(exprs) - rank),
            tolerance=0.0,
            samples_requested=s.rank_points,
            samples_accepted=len(point_ranks),
            seed=s.seed,
            domain=d.describe(),
            detail=f"rank {rank}/{len(exprs)}, per-point ranks {list(point_ranks)}",
            equation=equation,
            operator=self.L.describe(),
            candidate=", ".join(to_text(e) for e in exprs),
        )

    # -- resolution --------------------------------------------------------

    def _eta(self) -> Tuple[str, Expr]:
        if self.flags.eta:
            return self.flags.eta, self.spec.expression(self.flags.eta)
        if not self.spec.kernels:
            raise MissingDeclaration("no kernel element declared; add 'kernel NAME: expr' or pass --eta")
        return next(iter(self.spec.kernels.items()))

    def _eta_domain(self, eta: Expr) -> Domain:
        d = self.spec.domain
        return d.with_guard(Guard(eta, "nonzero", d.epsilon))

    def _test_functions(self) -> List[Expr]:
        names = self.spec.coords.names
        x = Var(names[0])
        functions: List[Expr] = [ONE, x, Sin(x), Exp(x)]
        if len(names) > 1:
            functions.append(Mul(x, Var(names[1])))
        return functions

    def _templates(self) -> Dict[str, SolutionTemplate]:
        if self.flags.f:
            if self.flags.f in self.spec.templates:
                return {self.flags.f: self.spec.templates[self.flags.f]}
            try:
                template = SolutionTemplate.standard(parse(self.flags.f), len(self.spec.coords) - 1)
            except ValueError as e:
                if isinstance(e, LagrangeOpsError):
                    raise
                raise UnknownName(self.flags.f, "template") from None
            return {self.flags.f: template}
        if not self.spec.templates:
            raise MissingDeclaration("no template declared; add 'template NAME: expr' or pass --f")
        return dict(self.spec.templates)

    def _basis(self, eta_name: str, eta: Expr) -> InvariantBasis:
        spec, s = self.spec, self.settings
        n = len(spec.coords)
        if len(spec.invariants) >= n - 1:
            return InvariantBasis.verified(list(spec.invariants.values())[: n - 1], spec.coords, spec.domain, s.rank_points, s.seed)
        others = [e for name, e in spec.kernels.items() if name != eta_name]
        if len(others) >= n - 1:
            return invariants_from_kernel(eta, others[: n - 1], spec.coords, self._eta_domain(eta), s.rank_points, s.seed)
        raise MissingDeclaration(f"an invariant basis needs {n - 1} invariants or {n} kernel elements")

    # -- commands ----------------------------------------------------------

    def verify_kernel(self):
        s = self.settings
        names = [self.flags.eta] if self.flags.eta else list(self.spec.kernels)
        if not names:
            raise MissingDeclaration("no kernel element declared; add 'kernel NAME: expr' or pass --eta")
        for name in names:
            self._record(kernel_report(self.D, self.spec.expression(name), self.spec.domain, s.samples, s.tol, s.seed, check=f"kernel[{name}]"))

    def verify_solution(self):
        s = self.settings
        names = [self.flags.candidate] if self.flags.candidate else list(self.spec.candidates)
        if not names:
            raise MissingDeclaration("no candidate declared; add 'candidate NAME: expr' or pass --candidate")
        for name in names:
            self._record(residual_max(
                self.D, self.spec.expression(name), self.spec.rhs, self.spec.domain,
                s.samples, s.seed, s.tol, check=f"solution[{name}]", workers=s.workers,
            ))

    def factor(self):
        s, d = self.settings, self.spec.domain
        name, eta = self._eta()
        self._record(kernel_report(self.D, eta, d, s.samples, s.tol, s.seed, check=f"kernel[{name}]"))
        try:
            L, certificate = factor_to_homogeneous(self.D, eta, d, s.samples, s.tol, s.seed)
        except (NotAKernelElement, EtaVanishes, DomainError) as error:
            self._record(self._failed(f"factor[{name}]", "Eq.3 factorization", error, to_text(eta)))
            return

        self._note(f"Eq.3 factorization with {name}", [
            f"L + q = {self.D.describe()}",
            f"eta = {to_text(eta)}",
            f"eta^-1 (L+q) eta = {L.describe()}",
            f"eta L eta^-1 = {recompose(L, eta).describe()}",
            f"min |eta| = {certificate.min_abs_eta:.6e}",
        ])
        d_eta = self._eta_domain(eta)
        functions = self._test_functions()
        for psi in functions:
            self._record(conjugation_report(self.D, L, eta, psi, d_eta, s.samples, s.tol, s.seed))
        self._record(round_trip_report(self.D, eta, d_eta, s.samples, s.tol, s.seed))

        powers = [self.flags.k] if self.flags.k is not None else range(min(2, s.max_power) + 1)
        for k in powers:
            for psi in functions[1:3]:
                self._record(power_report(self.D, L, eta, k, psi, d_eta, s.samples, s.power_tol, s.seed, s.max_power))

        alpha = self.flags.alpha if self.flags.alpha is not None else DEFAULT_ALPHA
        for exponent, use_abs, equation in ((2.0, False, "Eq.5 kernel power"), (alpha, True, "Eq.6 kernel power of |eta|")):
            operator, power = kernel_power(eta, exponent, self.D, use_abs)
            self._record(kernel_report(operator, power, d_eta, s.samples, s.tol, s.seed, check=f"kernel-power[alpha={exponent:g}]", equation=equation))

        for psi in functions[1:3]:
            self._record(shift_report(self.D, L, eta, self.spec.shift, psi, d_eta, s.samples, s.tol, s.seed))

    def build_general(self):
        spec = self.spec
        templates = self._templates()
        chi0_name = None
        if not spec.is_reduced:
            chi0_name = self.flags.candidate or next(iter(spec.candidates), None)
            if chi0_name is None:
                raise MissingDeclaration("b is not zero, so a particular solution ('candidate') is needed")
        name, eta = self._eta()
        try:
            basis = self._basis(name, eta)
        except DependentInvariants as error:
            self._record(self._failed("invariant-basis", "Eq.14 invariant basis", error))
            return

        d_eta = self._eta_domain(eta)
        lines = [f"eta = {to_text(eta)}"]
        lines.extend(f"phi{i} = {to_text(phi)}" for i, phi in enumerate(basis.invariants, 1))
        results = []
        for template_name, template in templates.items():
            if spec.is_reduced:
                psi = general_reduced(eta, basis, template)
                lines.append(f"{template}: psi = {to_text(psi)}")
                results.append(self._compare(f"general[{template_name}]", self.D.apply(psi), ZERO, "Eq.13 general solution of (L+q)psi = 0", psi, d_eta))
            else:
                chi = general_total(spec.expression(chi0_name), eta, basis, template)
                lines.append(f"{template}: chi = {to_text(chi)}")
                results.append(self._compare(f"general[{template_name}]", self.D.apply(chi), spec.rhs, "Eq.21 general solution of (L+q)chi = b", chi, d_eta))
        self._note("Eq.13 general solution", lines)
        for report in results:
            self._record(report)

        for other_name, other in spec.kernels.items():
            if other_name == name:
                continue
            quotient = further_solution_ratio(other, eta)
            self._record(self._compare(f"further-solution[{other_name}/{name}]", self.L.apply(quotient), ZERO, "Eq.20 further kernel element", quotient, d_eta))

    def cross_ratio(self):
        spec, s = self.spec, self.settings
        templates = self._templates()
        particulars = list(spec.candidates.items())
        if len(particulars) < 2:
            raise MissingDeclaration("cross-ratio needs at least two candidate particular solutions")
        chosen = particulars[: len(spec.coords) + 1]
        basis = None
        if len(chosen) == 2:
            basis = self._declared_basis()
        for template_name, template in templates.items():
            try:
                family = build_cross_ratio_family([e for _, e in chosen], template, spec.domain, basis, s.samples, s.seed, s.rank_points)
            except (IdenticalParticulars, DependentInvariants) as error:
                self._record(self._failed(f"cross-ratio[{template_name}]", "Eq.24 cross-ratio solution", error))
                continue
            names = [name for name, _ in chosen]
            lines = [f"eta = {names[1]} - {names[0]} = {to_text(family.eta)}"]
            lines.extend(f"phi{i} = {to_text(phi)}" for i, phi in enumerate(family.ratios, 1))
            lines.append(f"{template}: chi = {to_text(family.solution)}")
            self._note("Eq.24 cross-ratio construction", lines)
            self._record(self._compare(f"cross-ratio[{template_name}]", self.D.apply(family.solution), spec.rhs, "Eq.24 cross-ratio solution", family.solution))
            if len(chosen) > 2:
                self._record(self._rank_report(f"cross-ratio-independence[{template_name}]", "Eq.23 ratios of particular differences", family.ratios, self._eta_domain(family.eta)))

    def _declared_basis(self) -> Optional[InvariantBasis]:
        spec, s = self.spec, self.settings
        n = len(spec.coords)
        if len(spec.invariants) < n - 1:
            raise MissingDeclaration(f"two particulars need {n - 1} declared invariants")
        return InvariantBasis.verified(list(spec.invariants.values())[: n - 1], spec.coords, spec.domain, s.rank_points, s.seed)

    def eigen_shift(self):
        spec, s = self.spec, self.settings
        if not spec.eigenfunctions:
            raise MissingDeclaration("no eigenfunction declared; add 'eigenfunction NAME: expr' using 'lam'")
        _, eta = self._eta()
        lambdas = (self.flags.lam,) if self.flags.lam is not None else spec.lambdas
        for psi in spec.eigenfunctions.values():
            for lam in lambdas:
                psi_lambda = normalize(substitute(psi, {EIGEN_VARIABLE: Const(lam)}))
                for report in eigen_report(self.D, eta, psi_lambda, lam, spec.domain, s.samples, s.tol, s.seed):
                    self._record(report)

    def independence(self):
        spec = self.spec
        ran = False
        if spec.invariants:
            self._record(self._rank_report("independence[invariants]", "Eq.14 invariant independence", list(spec.invariants.values()), spec.domain))
            ran = True
        if len(spec.kernels) >= 2:
            name, eta = self._eta()
            quotients = [ratio(other, eta) for other_name, other in spec.kernels.items() if other_name != name]
            self._record(self._rank_report("independence[kernel-ratios]", "Eq.17 kernel ratios", quotients, self._eta_domain(eta)))
            ran = True
        if not ran:
            raise MissingDeclaration("independence needs invariants or two kernel elements")

    def characteristics(self):
        spec, s = self.spec, self.settings
        if not spec.invariants and not spec.kernels:
            raise MissingDeclaration("characteristics needs invariants or kernel elements")
        seeds = spec.domain.sample(s.flow_seeds, s.seed)
        box = spec.domain.safety_box(s.safety_factor)
        trajectories = flows(self.D.field_coeffs, seeds, s.t_end, s.step, self.D.scalar, s.workers, box)
        truncated = sum(trajectory.truncated for trajectory in trajectories)
        detail = f"{truncated} of {len(trajectories)} trajectories truncated" if truncated else ""
        targets = [
            ("invariance", "Eq.12 invariant constant along characteristics", invariance_drift_on, spec.invariants, self.L),
            ("transport", "Eq.11 transport along characteristics", transport_drift_on, spec.kernels, self.D),
        ]
        for label, equation, measure, table, operator in targets:
            for name, e in table.items():
                try:
                    drift = measure(e, trajectories)
                except DomainError as error:
                    self._record(self._failed(f"{label}[{name}]", equation, error, to_text(e)))
                    continue
                self._record(drift_report(
                    f"{label}[{name}]", drift, s.drift_tol, s.flow_seeds, s.seed, spec.domain,
                    equation, to_text(e), operator.describe(), detail,
                ))

    def closure(self):
        spec, s = self.spec, self.settings
        ran = False
        invariants = list(spec.invariants.values())
        if len(invariants) >= 2:
            joint = product(invariants[:2])
            self._record(self._compare("closure-product", self.L.apply(joint), ZERO, "Sec.5 Ker L closed under products", joint))
            ran = True
        kernels = list(spec.kernels.values())
        if len(kernels) >= 2:
            rng = np.random.default_rng(s.seed)
            for i, (c1, c2) in enumerate(rng.uniform(-2.0, 2.0, size=(CLOSURE_DRAWS, 2)), 1):
                combination = linear_combination([(float(c1), kernels[0]), (float(c2), kernels[1])])
                self._record(self._compare(f"closure-combination[{i}]", self.D.apply(combination), ZERO, "Sec.5 Ker(L+q) closed under linear combinations", combination))
            ran = True
        if not spec.is_reduced and len(spec.candidates) >= 2:
            for (name1, chi1), (name2, chi2) in itertools.combinations(spec.candidates.items(), 2):
                difference = normalize(Sub(chi2, chi1))
                self._record(self._compare(f"closure-difference[{name2}-{name1}]", self.D.apply(difference), ZERO, "Sec.5 solutions of (L+q)chi = b form a coset", difference))
            ran = True
        if not ran:
            raise MissingDeclaration("closure needs two invariants, two kernel elements or two candidates")

    def oracle(self):
        spec, s = self.spec, self.settings
        named = {**spec.candidates, **spec.kernels, **spec.invariants}
        if not named:
            raise MissingDeclaration("no named expressions to check against the finite-difference oracle")
        for name, e in named.items():
            self._record(oracle_agreement(self.D, e, spec.domain, s.samples, s.seed, s.fd_tol, s.fd_step, check=f"oracle[{name}]"))

    def run_all(self):
        for command in ALL_SEQUENCE:
            try:
                self.commands[command]()
            except MissingDeclaration as reason:
                print(f"⚠️ {command} skipped: {reason}", file=sys.stderr)

    # -- output ------------------------------------------------------------

    def title(self, command: str) -> str:
        return f"Lagrange-Ops {command}: {self.spec.name}"

    def human_text(self, command: str) -> str:
        spec, s = self.spec, self.settings
        lines = [
            f"🚀 {self.title(command)}",
            "=" * 50,
            f"L + q = {self.D.describe()}",
            f"b = {to_text(spec.rhs)}",
            f"domain: {spec.domain.describe()}",
            f"samples={s.samples} tol={s.tol:g} seed={s.seed} step={s.step:g} t_end={s.t_end:g}",
        ]
        text = "\n".join(lines) + "\n\n" + "\n\n".join(self.blocks)
        if command == "all":
            text += "\n\n" + format_section("Summary", []) + "\n" + summary_table(self.reports)
        failed = sum(not report.passed for report in self.reports)
        if failed:
            text += f"\n\n❌ {failed} of {len(self.reports)} checks failed"
        else:
            text += f"\n\n✅ all {len(self.reports)} checks passed"
        return text


def run(command: str, spec: ProblemSpec, flags: RunFlags = RunFlags(), out: Optional[TextIO] = None) -> Tuple[int, List[VerificationReport]]:
    """Execute one command, print its output and return (exit code, reports)."""
    out = out if out is not None else sys.stdout
    if command not in COMMANDS:
        print(f"❌ unknown command '{command}'", file=sys.stderr)
        return EXIT_INPUT_ERROR, []
    for label, value in (("--lambda", flags.lam), ("--alpha", flags.alpha)):
        if value is not None and not math.isfinite(value):
            print(f"❌ {label} must be a finite number, got {value}", file=sys.stderr)
            return EXIT_INPUT_ERROR, []
    runner = ProblemRunner(spec, flags)
    try:
        runner.execute(command)
    except LagrangeOpsError as error:
        print(f"❌ {command}: {error}", file=sys.stderr)
        return EXIT_INPUT_ERROR, runner.reports
    except RecursionError:
        print(f"❌ {command}: expression is nested too deeply", file=sys.stderr)
        return EXIT_INPUT_ERROR, runner.reports

    if flags.json:
        out.write(record_stream(runner.reports))
    else:
        out.write(runner.human_text(command) + "\n")
    if flags.html:
        document = render_html(report_markdown(runner.title(command), runner.blocks))
        try:
            Path(flags.html).write_text(document, encoding="utf-8")
        except OSError as error:
            print(f"❌ cannot write HTML report: {error}", file=sys.stderr)
            return EXIT_INPUT_ERROR, runner.reports
        print(f"📋 HTML report written to {flags.html}", file=sys.stderr)
    passed = all(report.passed for report in runner.reports)
    return (EXIT_OK if passed else EXIT_CHECK_FAILED), runner.reports


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lagrange-ops",
        description="Verify and construct solutions of first-order totally linear equations (L+q)chi = b",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--problem", required=True, help="problem file")
    parser.add_argument("--json", action="store_true", help="print one JSON record per check and nothing else")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--step", type=float, help="RK4 step for characteristics")
    parser.add_argument("--t-end", dest="t_end", type=float, help="flow time for characteristics")
    parser.add_argument("--eta", help="name of the kernel element to factor with")
    parser.add_argument("--candidate", help="name of a candidate solution")
    parser.add_argument("--f", help="template name or inline template expression over u1, u2, ...")
    parser.add_argument("--lambda", dest="lam", type=float, help="eigenvalue for eigen-shift")
    parser.add_argument("--alpha", type=float, help="exponent for |eta|^alpha")
    parser.add_argument("--k", type=int, help="operator power")
    parser.add_argument("--html", help="also write the report as HTML to this path")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)
    try:
        spec = load_problem(args.problem, default_settings())
        spec = spec.with_settings(spec.settings.merged(
            samples=args.samples, tol=args.tol, seed=args.seed, step=args.step, t_end=args.t_end,
        ))
    except LagrangeOpsError as error:
        print(f"❌ {error}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    flags = RunFlags(
        json=args.json,
        eta=args.eta,
        candidate=args.candidate,
        f=args.f,
        lam=args.lam,
        alpha=args.alpha,
        k=args.k,
        html=args.html,
    )
    code, _ = run(args.command, spec, flags)
    return code


if __name__ == "__main__":
    sys.exit(main())
