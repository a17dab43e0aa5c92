#!/usr/bin/env python3
"""
Numeric Verification for Lagrange-Ops
Guarded domain sampling, residual reports, the finite-difference Lie
derivative oracle, Jacobian rank tests and characteristic-curve flows
"""

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from errors import DomainError, EmptyDomain, SamplingExhausted
from expr_core import (
    ZERO,
    CoordinateSystem,
    Expr,
    Point,
    differentiate,
    evaluate,
    relative_gap,
    to_text,
)

if TYPE_CHECKING:
    from operator_algebra import DifferentialOperator

DEFAULT_GUARD_EPSILON = 1e-6
REJECTION_FACTOR = 100
RANK_PIVOT_THRESHOLD = 1e-8
GUARD_KINDS = ("nonzero", "positive")


@dataclass(frozen=True)
class Guard:
    """Sampling constraint: |g(p)| >= epsilon (nonzero) or g(p) >= epsilon (positive)."""

    expr: Expr
    kind: str = "nonzero"
    epsilon: float = DEFAULT_GUARD_EPSILON

    def __post_init__(self):
        if self.kind not in GUARD_KINDS:
            raise ValueError(f"guard kind must be one of {GUARD_KINDS}, got {self.kind!r}")
        if not self.epsilon > 0:
            raise ValueError(f"guard epsilon must be positive, got {self.epsilon!r}")

    def accepts(self, p: Mapping[str, float]) -> bool:
        try:
            value = evaluate(self.expr, p)
        except DomainError:
            return False
        if self.kind == "nonzero":
            return abs(value) >= self.epsilon
        return value >= self.epsilon

    def describe(self) -> str:
        return f"{self.kind}({to_text(self.expr)}, {self.epsilon:g})"


@dataclass(frozen=True)
class Domain:
    """Coordinate box with guard predicates (E, E_eta, E_phi minus delta)."""

    coords: CoordinateSystem
    box: Tuple[Tuple[float, float], ...]
    guards: Tuple[Guard, ...] = ()

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if len(box) != len(self.coords):
            raise ValueError("the box needs one interval per coordinate")
        for name, (lo, hi) in zip(self.coords, box):
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"interval for {name} must satisfy lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "guards", tuple(self.guards))

    @classmethod
    def cube(cls, coords: CoordinateSystem, lo: float, hi: float, guards: Sequence[Guard] = ()) -> "Domain":
        return cls(coords, tuple((lo, hi) for _ in coords), tuple(guards))

    @property
    def epsilon(self) -> float:
        """Smallest guard epsilon, the threshold for 'away from zero'."""
        if not self.guards:
            return DEFAULT_GUARD_EPSILON
        return min(guard.epsilon for guard in self.guards)

    def with_guard(self, guard: Guard) -> "Domain":
        if guard in self.guards:
            return self
        return Domain(self.coords, self.box, self.guards + (guard,))

    def safety_box(self, factor: float) -> Tuple[Tuple[float, float], ...]:
        """The box widened by factor times its width on every side."""
        return tuple((lo - factor * (hi - lo), hi + factor * (hi - lo)) for lo, hi in self.box)

    def in_box(self, p: Mapping[str, float]) -> bool:
        return all(lo <= p[name] <= hi for name, (lo, hi) in zip(self.coords, self.box))

    def contains(self, p: Mapping[str, float]) -> bool:
        return self.in_box(p) and all(guard.accepts(p) for guard in self.guards)

    def sample(self, n: int, seed: int) -> List[Point]:
        return sample(self, n, seed)

    def describe(self) -> str:
        intervals = " ".join(f"{name}∈[{lo:g},{hi:g}]" for name, (lo, hi) in zip(self.coords, self.box))
        if not self.guards:
            return intervals
        return intervals + " | " + " ".join(guard.describe() for guard in self.guards)


def intersect(d1: Domain, d2: Domain) -> Domain:
    """Interval-wise intersection; guard lists are merged without duplicates."""
    if d1.coords != d2.coords:
        raise ValueError(f"cannot intersect domains over {d1.coords} and {d2.coords}")
    box = []
    for name, (lo1, hi1), (lo2, hi2) in zip(d1.coords, d1.box, d2.box):
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if not lo < hi:
            raise EmptyDomain(f"empty intersection for {name}: [{lo1:g},{hi1:g}] ∩ [{lo2:g},{hi2:g}]")
        box.append((lo, hi))
    guards = list(d1.guards)
    guards.extend(guard for guard in d2.guards if guard not in guards)
    return Domain(d1.coords, tuple(box), tuple(guards))


def sample(d: Domain, n: int, seed: int) -> List[Point]:
    """n uniform points of the box accepted by every guard, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in d.box])
    highs = np.array([hi for _, hi in d.box])
    accepted: List[Point] = []
    rejected = 0
    limit = REJECTION_FACTOR * n
    while len(accepted) < n:
        batch = rng.uniform(lows, highs, size=(n, len(d.coords)))
        for row in batch:
            point = Point(d.coords.names, row.tolist())
            if all(guard.accepts(point) for guard in d.guards):
                accepted.append(point)
                if len(accepted) == n:
                    break
            else:
                rejected += 1
                if rejected > limit:
                    raise SamplingExhausted(n, len(accepted), rejected)
    return accepted


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

RECORD_FIELDS = (
    "check",
    "status",
    "max_residual",
    "tolerance",
    "samples_accepted",
    "samples_requested",
    "seed",
    "domain",
    "detail",
)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one sampled check; passes iff max_residual <= tolerance."""

    check: str
    max_residual: Optional[float]
    tolerance: float
    samples_requested: int
    samples_accepted: int
    seed: int
    domain: str
    detail: str = ""
    equation: str = ""
    operator: str = ""
    candidate: str = ""

    @property
    def passed(self) -> bool:
        return self.max_residual is not None and self.max_residual <= self.tolerance

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_record(self) -> Dict[str, Any]:
        """Machine record with the fixed field order."""
        return {name: getattr(self, name) for name in RECORD_FIELDS}

    def to_text(self) -> str:
        """Line-oriented key: value block."""
        lines = [f"check: {self.check}"]
        if self.equation:
            lines.append(f"equation: {self.equation}")
        if self.operator:
            lines.append(f"operator: {self.operator}")
        if self.candidate:
            lines.append(f"candidate: {self.candidate}")
        residual = "aborted" if self.max_residual is None else f"{self.max_residual:.6e}"
        lines.extend([
            f"status: {self.status}",
            f"max_residual: {residual}",
            f"tolerance: {self.tolerance:g}",
            f"samples: {self.samples_accepted}/{self.samples_requested}",
            f"seed: {self.seed}",
            f"domain: {self.domain}",
        ])
        if self.detail:
            lines.append(f"detail: {self.detail}")
        return "\n".join(lines)


def parallel_map(fn: Callable[[Any], Any], items: Sequence[Any], workers: int = 1) -> List[Any]:
    """Order-preserving map, threaded when workers > 1."""
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def compare_expressions(
    check: str,
    lhs: Expr,
    rhs: Expr,
    d: Domain,
    n: int,
    seed: int,
    tol: float,
    equation: str = "",
    operator: str = "",
    candidate: str = "",
    workers: int = 1,
) -> VerificationReport:
    """Sampled check of lhs = rhs, measuring |lhs - rhs| / max(1, |rhs|)."""
    points = d.sample(n, seed)

    def gap(point: Point) -> float:
        return relative_gap(evaluate(lhs, point), evaluate(rhs, point))

    try:
        worst = max(parallel_map(gap, points, workers))
        detail = ""
    except DomainError as error:
        worst = None
        detail = f"DomainError: {error} at {error.point}"
    return VerificationReport(
        check=check,
        max_residual=worst,
        tolerance=tol,
        samples_requested=n,
        samples_accepted=len(points),
        seed=seed,
        domain=d.describe(),
        detail=detail,
        equation=equation,
        operator=operator,
        candidate=candidate if candidate else to_text(lhs),
    )


def residual_max(
    D: "DifferentialOperator",
    candidate: Expr,
    rhs: Expr,
    d: Domain,
    n: int,
    seed: int,
    tol: float = 1e-8,
    check: str = "residual",
    workers: int = 1,
) -> VerificationReport:
    """Max over samples of |(L+q)candidate - b| / max(1, |b|)."""
    rhs = rhs if rhs is not None else ZERO
    equation = "Eq.10 totally linear" if rhs != ZERO else "Eq.11 reduced equation"
    if rhs == ZERO and D.is_homogeneous:
        equation = "Eq.12 homogeneous equation"
    return compare_expressions(
        check,
        D.apply(candidate),
        rhs,
        d,
        n,
        seed,
        tol,
        equation=equation,
        operator=D.describe(),
        candidate=to_text(candidate),
        workers=workers,
    )


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------

def lie_derivative_fd(field_coeffs: Sequence[Expr], e: Expr, p: Point, h: float = 1e-5) -> float:
    """Sum of a_k(p) times the central difference of e along coordinate k.

    The step along coordinate k is h * max(1, |p_k|); field_coeffs follow the
    coordinate order of p.
    """
    if not h > 0:
        raise ValueError(f"finite-difference step must be positive, got {h!r}")
    names = list(p)
    if len(field_coeffs) != len(names):
        raise ValueError("one field coefficient per coordinate of the point is required")
    total = 0.0
    for name, coeff in zip(names, field_coeffs):
        a = evaluate(coeff, p)
        if a == 0.0:
            continue
        step = h * max(1.0, abs(p[name]))
        forward = evaluate(e, p.shifted(name, step))
        backward = evaluate(e, p.shifted(name, -step))
        total += a * (forward - backward) / (2.0 * step)
    return total


def oracle_agreement(
    D: "DifferentialOperator",
    e: Expr,
    d: Domain,
    n: int,
    seed: int,
    tol: float = 1e-5,
    h: float = 1e-5,
    check: str = "oracle",
) -> VerificationReport:
    """Symbolic apply(D, e) against the central-difference oracle plus q*e."""
    symbolic = D.apply(e)
    points = d.sample(n, seed)
    worst: Optional[float] = 0.0
    detail = ""
    try:
        for point in points:
            oracle = lie_derivative_fd(D.field_coeffs, e, point, h) + evaluate(D.scalar, point) * evaluate(e, point)
            worst = max(worst, relative_gap(evaluate(symbolic, point), oracle))
    except DomainError as error:
        worst = None
        detail = f"DomainError: {error} at {error.point}"
    return VerificationReport(
        check=check,
        max_residual=worst,
        tolerance=tol,
        samples_requested=n,
        samples_accepted=len(points),
        seed=seed,
        domain=d.describe(),
        detail=detail,
        equation="Eq.9 Lie derivative vs central differences",
        operator=D.describe(),
        candidate=to_text(e),
    )


# ---------------------------------------------------------------------------
# Functional independence
# ---------------------------------------------------------------------------

def matrix_rank(matrix: np.ndarray, threshold: float = RANK_PIVOT_THRESHOLD) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    Pivots smaller than threshold times the largest entry count as zero.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.size == 0:
        return 0
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return 0
    cutoff = threshold * scale
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= cutoff:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, col] / a[rank, col], a[rank])
        rank += 1
    return rank


def independence_rank(exprs: Sequence[Expr], d: Domain, n_points: int = 9, seed: int = 42) -> Tuple[int, Tuple[int, ...]]:
    """Majority Jacobian rank of exprs over sampled points, plus per-point ranks."""
    if n_points < 5:
        raise ValueError("independence needs at least 5 sample points")
    if not exprs:
        return 0, tuple(0 for _ in range(n_points))
    names = d.coords.names
    partials = [[differentiate(e, name) for name in names] for e in exprs]
    ranks = []
    for point in d.sample(n_points, seed):
        try:
            jacobian = np.array([[evaluate(entry, point) for entry in row] for row in partials])
        except DomainError:
            continue
        ranks.append(matrix_rank(jacobian))
    if not ranks:
        return 0, ()
    counts = Counter(ranks)
    best = max(counts.values())
    rank = min(r for r, count in counts.items() if count == best)
    return rank, tuple(ranks)


# ---------------------------------------------------------------------------
# Characteristic curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Fixed-step samples of x(t) with the running integral of q."""

    times: Tuple[float, ...]
    points: Tuple[Point, ...]
    q_integral: Tuple[float, ...]
    truncated: bool = False

    @property
    def end(self) -> Point:
        return self.points[-1]


def _compile_field(names: Sequence[str], field_coeffs: Sequence[Expr], q: Expr) -> Callable[[np.ndarray], Tuple[np.ndarray, float]]:
    def rhs(y: np.ndarray) -> Tuple[np.ndarray, float]:
        env = dict(zip(names, y.tolist()))
        velocity = np.array([evaluate(coeff, env) for coeff in field_coeffs])
        return velocity, evaluate(q, env)

    return rhs


def flow_rk4(
    field_coeffs: Sequence[Expr],
    x0: Point,
    t_end: float,
    step: float,
    q: Expr = ZERO,
    box: Optional[Sequence[Tuple[float, float]]] = None,
) -> Trajectory:
    """Integrate dx/dt = a(x) with classical RK4, accumulating the integral of q.

    The q accumulator is advanced with the same stage values as x, which
    gives Simpson weights on each step. Integration stops early (truncated)
    when x leaves the optional safety box, stops being finite, or reaches a
    point where the field cannot be evaluated.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end!r}")
    names = tuple(x0)
    if len(field_coeffs) != len(names):
        raise ValueError("one field coefficient per coordinate is required")
    f = _compile_field(names, field_coeffs, q)
    n_steps = int(round(t_end / step)) if t_end > 0 else 0
    if t_end > 0 and n_steps == 0:
        n_steps = 1
    dt = t_end / n_steps if n_steps else step

    y = np.array(x0.values_tuple, dtype=float)
    m = 0.0
    times = [0.0]
    points = [x0]
    integrals = [0.0]
    truncated = False
    for i in range(1, n_steps + 1):
        try:
            k1_y, k1_m = f(y)
            k2_y, k2_m = f(y + 0.5 * dt * k1_y)
            k3_y, k3_m = f(y + 0.5 * dt * k2_y)
            k4_y, k4_m = f(y + dt * k3_y)
        except DomainError:
            truncated = True
            break
        y = y + dt / 6.0 * (k1_y + 2.0 * k2_y + 2.0 * k3_y + k4_y)
        m = m + dt / 6.0 * (k1_m + 2.0 * k2_m + 2.0 * k3_m + k4_m)
        if not np.all(np.isfinite(y)) or not math.isfinite(m):
            truncated = True
            break
        if box is not None and any(not lo <= v <= hi for v, (lo, hi) in zip(y, box)):
            truncated = True
            break
        times.append(i * dt)
        points.append(Point(names, y.tolist()))
        integrals.append(m)
    return Trajectory(tuple(times), tuple(points), tuple(integrals), truncated)


def flows(
    field_coeffs: Sequence[Expr],
    seeds: Sequence[Point],
    t_end: float,
    step: float,
    q: Expr = ZERO,
    workers: int = 1,
    box: Optional[Sequence[Tuple[float, float]]] = None,
) -> List[Trajectory]:
    """One trajectory per seed, shared by several drift measurements."""
    return parallel_map(lambda p: flow_rk4(field_coeffs, p, t_end, step, q, box), list(seeds), workers)


def invariance_drift_on(phi: Expr, trajectories: Sequence[Trajectory]) -> float:
    worst = 0.0
    for trajectory in trajectories:
        start = evaluate(phi, trajectory.points[0])
        for p in trajectory.points:
            worst = max(worst, relative_gap(evaluate(phi, p), start))
    return worst


def transport_drift_on(psi: Expr, trajectories: Sequence[Trajectory]) -> float:
    """Needs trajectories integrated with the operator's scalar term."""
    worst = 0.0
    for trajectory in trajectories:
        start = evaluate(psi, trajectory.points[0])
        for p, integral in zip(trajectory.points, trajectory.q_integral):
            worst = max(worst, relative_gap(_transported(evaluate(psi, p), integral, p), start))
    return worst


def _transported(value: float, integral: float, p: Point) -> float:
    """value * exp(integral), formed in log space."""
    if value == 0.0:
        return 0.0
    try:
        return math.copysign(math.exp(math.log(abs(value)) + integral), value)
    except OverflowError:
        raise DomainError("transported value overflows", p) from None


def invariance_drift(
    phi: Expr,
    field_coeffs: Sequence[Expr],
    seeds: Sequence[Point],
    t_end: float,
    step: float,
    workers: int = 1,
) -> float:
    """Max relative change of phi along the flow from each seed."""
    return invariance_drift_on(phi, flows(field_coeffs, seeds, t_end, step, workers=workers))


def transport_drift(
    psi: Expr,
    D: "DifferentialOperator",
    seeds: Sequence[Point],
    t_end: float,
    step: float,
    workers: int = 1,
) -> float:
    """Max relative change of psi(x(t)) * exp(integral of q) along the flow."""
    return transport_drift_on(psi, flows(D.field_coeffs, seeds, t_end, step, D.scalar, workers))


def drift_report(check: str, drift: float, tol: float, seeds: int, seed: int, d: Domain, equation: str, candidate: str, operator: str = "", detail: str = "") -> VerificationReport:
    return VerificationReport(
        check=check,
        max_residual=drift,
        tolerance=tol,
        samples_requested=seeds,
        samples_accepted=seeds,
        seed=seed,
        domain=d.describe(),
        detail=detail,
        equation=equation,
        operator=operator,
        candidate=candidate,
    )
