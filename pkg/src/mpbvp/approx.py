"""Approximation pipeline: discretized problems, error sweeps, certificates.

Given a problem with a general (measure) boundary operator, this module
builds the explicit multipoint approximations — interval-mean coefficients
plus midpoint-discretized boundary measures — and measures how fast their
solutions converge.  It also computes the certified error constants

    kappa_hat = (c1 + c2) * lambda_hat + c1 * c2 + 1

from the matrizant of the limit problem, and runs the two perturbation
checks: the strong one (L1-small right-hand sides, W^r_1 error) and the
weak one (sup-small primitives, C^(r-1) error), the latter with a built-in
sawtooth perturbation that is large in L1 but small after integration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import (
    GeneralBoundaryOperator,
    MultipointBoundaryOperator,
    default_probe_jets,
    multipointify,
    norm_lower_bound,
    norm_upper_bound,
)
from .bvp import BvpProblem, NotUniquelySolvableError, companion_reduce, solve
from .funcspace import (
    Grid,
    PiecewisePoly,
    PolyMatrix,
    PolyVector,
    antiderivative,
    mat_norm,
    norm_c,
    norm_cl,
    norm_w1r,
    traj_norm_c,
    vec_norm,
)
from .linode import fundamental_matrix, inverse_fundamental

__all__ = [
    "ErrorConstants",
    "SweepRow",
    "ApproximationReport",
    "approximate_coefficients",
    "build_multipoint_problem",
    "sweep",
    "remark3_constants",
    "theorem2_check",
    "theorem3_check",
    "constant_shift_rhs",
    "sawtooth_rhs",
    "sawtooth_perturbation",
]

_DEFAULT_SIGMA_PROBE_KS = (1, 2, 4, 8, 16, 32, 64, 128, 256)


@dataclass(frozen=True)
class ErrorConstants:
    """Certified constants of the limit problem.

    c1 bounds |V|_C * |[TV]^-1|, c2 the variation-of-constants factor,
    lambda_hat >= 1/|B| comes from a probe lower bound on |B|, and
    sigma_hat bounds the norms of the discretized operators.  kappa_hat is
    an upper bound for the true error constant, so certificates built from
    it are conservative.
    """

    c1: float
    c2: float
    lambda_hat: float
    kappa_hat: float
    sigma_hat: float


@dataclass
class SweepRow:
    """Per-k record of a sweep or theorem check."""

    k: int
    solvable: bool
    err_w1r: float = float("nan")
    err_cr1: float = float("nan")
    det_abs: float = float("nan")
    sigma_hat: float = float("nan")
    c1_factor: float = float("nan")
    bound_holds: bool | None = None
    ratio: float | None = None
    margin: float | None = None
    l1_gap: float | None = None
    primitive_gap: float | None = None


@dataclass
class ApproximationReport:
    """Rows plus constants, thresholds, and the verdict of a check."""

    rows: list
    constants: ErrorConstants | None = None
    rho_solvable: int | None = None
    rho_bound: int | None = None
    theorem: int | None = None
    eps: float | None = None
    measured_kappa: float | None = None
    stable: bool | None = None
    ok: bool = True
    meta: dict = field(default_factory=dict)


def approximate_coefficients(A: PolyMatrix, k: int) -> PolyMatrix:
    """Piecewise-constant approximation by interval means on k equal parts.

    The L1 distance to a Lipschitz coefficient decays like 1/k; for a
    piecewise-constant A whose breakpoints align with the partition the
    approximation reproduces A exactly.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"need an integer k >= 1, got {k}")
    a, b = A.a, A.b
    edges = a + (b - a) * np.arange(k + 1) / k
    rows, cols = A.shape
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            entry = A.entries[i][j]
            values = [entry.mean(float(edges[s]), float(edges[s + 1])) for s in range(k)]
            row.append(PiecewisePoly.step(edges, values))
        out.append(row)
    return PolyMatrix(out)


def build_multipoint_problem(problem: BvpProblem, k: int,
                             f: PolyVector | None = None,
                             q: np.ndarray | None = None) -> BvpProblem:
    """The k-th multipoint approximation of a problem.

    Coefficients become interval means, the boundary operator is
    multipointified, and the right-hand side is carried over verbatim
    unless overridden.  A problem that is already multipoint keeps its
    operator.
    """
    coeffs = [approximate_coefficients(A, k) for A in problem.coeffs]
    if isinstance(problem.operator, GeneralBoundaryOperator):
        operator = multipointify(problem.operator, k)
    else:
        operator = problem.operator
    return BvpProblem(
        r=problem.r,
        m=problem.m,
        coeffs=coeffs,
        f=problem.f if f is None else f,
        q=problem.q if q is None else np.asarray(q, dtype=complex),
        operator=operator,
        grid=problem.grid,
    )


def _sigma_for(problem: BvpProblem, ks) -> float:
    op = problem.operator
    if isinstance(op, MultipointBoundaryOperator):
        return norm_upper_bound(op)
    return max(norm_upper_bound(multipointify(op, k)) for k in ks)


def remark3_constants(problem: BvpProblem, sigma_probe_ks=None) -> ErrorConstants:
    """Compute the certified constants (c1, c2, lambda_hat, kappa_hat, sigma_hat).

    c1 and c2 come from the matrizant of the companion system and the
    characteristic matrix; lambda_hat is the reciprocal of a probe lower
    bound for |B|, so kappa_hat = (c1 + c2) lambda_hat + c1 c2 + 1 is an
    upper bound for the true constant.  sigma_hat takes the operator-norm
    upper bound over ``sigma_probe_ks`` discretizations (or of the operator
    itself when it is already multipoint).
    """
    P, _, T, _ = companion_reduce(problem)
    grid = problem.grid
    V = fundamental_matrix(P, grid)
    W = inverse_fundamental(P, grid)
    char = T.apply_trajectory(grid, V.values)
    det = complex(np.linalg.det(char))
    if det == 0:
        raise NotUniquelySolvableError("characteristic matrix is singular", det=det)
    inverse = np.linalg.inv(char)
    v_c = traj_norm_c(V.values)
    w_c = traj_norm_c(W.values)
    c1 = 1.0 + v_c * mat_norm(inverse)
    if problem.r == 1:
        c2 = 2.0 + v_c * w_c * problem.coeffs[0].l1_norm()
    else:
        c2 = 2.0 + v_c * w_c * ((problem.b - problem.a) + problem.coeffs[-1].l1_norm())
    lam = 1.0 / norm_lower_bound(problem.operator,
                                 default_probe_jets(problem.r, problem.m, grid))
    kappa = (c1 + c2) * lam + c1 * c2 + 1.0
    sigma = _sigma_for(problem, sigma_probe_ks or _DEFAULT_SIGMA_PROBE_KS)
    return ErrorConstants(c1=c1, c2=c2, lambda_hat=lam, kappa_hat=kappa, sigma_hat=sigma)


def _solve_row(problem: BvpProblem, k: int, reference, f=None, q=None) -> SweepRow:
    approx_problem = build_multipoint_problem(problem, k, f=f, q=q)
    row = SweepRow(k=k, solvable=False,
                   sigma_hat=norm_upper_bound(approx_problem.operator)
                   if isinstance(approx_problem.operator, MultipointBoundaryOperator)
                   else float("nan"))
    P_k, _, T_k, _ = companion_reduce(approx_problem)
    V_k = fundamental_matrix(P_k, problem.grid)
    char = T_k.apply_trajectory(problem.grid, V_k.values)
    row.det_abs = abs(complex(np.linalg.det(char)))
    try:
        sol = solve(approx_problem)
    except NotUniquelySolvableError as exc:
        row.det_abs = abs(exc.det)
        return row
    row.solvable = True
    row.c1_factor = traj_norm_c(V_k.values) * mat_norm(np.linalg.inv(char))
    diff = sol.jet - reference.jet
    row.err_w1r = norm_w1r(diff)
    row.err_cr1 = norm_cl(diff, problem.r - 1)
    return row


def _first_tail_index(rows, predicate) -> int | None:
    """Smallest k in rows from which predicate holds for every later row."""
    result = None
    for row in rows:
        if predicate(row):
            if result is None:
                result = row.k
        else:
            result = None
    return result


def sweep(problem: BvpProblem, ks) -> ApproximationReport:
    """Solve the k-th approximations for every k and record their errors.

    Rows with a singular characteristic matrix are flagged, not failed.
    ``bound_holds`` in a plain sweep records unique solvability.
    """
    ks = sorted(int(k) for k in ks)
    if not ks:
        raise ValueError("need at least one k")
    reference = solve(problem)
    constants = remark3_constants(problem, sigma_probe_ks=ks)
    rows = [_solve_row(problem, k, reference) for k in ks]
    for row in rows:
        row.bound_holds = row.solvable
    report = ApproximationReport(rows=rows, constants=constants)
    report.rho_solvable = _first_tail_index(rows, lambda r: r.solvable)
    report.rho_bound = report.rho_solvable
    report.ok = report.rho_solvable is not None
    report.meta = {
        "reference_det": abs(reference.det),
        "reference_cond": reference.cond,
        "grid_n": problem.grid.n,
    }
    return report


def _check_rhs_entries(problem: BvpProblem, rhs_sequence):
    """Normalize to sorted (k, f_k, q_k) triples.

    Entries may be (k, f_k, q_k) triples or plain (f_k, q_k) pairs; pairs
    are numbered consecutively from k = 1 in the order given.
    """
    entries = []
    for position, entry in enumerate(rhs_sequence, start=1):
        if len(entry) == 3:
            k, f_k, q_k = entry
            entries.append((int(k), f_k, q_k))
        elif len(entry) == 2:
            f_k, q_k = entry
            entries.append((position, f_k, q_k))
        else:
            raise ValueError("right-hand sides must be (k, f, q) or (f, q) entries")
    entries.sort(key=lambda e: e[0])
    if not entries:
        raise ValueError("need at least one perturbed right-hand side")
    if len({k for k, _, _ in entries}) != len(entries):
        raise ValueError("duplicate k in the right-hand side sequence")
    return entries


def theorem2_check(problem: BvpProblem, rhs_sequence, eps: float) -> ApproximationReport:
    """Strong perturbation check: L1-small right-hand sides, W^r_1 error.

    Every entry (k, f_k, q_k) must satisfy |f_k - f|_1 < eps and
    |q_k - q| < eps (violations are rejected).  The report records the
    measured sup of |x_k - y|_{r,1} / eps beyond the solvability threshold
    and whether that ratio has stabilized at the tail of the sweep.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    entries = _check_rhs_entries(problem, rhs_sequence)
    for k, f_k, q_k in entries:
        l1 = (f_k - problem.f).l1_norm()
        if not l1 < eps:
            raise ValueError(f"entry k={k} violates |f_k - f|_1 < eps ({l1:.3e} >= {eps:.3e})")
        qgap = vec_norm(np.asarray(q_k, dtype=complex) - problem.q)
        if not qgap < eps:
            raise ValueError(f"entry k={k} violates |q_k - q| < eps")
    reference = solve(problem)
    rows = []
    for k, f_k, q_k in entries:
        row = _solve_row(problem, k, reference, f=f_k, q=q_k)
        row.l1_gap = (f_k - problem.f).l1_norm()
        if row.solvable:
            row.ratio = row.err_w1r / eps
        rows.append(row)
    report = ApproximationReport(rows=rows, theorem=2, eps=eps)
    report.rho_solvable = _first_tail_index(rows, lambda r: r.solvable)
    if report.rho_solvable is not None:
        tail = [r.ratio for r in rows if r.k >= report.rho_solvable]
        report.measured_kappa = max(tail)
        if len(tail) >= 2:
            spread = abs(tail[-1] - tail[-2])
            report.stable = spread <= 0.1 * max(tail[-1], tail[-2], 1e-300)
        else:
            report.stable = True
    else:
        report.stable = False
    report.ok = report.rho_solvable is not None and bool(report.stable)
    return report


def theorem3_check(problem: BvpProblem, rhs_sequence, eps: float) -> ApproximationReport:
    """Weak perturbation check: sup-small primitives, C^(r-1) certificate.

    Entries must satisfy |F_k - F|_C < eps (primitives computed by the
    trapezoid antiderivative) and |q_k - q| < eps; the L1 gap may be large.
    The certificate verifies |x_k - y|_(r-1) < kappa_hat * sigma_hat * eps
    for every k beyond the detected threshold rho.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    entries = _check_rhs_entries(problem, rhs_sequence)
    grid = problem.grid
    gaps = {}
    for k, f_k, q_k in entries:
        diff = f_k - problem.f
        primitive = antiderivative(grid, diff.eval_at(grid.nodes))
        gap = norm_c(primitive)
        if not gap < eps:
            raise ValueError(
                f"entry k={k} violates |F_k - F|_C < eps ({gap:.3e} >= {eps:.3e})"
            )
        if not vec_norm(np.asarray(q_k, dtype=complex) - problem.q) < eps:
            raise ValueError(f"entry k={k} violates |q_k - q| < eps")
        gaps[k] = (diff.l1_norm(), gap)
    constants = remark3_constants(problem, sigma_probe_ks=[k for k, _, _ in entries])
    bound = constants.kappa_hat * constants.sigma_hat * eps
    reference = solve(problem)
    rows = []
    for k, f_k, q_k in entries:
        row = _solve_row(problem, k, reference, f=f_k, q=q_k)
        row.l1_gap, row.primitive_gap = gaps[k]
        if row.solvable:
            row.bound_holds = row.err_cr1 < bound
            row.margin = row.err_cr1 / bound
        else:
            row.bound_holds = False
        rows.append(row)
    report = ApproximationReport(rows=rows, constants=constants, theorem=3, eps=eps)
    report.rho_solvable = _first_tail_index(rows, lambda r: r.solvable)
    report.rho_bound = _first_tail_index(rows, lambda r: r.solvable and bool(r.bound_holds))
    report.ok = report.rho_bound is not None
    report.meta = {"bound": bound}
    return report


def constant_shift_rhs(problem: BvpProblem, ks, eps: float):
    """Entries (k, f + eps/(2(b-a)) on component 0, q): L1 gap eps/2 < eps."""
    shift = PolyVector(
        [PiecewisePoly.constant(eps / (2.0 * (problem.b - problem.a)), problem.a, problem.b)]
        + [PiecewisePoly.zero(problem.a, problem.b) for _ in range(problem.m - 1)]
    )
    f_k = problem.f + shift
    return [(int(k), f_k, problem.q.copy()) for k in ks]


def sawtooth_perturbation(grid: Grid, k: int, eps: float, m: int) -> PolyVector:
    """Zero-mean square wave on component 0 with k teeth.

    The amplitude grows like k so the L1 norm is about 1.4 * eps * k — far
    beyond eps — while the primitive stays below 0.9 * eps in sup norm.
    Breakpoints sit at cell midpoints, which keeps the trapezoid
    antiderivative of the node samples exact.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"need an integer k >= 1, got {k}")
    a, b = grid.a, grid.b
    n = grid.n
    if 4 * k > n:
        raise ValueError(f"sawtooth with {k} teeth needs a grid with n >= {4 * k}")
    amplitude = 1.4 * eps * k / (b - a)
    half = (b - a) / (2.0 * k)
    h = grid.h
    breakpoints = [a]
    for j in range(1, 2 * k):
        ideal = a + j * half
        cell = int(round((ideal - a) / h - 0.5))
        cell = min(max(cell, 0), n - 1)
        snapped = a + (cell + 0.5) * h
        if snapped > breakpoints[-1]:
            breakpoints.append(snapped)
    breakpoints.append(b)
    values = [amplitude if j % 2 == 0 else -amplitude for j in range(len(breakpoints) - 1)]
    lengths = np.diff(np.asarray(breakpoints))
    mean = float(np.dot(values, lengths)) / (b - a)
    values = [v - mean for v in values]
    return PolyVector(
        [PiecewisePoly.step(breakpoints, values)]
        + [PiecewisePoly.zero(a, b) for _ in range(m - 1)]
    )


def sawtooth_rhs(problem: BvpProblem, ks, eps: float):
    """Entries (k, f + sawtooth_k, q) for the weak perturbation check."""
    out = []
    for k in ks:
        delta = sawtooth_perturbation(problem.grid, int(k), eps, problem.m)
        out.append((int(k), problem.f + delta, problem.q.copy()))
    return out
