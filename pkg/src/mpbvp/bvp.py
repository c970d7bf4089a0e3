"""Problem containers, companion reduction, and the matrizant-based solver.

A problem is the system L y = y^(r) + sum_l A_l(t) y^(l) = f on [a, b] with
rm boundary conditions B y = q.  The solver reduces to the first-order
companion system v' + P v = g, T v = q, integrates the matrizant V of P,
and assembles the solution from the characteristic matrix [T V]:

    u = V [T V]^-1 (q - T R) + R,

where R is the particular solution with R(a) = 0.  The problem is flagged
as not uniquely solvable when [T V] is singular or numerically so.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import (
    GeneralBoundaryOperator,
    MultipointBoundaryOperator,
    apply_operator,
    lift,
)
from .funcspace import (
    Grid,
    PiecewisePoly,
    PolyMatrix,
    PolyVector,
    SampledJet,
    mat_norm,
    norm_l1,
    vec_norm,
)
from .linode import forced_trajectory, fundamental_matrix

__all__ = [
    "BvpProblem",
    "BvpSolution",
    "NotUniquelySolvableError",
    "companion_reduce",
    "solve",
    "residuals",
]

#: |det [TV]| below DET_TOL * max_column_norm^(rm) flags a singular problem.
DET_TOL = 1e-12
#: Condition numbers above this flag the problem as not uniquely solvable.
COND_LIMIT = 1e12


class NotUniquelySolvableError(RuntimeError):
    """Raised when the characteristic matrix is singular or numerically so."""

    def __init__(self, message: str, det: complex = 0.0, cond: float = float("inf")):
        super().__init__(message)
        self.det = det
        self.cond = cond


@dataclass
class BvpProblem:
    """An order-r system of m equations with boundary operator and grid.

    ``coeffs[l]`` multiplies y^(l) for l = 0..r-1.  Coefficient breakpoints
    are snapped to grid nodes at construction so the integrator never steps
    across a discontinuity; the right-hand side f is left untouched.
    """

    r: int
    m: int
    coeffs: list
    f: PolyVector
    q: np.ndarray
    operator: object
    grid: Grid

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise ValueError("need r >= 1 and m >= 1")
        if len(self.coeffs) != self.r:
            raise ValueError(f"order-{self.r} problem needs {self.r} coefficient matrices")
        snapped = []
        for l, A in enumerate(self.coeffs):
            if A.shape != (self.m, self.m):
                raise ValueError(f"coefficient {l} must be {self.m} x {self.m}")
            snapped.append(A.snapped(self.grid))
        self.coeffs = snapped
        if self.f.m != self.m:
            raise ValueError("right-hand side dimension mismatch")
        self.q = np.asarray(self.q, dtype=complex).reshape(self.r * self.m)
        if not np.all(np.isfinite(self.q)):
            raise ValueError("boundary values must be finite")
        if not isinstance(self.operator, (GeneralBoundaryOperator, MultipointBoundaryOperator)):
            raise TypeError("operator must be a boundary operator")
        if self.operator.r != self.r or self.operator.m != self.m:
            raise ValueError("boundary operator shape does not match the problem")
        tol = 1e-9 * (self.grid.b - self.grid.a)
        for x, y in ((self.grid.a, self.f.a), (self.grid.b, self.f.b),
                     (self.grid.a, self.operator.a), (self.grid.b, self.operator.b)):
            if abs(x - y) > tol:
                raise ValueError("grid, right-hand side, and operator intervals disagree")

    @property
    def a(self) -> float:
        return self.grid.a

    @property
    def b(self) -> float:
        return self.grid.b

    @property
    def d(self) -> int:
        return self.r * self.m


@dataclass
class BvpSolution:
    """Solution jet plus solver diagnostics."""

    jet: SampledJet
    char_matrix: np.ndarray
    det: complex
    cond: float
    ode_residual: float = field(default=float("nan"))
    boundary_residual: float = field(default=float("nan"))


def companion_reduce(problem: BvpProblem):
    """Reduce to the first-order companion system (P, g, T, q).

    P carries -I blocks on the superdiagonal and the coefficient row
    (A_0 ... A_{r-1}) at the bottom; g stacks r-1 zero blocks over f; T is
    the lifted boundary operator.  For r = 1 this is (A_0, f, lift(B), q).
    """
    r, m = problem.r, problem.m
    a, b = problem.a, problem.b
    if r == 1:
        return problem.coeffs[0], problem.f, lift(problem.operator), problem.q
    zero = PiecewisePoly.zero(a, b)
    minus_one = PiecewisePoly.constant(-1.0, a, b)
    d = r * m
    entries = [[zero for _ in range(d)] for _ in range(d)]
    for block in range(r - 1):
        for i in range(m):
            entries[block * m + i][(block + 1) * m + i] = minus_one
    for block in range(r):
        A = problem.coeffs[block]
        for i in range(m):
            for j in range(m):
                entries[(r - 1) * m + i][block * m + j] = A.entries[i][j]
    P = PolyMatrix(entries)
    g = PolyVector([zero] * ((r - 1) * m) + list(problem.f.components))
    return P, g, lift(problem.operator), problem.q


def _check_solvable(char: np.ndarray) -> tuple[complex, float, np.ndarray]:
    d = char.shape[0]
    det = complex(np.linalg.det(char))
    scale = mat_norm(char)
    threshold = DET_TOL * max(scale, np.finfo(float).tiny) ** d
    if abs(det) < threshold:
        raise NotUniquelySolvableError(
            f"characteristic matrix is singular (|det| = {abs(det):.3e} < {threshold:.3e})",
            det=det,
        )
    try:
        inverse = np.linalg.inv(char)
    except np.linalg.LinAlgError as exc:
        raise NotUniquelySolvableError("characteristic matrix is singular", det=det) from exc
    cond = scale * mat_norm(inverse)
    if cond > COND_LIMIT:
        raise NotUniquelySolvableError(
            f"characteristic matrix is numerically singular (cond = {cond:.3e})",
            det=det,
            cond=cond,
        )
    return det, cond, inverse


def solve(problem: BvpProblem, corrected: bool = True) -> BvpSolution:
    """Solve the boundary-value problem on its grid.

    Raises NotUniquelySolvableError when the characteristic matrix fails the
    determinant or condition test.  ``corrected`` selects endpoint-corrected
    trapezoid quadrature inside the boundary-operator applications.
    """
    P, g, T, q = companion_reduce(problem)
    grid = problem.grid
    r, m = problem.r, problem.m
    V = fundamental_matrix(P, grid)
    char = T.apply_trajectory(grid, V.values, corrected=corrected)
    det, cond, inverse = _check_solvable(char)

    R = forced_trajectory(P, g, grid)
    coef = inverse @ (q - T.apply_values(grid, R, corrected=corrected))
    u = np.einsum("nij,j->ni", V.values, coef) + R

    samples = [u[:, l * m:(l + 1) * m] for l in range(r)]
    f_nodes = problem.f.eval_at(grid.nodes)
    top = f_nodes.copy()
    for l in range(r):
        A_nodes = problem.coeffs[l].eval_at(grid.nodes)
        top -= np.einsum("nij,nj->ni", A_nodes, samples[l])
    samples.append(top)

    jet = SampledJet(grid, m, r, samples)
    solution = BvpSolution(jet=jet, char_matrix=char, det=det, cond=cond)
    # The top jet channel satisfies the differential identity by construction,
    # so the meaningful self-check is the finite-difference consistency of the
    # derivative channels plus the boundary defect.
    solution.ode_residual = jet.consistency_defect()
    solution.boundary_residual = residuals(problem, solution)[1]
    return solution


def residuals(problem: BvpProblem, solution: BvpSolution) -> tuple[float, float]:
    """(L1 norm of L y - f over the grid, |B y - q| in the vector norm)."""
    jet = solution.jet
    grid = problem.grid
    defect = jet.samples[problem.r].copy()
    for l in range(problem.r):
        A_nodes = problem.coeffs[l].eval_at(grid.nodes)
        defect += np.einsum("nij,nj->ni", A_nodes, jet.samples[l])
    defect -= problem.f.eval_at(grid.nodes)
    ode_residual = norm_l1(grid, defect)
    boundary_residual = vec_norm(apply_operator(problem.operator, jet) - problem.q)
    return ode_residual, boundary_residual
