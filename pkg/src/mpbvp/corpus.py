"""Built-in reference problems with closed-form solutions.

Three uniquely solvable problems cover the main shapes — scalar first
order with an integral condition, scalar second order with a
discontinuous complex coefficient and a mixed point/integral condition,
and a coupled first-order pair with a two-point plus integral condition —
together with one deliberately degenerate problem whose characteristic
matrix is singular.  Each solvable problem ships with its exact solution
jet, and loading re-verifies the closed form against the stated data.
"""

from __future__ import annotations

import numpy as np

from .boundary import BoundaryTerm, GeneralBoundaryOperator, MultipointBoundaryOperator
from .bvp import BvpProblem, residuals, BvpSolution
from .funcspace import Grid, PiecewisePoly, PolyMatrix, PolyVector, SampledJet
from .stieltjes import MatrixMeasure, ScalarMeasure

__all__ = [
    "CORPUS_NAMES",
    "DEGENERATE_NAMES",
    "build_problem",
    "exact_jet",
    "load",
]

CORPUS_NAMES = ("p1", "p2", "p3")
DEGENERATE_NAMES = ("nn",)

_RESIDUAL_TOL = 1e-8


def _p1(n: int):
    """Scalar first order: y' + y = 1 + t with a prescribed integral.

    Exact solution y = exp(-t) + t; the condition reads int_0^1 y dt.
    """
    a, b = 0.0, 1.0
    grid = Grid(a, b, n)
    coeffs = [PolyMatrix.constant([[1.0]], a, b)]
    f = PolyVector([PiecewisePoly.single([1.0, 1.0], a, b)])
    phi = MatrixMeasure([[ScalarMeasure.lebesgue(a, b, 1.0)]])
    operator = GeneralBoundaryOperator(1, 1, [], phi)
    q = np.array([1.5 - np.exp(-1.0)], dtype=complex)
    problem = BvpProblem(r=1, m=1, coeffs=coeffs, f=f, q=q, operator=operator, grid=grid)
    jet = SampledJet.from_callables(grid, 1, 1, [
        lambda t: np.exp(-t) + t,
        lambda t: 1.0 - np.exp(-t),
    ])
    return problem, jet


def _p2(n: int):
    """Scalar second order with a jumping complex coefficient.

    y'' + a0(t) y = f where a0 steps from 1 to 1 + 0.5i at t = 0.5, the
    exact solution is y = t^3 - t, and the conditions are y(0) = 0 and
    int_0^1 y dt = -1/4, the latter written as y(0) + int (1-s) y'(s) ds.
    """
    a, b = 0.0, 1.0
    grid = Grid(a, b, n)
    low, high = 1.0, 1.0 + 0.5j
    a0 = PiecewisePoly.step([a, 0.5, b], [low, high])
    coeffs = [
        PolyMatrix([[a0]]),
        PolyMatrix.zero(1, 1, a, b),
    ]
    # f = 6t + a0(t) (t^3 - t), piece by piece
    cubic = np.array([0.0, -1.0, 0.0, 1.0], dtype=complex)  # t^3 - t
    f_piece_low = low * cubic + np.array([0.0, 6.0, 0.0, 0.0])
    f_piece_high = high * cubic + np.array([0.0, 6.0, 0.0, 0.0])
    f = PolyVector([PiecewisePoly([a, 0.5, b], [f_piece_low, f_piece_high])])
    alphas = [np.array([[1.0], [1.0]], dtype=complex)]
    phi = MatrixMeasure([
        [ScalarMeasure.zero(a, b)],
        [ScalarMeasure.from_density(PiecewisePoly.single([1.0, -1.0], a, b))],
    ])
    operator = GeneralBoundaryOperator(2, 1, alphas, phi)
    q = np.array([0.0, -0.25], dtype=complex)
    problem = BvpProblem(r=2, m=1, coeffs=coeffs, f=f, q=q, operator=operator, grid=grid)
    jet = SampledJet.from_callables(grid, 1, 2, [
        lambda t: t ** 3 - t,
        lambda t: 3.0 * t ** 2 - 1.0,
        lambda t: 6.0 * t,
    ])
    return problem, jet


def _p3(n: int):
    """Coupled first-order pair with a two-point plus integral condition.

    y' + [[0, -1], [0, 0]] y = (4t - 1 - t^2, 2t - 2); exact
    y = (t^2, (1 - t)^2); the conditions are y1(0) + y1(1) = 1 and
    int_0^1 y2 dt = 1/3.  The integrated component is deliberately
    curved so that atomic discretizations of the condition converge at
    a visible (second-order) rate rather than being exact.
    """
    a, b = 0.0, 1.0
    grid = Grid(a, b, n)
    coeffs = [PolyMatrix.constant([[0.0, -1.0], [0.0, 0.0]], a, b)]
    f = PolyVector([
        PiecewisePoly.single([-1.0, 4.0, -1.0], a, b),
        PiecewisePoly.single([-2.0, 2.0], a, b),
    ])
    delta_sum = ScalarMeasure(a, b, atoms=[(a, 1.0), (b, 1.0)])
    phi = MatrixMeasure([
        [delta_sum, ScalarMeasure.zero(a, b)],
        [ScalarMeasure.zero(a, b), ScalarMeasure.lebesgue(a, b, 1.0)],
    ])
    operator = GeneralBoundaryOperator(1, 2, [], phi)
    q = np.array([1.0, 1.0 / 3.0], dtype=complex)
    problem = BvpProblem(r=1, m=2, coeffs=coeffs, f=f, q=q, operator=operator, grid=grid)
    jet = SampledJet.from_callables(grid, 2, 1, [
        lambda t: np.stack([t ** 2, (1.0 - t) ** 2], axis=-1),
        lambda t: np.stack([2.0 * t, 2.0 * t - 2.0], axis=-1),
    ])
    return problem, jet


def _nn(n: int):
    """Degenerate: y'' = 0 with y'(0) = y'(1) = 0.

    Every constant solves it, so the characteristic matrix is singular and
    the solver must refuse.
    """
    a, b = 0.0, 1.0
    grid = Grid(a, b, n)
    coeffs = [PolyMatrix.zero(1, 1, a, b), PolyMatrix.zero(1, 1, a, b)]
    f = PolyVector.zero(1, a, b)
    terms = [
        BoundaryTerm(node=a, order=1, beta=np.array([[1.0], [0.0]], dtype=complex)),
        BoundaryTerm(node=b, order=1, beta=np.array([[0.0], [1.0]], dtype=complex)),
    ]
    operator = MultipointBoundaryOperator(2, 1, a, b, terms)
    q = np.zeros(2, dtype=complex)
    problem = BvpProblem(r=2, m=1, coeffs=coeffs, f=f, q=q, operator=operator, grid=grid)
    return problem, None


_BUILDERS = {"p1": _p1, "p2": _p2, "p3": _p3, "nn": _nn}


def build_problem(name: str, n: int = 2048) -> BvpProblem:
    """Build a named reference problem on an (a, b, n) grid."""
    return _load(name, n)[0]


def exact_jet(name: str, n: int = 2048) -> SampledJet:
    """Exact solution jet of a named solvable reference problem."""
    jet = _load(name, n)[1]
    if jet is None:
        raise ValueError(f"problem {name!r} has no closed-form solution")
    return jet


def _load(name: str, n: int):
    key = name.strip().lower()
    if key not in _BUILDERS:
        known = ", ".join(sorted(_BUILDERS))
        raise ValueError(f"unknown problem {name!r} (known: {known})")
    problem, jet = _BUILDERS[key](n)
    if jet is not None:
        shim = BvpSolution(jet=jet, char_matrix=np.eye(problem.r * problem.m),
                           det=1.0, cond=1.0)
        ode_defect, boundary_defect = residuals(problem, shim)
        if ode_defect > _RESIDUAL_TOL or boundary_defect > _RESIDUAL_TOL:
            raise AssertionError(
                f"reference problem {key!r} failed its closed-form check "
                f"(ode {ode_defect:.3e}, boundary {boundary_defect:.3e})"
            )
    return problem, jet


def load(name: str, n: int = 2048):
    """(problem, exact jet or None) for a named reference problem."""
    return _load(name, n)
