"""Boundary operators: general form, multipoint form, lifting, norms."""

import numpy as np
import pytest

from mpbvp import (
    BoundaryTerm,
    GeneralBoundaryOperator,
    Grid,
    MatrixMeasure,
    MultipointBoundaryOperator,
    SampledJet,
    ScalarMeasure,
    apply_operator,
    default_probe_jets,
    lift,
    multipointify,
    norm_lower_bound,
    norm_upper_bound,
)
from mpbvp import corpus


def _p2_operator():
    return corpus.build_problem("p2", 64).operator


def _p3_operator():
    return corpus.build_problem("p3", 64).operator


def test_dirichlet_point_condition():
    grid = Grid(0.0, 1.0, 64)
    op = MultipointBoundaryOperator(1, 1, 0.0, 1.0, [
        BoundaryTerm(node=0.0, order=0, beta=np.array([[1.0]])),
    ])
    jet = SampledJet.from_callables(grid, 1, 1,
                                    [lambda t: t + 2.0, lambda t: np.ones_like(t)])
    np.testing.assert_allclose(apply_operator(op, jet), [2.0], atol=1e-14)


def test_multipoint_off_node_uses_interpolation():
    grid = Grid(0.0, 1.0, 64)
    op = MultipointBoundaryOperator(1, 1, 0.0, 1.0, [
        BoundaryTerm(node=0.4031, order=0, beta=np.array([[1.0]])),
    ])
    jet = SampledJet.from_callables(grid, 1, 1,
                                    [lambda t: t ** 3, lambda t: 3 * t ** 2])
    assert abs(apply_operator(op, jet)[0] - 0.4031 ** 3) <= 1e-12


def test_general_operator_on_exact_jet():
    problem, jet = corpus.load("p2", 2048)
    out = apply_operator(problem.operator, jet)
    np.testing.assert_allclose(out, problem.q, atol=1e-12)


def test_multipointify_single_interval():
    op = _p2_operator()
    approx = multipointify(op, 1)
    assert isinstance(approx, MultipointBoundaryOperator)
    assert len(approx.terms) == 2
    first, second = approx.terms
    # the alpha block becomes a point term at the left endpoint, order 0
    assert first.node == 0.0 and first.order == 0
    np.testing.assert_array_equal(first.beta, [[1.0], [1.0]])
    # the density row collapses to one midpoint atom of weight 1/2
    assert second.node == 0.5 and second.order == 1
    np.testing.assert_allclose(second.beta, [[0.0], [0.5]], atol=1e-15)


def test_multipointify_alpha_terms_identical_across_k():
    op = _p2_operator()
    betas = [multipointify(op, k).terms[0].beta for k in (1, 4, 16, 64)]
    for beta in betas[1:]:
        np.testing.assert_array_equal(beta, betas[0])


def test_multipointify_passes_atoms_through():
    op = _p3_operator()
    approx = multipointify(op, 2)
    nodes = [term.node for term in approx.terms]
    np.testing.assert_allclose(nodes, [0.0, 0.25, 0.75, 1.0])
    np.testing.assert_allclose(approx.terms[0].beta, [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(approx.terms[1].beta, [[0.0, 0.0], [0.0, 0.5]])
    np.testing.assert_allclose(approx.terms[-1].beta, [[1.0, 0.0], [0.0, 0.0]])


def test_lift_matches_jet_application():
    grid = Grid(0.0, 1.0, 512)
    op = _p2_operator()
    lifted = lift(op)
    # companion trajectory of y = t^2: v = col(t^2, 2t)
    v = np.stack([grid.nodes ** 2, 2.0 * grid.nodes], axis=1)
    out = lifted.apply_values(grid, v)
    # y(0) = 0 and y(0) + integral of (1-s) * 2s = 1/3
    np.testing.assert_allclose(out, [0.0, 1.0 / 3.0], atol=1e-12)
    jet = SampledJet.from_callables(grid, 1, 2,
                                    [lambda t: t ** 2, lambda t: 2 * t,
                                     lambda t: 2 * np.ones_like(t)])
    np.testing.assert_allclose(out, apply_operator(op, jet), atol=1e-12)


def test_lift_multipoint():
    op = MultipointBoundaryOperator(2, 1, 0.0, 1.0, [
        BoundaryTerm(node=0.5, order=1, beta=np.array([[1.0], [0.0]])),
        BoundaryTerm(node=1.0, order=0, beta=np.array([[0.0], [1.0]])),
    ])
    grid = Grid(0.0, 1.0, 128)
    lifted = lift(op)
    v = np.stack([grid.nodes ** 2, 2.0 * grid.nodes], axis=1)
    np.testing.assert_allclose(lifted.apply_values(grid, v), [1.0, 1.0], atol=1e-12)


def test_norm_upper_bounds_frozen():
    assert abs(norm_upper_bound(multipointify(_p2_operator(), 8)) - 2.5) <= 1e-12
    assert abs(norm_upper_bound(multipointify(_p3_operator(), 8)) - 3.0) <= 1e-12


def test_norm_lower_bound_on_corpus():
    for name, expected in (("p1", 1.0), ("p2", 2.0), ("p3", 2.0)):
        problem = corpus.build_problem(name, 256)
        probes = default_probe_jets(problem.r, problem.m, problem.grid)
        low = norm_lower_bound(problem.operator, probes)
        assert abs(low - expected) <= 1e-9


def test_norm_lower_bound_needs_probes():
    problem = corpus.build_problem("p1", 64)
    with pytest.raises(ValueError):
        norm_lower_bound(problem.operator, [])


def test_probe_family_shapes():
    grid = Grid(0.0, 1.0, 64)
    assert len(default_probe_jets(1, 2, grid)) == 6   # 3 shapes per component
    assert len(default_probe_jets(2, 1, grid)) == 4   # + one monomial probe
    for jet in default_probe_jets(2, 1, grid):
        assert jet.r == 2 and jet.m == 1


def test_uniform_norm_bound_scalar_rows():
    # For one-column operators the discretized norms never exceed
    # sum of alpha norms + the total-variation norm of the measure block.
    for name in ("p1", "p2"):
        op = corpus.build_problem(name, 64).operator
        bound = sum(np.abs(alpha).sum(axis=0).max() for alpha in op.alphas)
        bound += op.phi.norm_tv()
        for k in (1, 2, 4, 8, 16, 32, 64):
            assert norm_upper_bound(multipointify(op, k)) <= bound + 1e-12


def test_uniform_norm_bound_entrywise_for_systems():
    # With several columns the max-column-sum TV norm can undercount rows
    # that peak in different columns, so the robust bound is the entrywise
    # total-variation sum.  p3 shows the gap: sigma_k = 3 > 2 = TV norm.
    op = _p3_operator()
    tv_norm_bound = op.phi.norm_tv()
    entrywise_bound = op.phi.entrywise_tv_sum()
    for k in (1, 2, 4, 8, 16, 32, 64):
        sigma_k = norm_upper_bound(multipointify(op, k))
        assert sigma_k <= entrywise_bound + 1e-12
    assert norm_upper_bound(multipointify(op, 4)) > tv_norm_bound + 0.5


def test_general_operator_validation():
    phi = MatrixMeasure([[ScalarMeasure.zero(0.0, 1.0)]])
    with pytest.raises(ValueError):
        GeneralBoundaryOperator(2, 1, [], phi)  # r = 2 needs one alpha of shape (2, 1)


def test_multipoint_merges_duplicate_terms():
    op = MultipointBoundaryOperator(1, 1, 0.0, 1.0, [
        BoundaryTerm(node=0.5, order=0, beta=np.array([[1.0]])),
        BoundaryTerm(node=0.5, order=0, beta=np.array([[2.0]])),
    ])
    assert len(op.terms) == 1
    np.testing.assert_array_equal(op.terms[0].beta, [[3.0]])
