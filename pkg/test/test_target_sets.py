"""
Target sets: projection examples, property suites against a scipy QP oracle,
containment and the one-sided Hausdorff estimate.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from Common.errors import DimensionError, UnboundedSetError
from Factories.TargetSetFactory import TargetSetFactory
from Services.Geometry.target_sets import (
    Box, Intersection, Orthant, Product, WeightedL1Ball, WeightedSlab, hausdorff_onesided, is_subset
)
from Services.Probability.finite_distributions import make_generator

vectors = st.lists(st.floats(-3.0, 3.0), min_size=5, max_size=5).map(np.array)
positive_weights = st.lists(st.floats(0.2, 3.0), min_size=5, max_size=5).map(np.array)


def _sets_5d():
    return [
        Orthant(5),
        WeightedL1Ball([1.0, 2.0, 0.5, 1.0, 3.0], 0.7),
        WeightedSlab([1.0, -1.0, 0.5, 0.0, 2.0], 0.3),
        Box([-1.0, 0.0, -0.5, -2.0, 0.0], [1.0, 0.5, 0.5, 2.0, 0.0]),
        Product([Orthant(2), WeightedSlab([1.0, -1.0, 1.0], 0.2)]),
        Intersection([WeightedL1Ball.unit(5), WeightedSlab([1.0, -1.0, 0.0, 0.0, 1.0], 0.1)]),
    ]


def _l1_constraints(weights, radius, dim):
    # |y_i| <= u_i, sum w_i u_i <= r over the stacked variable (y, u)
    return [
        {"type": "ineq", "fun": lambda z: z[dim:] - z[:dim]},
        {"type": "ineq", "fun": lambda z: z[dim:] + z[:dim]},
        {"type": "ineq", "fun": lambda z: radius - weights @ z[dim:]},
    ]


def _y_only_qp(v, constraints, x0):
    result = minimize(lambda z: 0.5 * np.sum((z[:len(v)] - v) ** 2), x0,
                      jac=lambda z: np.concatenate([z[:len(v)] - v, np.zeros(len(z) - len(v))]),
                      constraints=constraints, method="SLSQP", options={"ftol": 1e-15, "maxiter": 1000})
    return result.x[:len(v)]


def test_projection_examples():
    assert Orthant(2).project([-1.0, 2.0]).tolist() == [0.0, 2.0]
    assert WeightedL1Ball([1, 1], 0.2).project([0.3, 0.3]) == pytest.approx([0.1, 0.1])
    assert WeightedSlab([1, -1], 0.4).project([1.0, 0.0]) == pytest.approx([0.7, 0.3])
    assert WeightedL1Ball([2, 2], 0.8).project([0.4, 0.4]) == pytest.approx([0.2, 0.2])
    polytope = Intersection([WeightedL1Ball.unit(2), WeightedSlab([1, -1], 0.0)])
    assert polytope.project([1.0, 0.0]) == pytest.approx([0.5, 0.5], abs=1e-8)


def test_distance_examples():
    assert Orthant(2).distance([0.3, 0.4]) == 0.0
    assert WeightedL1Ball([1, 1], 0.1).distance([0.5, 0.0]) == pytest.approx(0.4)
    product = Product([Orthant(1), WeightedSlab([1, -1], 0.0)])
    assert product.project([-3.0, 1.0, 0.0]) == pytest.approx([0.0, 0.5, 0.5])
    assert product.distance([-3.0, 1.0, 0.0]) == pytest.approx(np.sqrt(9.5))


def test_contains_examples():
    assert Orthant(3).contains(np.zeros(3), 0.0)
    assert not WeightedSlab([1, -1], 0.1).contains([0.5, 0.35], 0.0)
    ball = WeightedL1Ball([1.0, 3.0], 0.5)
    assert ball.contains(ball.project([4.0, -2.0]), 1e-9)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        Orthant(2).project([1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        Intersection([Orthant(2), Orthant(3)])
    with pytest.raises(DimensionError):
        Product([Orthant(2)], split=[3])


def test_degenerate_parameters_are_legal():
    assert WeightedL1Ball([1, 1], 0.0).project([0.3, -0.2]).tolist() == [0.0, 0.0]
    slab = WeightedSlab([1, -1], 0.0)
    assert slab.project([1.0, 0.0]) == pytest.approx([0.5, 0.5])


@settings(max_examples=300, deadline=None)
@given(vectors, vectors)
def test_projection_properties(v, w):
    rng = make_generator(0)
    for target in _sets_5d():
        # Dykstra stops at its own tolerance, so intersections get a looser one
        tol = 1e-7 if isinstance(target, Intersection) else 1e-9
        pv, pw = target.project(v), target.project(w)
        assert target.contains(pv, tol)
        assert target.project(pv) == pytest.approx(pv, abs=tol)
        assert np.linalg.norm(pv - pw) <= np.linalg.norm(v - w) + tol
        # variational inequality against points inside the set
        for c in (target.project(rng.uniform(-2, 2, 5)) for _ in range(5)):
            assert (v - pv) @ (c - pv) <= tol * max(1.0, np.linalg.norm(v))
        assert target.distance(v) == pytest.approx(np.linalg.norm(v - pv), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(vectors, positive_weights, st.floats(0.05, 2.0))
def test_weighted_l1_ball_matches_qp(v, weights, radius):
    ball = WeightedL1Ball(weights, radius)
    projected = ball.project(v)
    oracle = _y_only_qp(v, _l1_constraints(weights, radius, 5), np.zeros(10))
    assert projected == pytest.approx(oracle, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(vectors, st.lists(st.floats(-1.0, 1.0), min_size=5, max_size=5).map(np.array), st.floats(0.0, 0.3))
def test_dykstra_matches_qp(v, normal, half_width):
    if np.linalg.norm(normal) < 0.1:
        normal = np.ones(5)
    polytope = Intersection([WeightedL1Ball.unit(5), WeightedSlab(normal, half_width)])
    projected = polytope.project(v)
    constraints = _l1_constraints(np.ones(5), 1.0, 5) + [
        {"type": "ineq", "fun": lambda z: half_width - normal @ z[:5]},
        {"type": "ineq", "fun": lambda z: half_width + normal @ z[:5]},
    ]
    oracle = _y_only_qp(v, constraints, np.concatenate([np.zeros(5), np.full(5, 0.2)]))
    assert projected == pytest.approx(oracle, abs=1e-5)


def test_dykstra_runs_until_increments_settle():
    # the iterate repeats after the second sweep while the corrections are still moving
    polytope = Intersection([WeightedL1Ball.unit(5), WeightedSlab(np.ones(5), 0.0)])
    projected = polytope.project([0.0, 0.0, 0.0, 0.0, 2.0])
    assert projected == pytest.approx([-0.125] * 4 + [0.5], abs=1e-7)
    assert np.abs(projected).sum() <= 1.0 + 1e-9
    assert abs(projected.sum()) <= 1e-9


def test_product_projection_is_blockwise():
    first, second = WeightedL1Ball([1.0, 2.0], 0.3), WeightedSlab([1.0, 1.0, -1.0], 0.1)
    product = Product([first, second])
    v = np.array([0.5, -0.4, 1.0, 2.0, -0.5])
    expected = np.concatenate([first.project(v[:2]), second.project(v[2:])])
    assert product.project(v).tolist() == expected.tolist()


def test_hausdorff_onesided():
    rng = make_generator(1)
    big, small = WeightedL1Ball.unit(2), WeightedL1Ball([1.0, 1.0], 0.1)
    assert hausdorff_onesided(big, big, 200, rng) == pytest.approx(0.0, abs=1e-12)
    assert hausdorff_onesided(small, big, 200, rng) == pytest.approx(0.0, abs=1e-12)
    # vertices of a polytope make the value exact, with or without samples
    assert hausdorff_onesided(WeightedL1Ball([1, 1], 0.2), small, 0, rng) == pytest.approx(0.1, abs=1e-12)
    assert hausdorff_onesided(WeightedL1Ball([1, 1], 0.2), small, 1_000, rng) == pytest.approx(0.1, abs=1e-12)
    boxed = hausdorff_onesided(WeightedL1Ball.unit(2), WeightedL1Ball([1, 1], 0.5), 1_000, rng,
                               box=([-1.0, -1.0], [1.0, 1.0]))
    assert boxed == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(UnboundedSetError):
        hausdorff_onesided(Orthant(2), small, 10, rng)


def test_vertices_and_subset():
    ball = WeightedL1Ball([1.0, 2.0], 1.0)
    assert sorted(map(tuple, ball.vertices().tolist())) == [(-1.0, 0.0), (0.0, -0.5), (0.0, 0.5), (1.0, 0.0)]
    assert is_subset(WeightedL1Ball([1, 1], 0.5), WeightedL1Ball.unit(2))
    assert not is_subset(WeightedL1Ball.unit(2), WeightedL1Ball([1, 1], 0.5))
    parity = Intersection([Box.unit(2), WeightedSlab([1.0, -1.0], 0.25)])
    assert {tuple(v) for v in parity.vertices().tolist()} == {(0.0, 0.0), (0.25, 0.0), (1.0, 0.75),
                                                              (1.0, 1.0), (0.75, 1.0), (0.0, 0.25)}


def test_factory_round_trip():
    target = Product([Intersection([WeightedL1Ball.unit(2), WeightedL1Ball([2.0, 1.0], 0.5)]),
                      Intersection([Box.unit(2), WeightedSlab([2.0, -2.0], 0.1)]), Orthant(1)])
    rebuilt = TargetSetFactory.create_target(target.to_config())
    v = np.array([0.7, -0.2, 1.5, -0.3, -1.0])
    assert rebuilt.project(v) == pytest.approx(target.project(v))
    assert rebuilt.to_config() == target.to_config()
