import math

import numpy as np
import pytest

from hausdorff_op import geometry
from hausdorff_op.geometry import (
    ball,
    box,
    build_grid_quadrature,
    gauss_legendre_rule,
    truncated_space,
)


def test_contains_ball_center_boundary_outside():
    b = ball([0.0, 0.0], 1.0)
    assert b.contains([0.0, 0.0])
    assert b.contains([1.0, 0.0])
    assert not b.contains([1.0001, 0.0])


def test_contains_box():
    d = box([0.0, 0.0], [1.0, 1.0])
    assert d.contains([0.5, 0.5])
    assert not d.contains([0.5, 2.0])


def test_contains_dimension_mismatch():
    b = ball([0.0, 0.0], 1.0)
    with pytest.raises(ValueError, match="dimension"):
        b.contains([0.0, 0.0, 0.0])


def test_constructor_validation():
    with pytest.raises(ValueError):
        ball([0.0], -1.0)
    with pytest.raises(ValueError):
        box([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        truncated_space(0.0, 1)
    with pytest.raises(ValueError):
        truncated_space(1.0, 0)


def test_gauss_legendre_two_point_rule():
    nodes, weights = gauss_legendre_rule(-1.0, 1.0, 2)
    assert nodes == pytest.approx([-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)], abs=1e-15)
    assert weights == pytest.approx([1.0, 1.0], abs=1e-15)


def test_box_weight_sum_exact():
    quad = build_grid_quadrature(box([0.0], [1.0]), 16)
    assert quad.weights.sum() == pytest.approx(1.0, abs=1e-14)


def test_box_integrates_x_squared():
    quad = build_grid_quadrature(box([0.0], [1.0]), 16)
    value = float((quad.weights * quad.nodes[:, 0] ** 2).sum())
    assert value == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_polynomial_exactness_up_to_degree():
    # per-axis degree 2*resolution - 1 is integrated exactly over a box
    resolution = 4
    quad = build_grid_quadrature(box([0.0, 0.0], [1.0, 1.0]), resolution)
    deg = 2 * resolution - 1
    value = float((quad.weights * quad.nodes[:, 0] ** deg * quad.nodes[:, 1] ** deg).sum())
    exact = (1.0 / (deg + 1)) ** 2
    assert value == pytest.approx(exact, rel=1e-12)


def test_ball_weight_sum_near_area():
    quad = build_grid_quadrature(ball([0.0, 0.0], 1.0), 64)
    assert quad.weights.sum() == pytest.approx(math.pi, rel=1e-2)


def test_ball_weight_sum_error_shrinks_with_refinement():
    b = ball([0.0, 0.0], 1.0)
    errors = [
        abs(build_grid_quadrature(b, res).weights.sum() - b.volume())
        for res in (32, 64, 128)
    ]
    assert errors[0] > errors[1] > errors[2]


def test_quadrature_nodes_inside_domain():
    b = ball([0.5, -0.5], 2.0)
    quad = build_grid_quadrature(b, 24)
    assert b.contains_many(quad.nodes).all()
    assert (quad.weights > 0).all()


def test_truncated_space_quadrature_is_box_quadrature():
    t = build_grid_quadrature(truncated_space(2.0, 1), 16)
    d = build_grid_quadrature(box([-2.0], [2.0]), 16)
    assert np.array_equal(t.nodes, d.nodes)
    assert np.array_equal(t.weights, d.weights)


def test_sample_uniform_box_mean():
    d = box([0.0], [1.0])
    pts = d.sample_uniform(10**6, seed=5)
    sigma = (1.0 / math.sqrt(12.0)) / 1e3
    assert abs(pts.mean() - 0.5) <= 3.0 * sigma


def test_sample_uniform_ball_area_ratio():
    b = ball([0.0, 0.0], 1.0)
    pts = b.sample_uniform(10**6, seed=9)
    inner = ball([0.0, 0.0], 1.0 / math.sqrt(2.0))
    frac = inner.contains_many(pts).mean()
    sigma = math.sqrt(0.25 / 1e6)
    assert abs(frac - 0.5) <= 3.0 * sigma


def test_sample_uniform_deterministic_and_contained():
    for domain in (ball([1.0, 2.0], 1.5), box([0.0, -1.0], [2.0, 1.0]), truncated_space(3.0, 2)):
        a = domain.sample_uniform(500, seed=77)
        b = domain.sample_uniform(500, seed=77)
        assert np.array_equal(a, b)
        assert domain.contains_many(a).all()


def test_escape_distance():
    b = ball([0.0, 0.0], 1.0)
    assert b.escape_distance(np.array([[2.0, 0.0]]))[0] == pytest.approx(1.0)
    assert b.escape_distance(np.array([[0.3, 0.0]]))[0] == 0.0
    d = box([0.0], [1.0])
    assert d.escape_distance(np.array([[1.25]]))[0] == pytest.approx(0.25)
    t = truncated_space(1.0, 1)
    assert t.escape_distance(np.array([[100.0]]))[0] == 0.0


def test_volume():
    assert ball([0.0, 0.0], 2.0).volume() == pytest.approx(math.pi * 4.0)
    assert ball([0.0, 0.0, 0.0], 1.0).volume() == pytest.approx(4.0 * math.pi / 3.0)
    assert box([0.0, 0.0], [2.0, 3.0]).volume() == pytest.approx(6.0)


def test_shrink():
    b = ball([0.0, 0.0], 1.0).shrink(0.25)
    assert b.radius == pytest.approx(0.75)
    d = box([0.0], [1.0]).shrink(0.1)
    lo, hi = d.bounding_box()
    assert lo[0] == pytest.approx(0.1) and hi[0] == pytest.approx(0.9)
    with pytest.raises(ValueError):
        ball([0.0], 1.0).shrink(1.0)
    with pytest.raises(ValueError):
        box([0.0], [1.0]).shrink(0.5)


def test_resolution_lower_bound():
    with pytest.raises(ValueError):
        build_grid_quadrature(box([0.0], [1.0]), 1)


def test_domain_shape_tags():
    assert ball([0.0], 1.0).shape == geometry.BALL
    assert box([0.0], [1.0]).shape == geometry.BOX
    assert truncated_space(1.0, 1).shape == geometry.TRUNCATED
