import math

import numpy as np
import pytest

from hausdorff_op.field import (
    gaussian,
    gaussian_times_poly,
    lp_norm,
    polynomial,
    sobolev_norm,
)
from hausdorff_op.geometry import ball, box, build_grid_quadrature, truncated_space
from hausdorff_op.isometry import (
    finite_group_family,
    make_isometry,
    motion_family,
    rotation_family,
    shift_family,
)
from hausdorff_op.measure_kernel import (
    explicit_measure,
    finite_group_uniform_measure,
    gauss_legendre_measure,
    kernel_form,
    kernel_from_values,
    kernel_on_measure,
)
from hausdorff_op.operator import (
    DomainEscapeError,
    HausdorffOperator,
    averaging_operator,
    push_field,
)


def _dirac(dimension, domain=None):
    if domain is None:
        domain = truncated_space(50.0, dimension)
    return HausdorffOperator(
        measure=explicit_measure([0.0], [1.0]),
        kernel=kernel_from_values([1.0]),
        family=motion_family([make_isometry(np.eye(dimension))]),
        domain=domain,
    )


def _reflection_pair():
    # (f(x) + f(-x)) / 2 on the line
    return HausdorffOperator(
        measure=explicit_measure([0.0, 1.0], [0.5, 0.5]),
        kernel=kernel_from_values([1.0, 1.0]),
        family=motion_family([make_isometry([[1.0]]), make_isometry([[-1.0]])]),
        domain=truncated_space(20.0, 1),
    )


BUILTIN_FIELDS = [
    gaussian([0.1, -0.2], 1.3),
    polynomial([[1.0, 2.0], [0.5, 0.0]]),
    gaussian_times_poly([0.0, 0.0], 1.0, [[0.0, 1.0], [1.0, 0.0]]),
]


# identity behaviour


@pytest.mark.parametrize("f", BUILTIN_FIELDS, ids=lambda f: f.kind)
def test_dirac_identity_is_bitwise(f):
    op = _dirac(2)
    pts = np.random.default_rng(7).normal(size=(100, 2))
    assert np.array_equal(op.apply_many(f, pts), f.values(pts))
    assert np.array_equal(op.apply_gradient_many(f, pts), f.gradients(pts))


def test_dirac_identity_preserves_norms():
    op = _dirac(2, domain=ball([0.0, 0.0], 2.0))
    f = gaussian([0.2, 0.1], 0.9)
    quad = build_grid_quadrature(ball([0.0, 0.0], 2.0), 24)
    for p in (1.0, 2.0):
        assert lp_norm(op.push(f), p, quad) == pytest.approx(
            lp_norm(f, p, quad), abs=1e-12
        )
        got = sobolev_norm(op.push(f), p, quad).sobolev
        assert got == pytest.approx(sobolev_norm(f, p, quad).sobolev, abs=1e-12)


# small closed forms


def test_two_shift_operator_closed_form():
    # H f(x) = 2 f(x) + 3 f(x + 1) = 5x + 3 for f(x) = x
    op = HausdorffOperator(
        measure=explicit_measure([0.0, 1.0], [1.0, 1.0]),
        kernel=kernel_from_values([2.0, 3.0]),
        family=shift_family([[0.0], [1.0]]),
        domain=truncated_space(10.0, 1),
    )
    f = polynomial([0.0, 1.0])
    for x in (0.0, 0.5, 1.0, -2.0, 0.25):
        assert op.apply(f, [x]) == 5.0 * x + 3.0


def test_reflection_pair_closed_forms():
    op = _reflection_pair()
    f = gaussian_times_poly([0.3], 1.0, [0.0, 1.0])
    xs = np.linspace(-1.5, 1.5, 9)[:, None]
    want = 0.5 * (f.values(xs) + f.values(-xs))
    assert op.apply_many(f, xs) == pytest.approx(want, abs=1e-15)
    want_grad = 0.5 * (f.gradients(xs) - f.gradients(-xs))
    assert np.abs(op.apply_gradient_many(f, xs) - want_grad).max() <= 1e-15


def test_exp_kernel_shift_matches_dense_trapezoid():
    # H f(0) = sum w_i e^{-u_i} f(u_i) ~ integral_0^20 e^{-u} e^{-u^2} du
    measure = gauss_legendre_measure((0.0, 20.0), 64)
    op = HausdorffOperator(
        measure=measure,
        kernel=kernel_on_measure(kernel_form("exp_decay", a=1.0), measure),
        family=shift_family(measure.nodes[:, None]),
        domain=truncated_space(25.0, 1),
    )
    value = op.apply(gaussian([0.0], 1.0), [0.0])
    x = np.linspace(0.0, 20.0, 10**6 + 1)
    y = np.exp(-x) * np.exp(-(x**2))
    oracle = float((0.5 * (y[1:] + y[:-1]) * np.diff(x)).sum())
    assert value == pytest.approx(oracle, abs=1e-6)


# gradients


def test_gradient_matches_finite_differences():
    dom = ball([0.0, 0.0], 3.0)
    op = HausdorffOperator(
        measure=explicit_measure(np.arange(8.0), np.full(8, 1.0 / 8)),
        kernel=kernel_from_values(np.linspace(0.5, 2.0, 8)),
        family=rotation_family(2, 8, seed=31),
        domain=dom,
    )
    f = gaussian([0.3, -0.1], 1.1)
    pts = dom.shrink(0.5).sample_uniform(20, seed=12)
    analytic = op.apply_gradient_many(f, pts)
    step = 1e-5
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        fd = (op.apply_many(f, pts + e) - op.apply_many(f, pts - e)) / (2 * step)
        defect = np.abs(analytic[:, j] - fd) / (1.0 + np.abs(fd))
        assert defect.max() <= 1e-5


# push_field


def test_push_zero_field_has_zero_norm():
    op = _reflection_pair()
    f = 0.0 * gaussian([0.0], 1.0)
    quad = build_grid_quadrature(box([-2.0], [2.0]), 32)
    assert lp_norm(push_field(op, f), 1.0, quad) == 0.0


def test_push_is_additive():
    op = _reflection_pair()
    f = gaussian([0.4], 0.8)
    g = polynomial([0.0, 0.0, 1.0])
    pts = np.random.default_rng(9).uniform(-2.0, 2.0, (100, 1))
    combined = push_field(op, f + g).values(pts)
    split = push_field(op, f).values(pts) + push_field(op, g).values(pts)
    assert np.abs(combined - split).max() <= 1e-12


def test_push_without_gradient_stays_gradient_free():
    op = _reflection_pair()
    f = 0.0 * gaussian([0.0], 1.0)
    assert push_field(op, f).has_gradient
    from hausdorff_op.field import custom_field

    raw = custom_field(1, lambda pts: np.abs(pts[:, 0]))
    assert not push_field(op, raw).has_gradient


# linearity and bounds


def test_linearity():
    op = _reflection_pair()
    f = gaussian([0.2], 1.0)
    g = gaussian_times_poly([0.0], 1.5, [1.0, -1.0])
    pts = np.random.default_rng(3).uniform(-1.5, 1.5, (60, 1))
    lhs = op.apply_many(2.5 * f + (-4.0) * g, pts)
    rhs = 2.5 * op.apply_many(f, pts) - 4.0 * op.apply_many(g, pts)
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_pointwise_bound_by_kernel_mass():
    measure = explicit_measure([0.0, 1.0, 2.0], [0.5, 1.0, 0.25])
    op = HausdorffOperator(
        measure=measure,
        kernel=kernel_from_values([2.0, -3.0, 1.0]),
        family=shift_family([[0.0], [0.7], [-0.4]]),
        domain=truncated_space(10.0, 1),
    )
    l1 = op.kernel_l1()
    f = gaussian_times_poly([0.1], 0.9, [0.0, 1.0, 0.5])
    rng = np.random.default_rng(17)
    for x in rng.uniform(-2.0, 2.0, 50):
        images = np.array([[x + 0.0], [x + 0.7], [x - 0.4]])
        assert abs(op.apply(f, [x])) <= l1 * np.abs(f.values(images)).max()


def test_absolute_kernel_uses_unsigned_mass():
    op = HausdorffOperator(
        measure=explicit_measure([0.0, 1.0], [1.0, 1.0]),
        kernel=kernel_from_values([2.0, -3.0]),
        family=shift_family([[0.0], [0.0]]),
        domain=truncated_space(5.0, 1),
    )
    one = polynomial([1.0])
    assert op.apply(one, [0.0]) == -1.0
    assert op.apply(one, [0.0], absolute_kernel=True) == 5.0


def test_batch_matches_scalar_bitwise():
    op = _reflection_pair()
    f = gaussian([0.3], 1.2)
    pts = np.random.default_rng(5).uniform(-2.0, 2.0, (100, 1))
    batched = op.apply_many(f, pts)
    assert all(batched[k] == op.apply(f, pts[k]) for k in range(len(pts)))


# averaging operators


def test_cyclic_averaging_of_x_squared():
    op = averaging_operator(2, ("cyclic_rotation_2d", 4), ball([0.0, 0.0], 2.0))
    f = polynomial([[0.0], [0.0], [1.0]])  # x^2
    pts = np.random.default_rng(7).uniform(-1.2, 1.2, (50, 2))
    want = 0.5 * (pts[:, 0] ** 2 + pts[:, 1] ** 2)
    assert np.abs(op.apply_many(f, pts) - want).max() <= 1e-12


def test_sign_flip_averaging_on_the_line():
    op = averaging_operator(1, "sign_flips", truncated_space(10.0, 1))
    f = gaussian_times_poly([0.2], 1.0, [1.0, 1.0])
    xs = np.linspace(-2.0, 2.0, 11)[:, None]
    want = 0.5 * (f.values(xs) + f.values(-xs))
    assert np.abs(op.apply_many(f, xs) - want).max() <= 1e-12


def test_haar_mc_averaging_kills_linear_fields():
    op = averaging_operator(2, ("haar_mc", 4096, 11), ball([0.0, 0.0], 2.0))
    f = polynomial([[0.0], [1.0]])  # x_1
    for x in ([1.0, 0.5], [-1.5, 0.3], [0.0, 1.9]):
        sigma = np.linalg.norm(x) / math.sqrt(2 * 4096)
        assert abs(op.apply(f, x)) <= 3.0 * sigma


@pytest.mark.parametrize("group", ["sign_flips", ("cyclic_rotation_2d", 6)])
def test_finite_group_averaging_is_invariant(group):
    dom = ball([0.0, 0.0], 3.0)
    op = averaging_operator(2, group, dom)
    f = gaussian([0.4, 0.2], 1.0)
    kind = group if isinstance(group, str) else group[0]
    order = {} if isinstance(group, str) else {"order": group[1]}
    family, _ = finite_group_family(kind, 2, **order)
    x = np.array([0.7, -0.3])
    base = op.apply(f, x)
    for member in family.members:
        assert op.apply(f, member.apply(x)) == pytest.approx(base, abs=1e-12)


def test_averaging_preserves_sobolev_budget():
    dom = ball([0.0, 0.0], 3.0)
    op = averaging_operator(2, "sign_flips", dom)
    f = gaussian([0.3, 0.1], 0.8)
    quad = build_grid_quadrature(dom, 32)
    lhs = sobolev_norm(op.push(f), 1.0, quad).sobolev
    rhs = (2 + 1) * sobolev_norm(f, 1.0, quad).sobolev
    assert lhs <= rhs


# validation


def test_mismatched_kernel_and_measure():
    with pytest.raises(ValueError, match="kernel has 1 values"):
        HausdorffOperator(
            measure=explicit_measure([0.0, 1.0], [1.0, 1.0]),
            kernel=kernel_from_values([1.0]),
            family=shift_family([[0.0], [1.0]]),
            domain=truncated_space(5.0, 1),
        )


def test_mismatched_family_and_measure():
    with pytest.raises(ValueError, match="family has 1 members"):
        HausdorffOperator(
            measure=explicit_measure([0.0, 1.0], [1.0, 1.0]),
            kernel=kernel_from_values([1.0, 1.0]),
            family=shift_family([[0.0]]),
            domain=truncated_space(5.0, 1),
        )


def test_mismatched_family_and_domain_dimension():
    with pytest.raises(ValueError, match="dimension"):
        HausdorffOperator(
            measure=explicit_measure([0.0], [1.0]),
            kernel=kernel_from_values([1.0]),
            family=motion_family([make_isometry(np.eye(2))]),
            domain=truncated_space(5.0, 1),
        )


def test_point_outside_domain_is_named():
    op = _dirac(2, domain=ball([0.0, 0.0], 1.0))
    f = gaussian([0.0, 0.0], 1.0)
    with pytest.raises(ValueError, match="lies outside the domain"):
        op.apply(f, [2.0, 0.0])


def test_field_dimension_mismatch():
    op = _dirac(2)
    with pytest.raises(ValueError, match="field dimension 1"):
        op.apply(gaussian([0.0], 1.0), [0.0, 0.0])


def test_escape_names_the_member():
    # a 1e-6 shift survives the constructor's sampled check but is caught
    # pointwise at the boundary
    op = HausdorffOperator(
        measure=explicit_measure([0.0, 1.0], [1.0, 1.0]),
        kernel=kernel_from_values([1.0, 1.0]),
        family=shift_family([[0.0], [1e-6]]),
        domain=box([0.0], [1.0]),
    )
    with pytest.raises(DomainEscapeError, match="family member 1"):
        op.apply(polynomial([0.0, 1.0]), [1.0])


def test_non_preserving_family_rejected_at_construction():
    with pytest.raises(ValueError, match="leaves the domain"):
        HausdorffOperator(
            measure=explicit_measure([0.0], [1.0]),
            kernel=kernel_from_values([1.0]),
            family=shift_family([[0.5]]),
            domain=box([0.0], [1.0]),
        )


def test_averaging_needs_centered_domain():
    with pytest.raises(ValueError, match="origin-centered ball"):
        averaging_operator(2, "sign_flips", ball([1.0, 0.0], 2.0))
    with pytest.raises(ValueError, match="origin-centered ball"):
        averaging_operator(2, "sign_flips", box([0.0, 0.0], [1.0, 1.0]))


def test_operator_metadata():
    op = _reflection_pair()
    assert len(op) == 2
    assert op.dimension == 1
    assert op.kernel_l1() == 1.0
