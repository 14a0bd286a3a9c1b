import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdorff_op.measure_kernel import (
    DiscretizedMeasure,
    discretize,
    explicit_measure,
    finite_group_uniform_measure,
    gauss_legendre_measure,
    gauss_legendre_panels,
    kernel_form,
    kernel_from_values,
    kernel_l1_norm,
    kernel_on_measure,
    monte_carlo_measure,
    truncation_sequence,
)


def _dense_trapezoid(fn, lo, hi, steps=10**6):
    """Independent oracle: trapezoid rule on a uniform grid."""
    x = np.linspace(lo, hi, steps + 1)
    y = fn(x)
    return float((0.5 * (y[1:] + y[:-1]) * np.diff(x)).sum())


# measures


def test_explicit_measure_roundtrip():
    m = explicit_measure([0.0, 1.5], [0.25, 0.75])
    assert len(m) == 2
    assert m.total_mass() == pytest.approx(1.0)


def test_measure_validation_errors():
    with pytest.raises(ValueError):
        explicit_measure([0.0, 1.0], [0.5])
    with pytest.raises(ValueError):
        explicit_measure([], [])
    with pytest.raises(ValueError, match="index 1"):
        explicit_measure([0.0, 1.0], [0.5, -0.5])
    with pytest.raises(ValueError):
        explicit_measure([0.0], [math.inf])


def test_gauss_legendre_two_point():
    m = gauss_legendre_measure((-1.0, 1.0), 2)
    assert m.nodes == pytest.approx([-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)], abs=1e-15)
    assert m.weights == pytest.approx([1.0, 1.0], abs=1e-15)


def test_gauss_legendre_cubic_exactness():
    m = gauss_legendre_measure((0.0, 1.0), 16)
    assert float((m.weights * m.nodes**3).sum()) == pytest.approx(0.25, abs=1e-14)


def test_gauss_legendre_empty_interval():
    with pytest.raises(ValueError):
        gauss_legendre_measure((1.0, 1.0), 4)
    with pytest.raises(ValueError):
        gauss_legendre_measure((0.0, 1.0), 0)


def test_monte_carlo_measure():
    m = monte_carlo_measure((0.0, 1.0), 4, seed=3)
    assert len(m) == 4
    assert np.all((m.nodes >= 0.0) & (m.nodes <= 1.0))
    assert m.weights == pytest.approx([0.25] * 4)
    again = monte_carlo_measure((0.0, 1.0), 4, seed=3)
    assert np.array_equal(m.nodes, again.nodes)


def test_finite_group_uniform():
    m = finite_group_uniform_measure(8)
    assert m.total_mass() == pytest.approx(1.0, abs=1e-15)
    assert np.array_equal(m.nodes, np.arange(8.0))


def test_panels_cover_interval():
    m = gauss_legendre_panels((0.0, 7.5), points_per_panel=8)
    assert m.total_mass() == pytest.approx(7.5, abs=1e-12)
    assert np.all(np.diff(m.nodes) > 0)


def test_discretize_dispatch_and_errors():
    m = discretize({"scheme": "gauss_legendre", "interval": [0.0, 1.0], "count": 4})
    assert len(m) == 4
    m = discretize({"scheme": "explicit", "nodes": [1.0], "weights": [2.0]})
    assert m.total_mass() == pytest.approx(2.0)
    with pytest.raises(ValueError, match="scheme"):
        discretize({"scheme": "spectral"})
    with pytest.raises(ValueError):
        discretize({})


# kernel forms


def test_kernel_form_values():
    u = np.array([0.0, 1.0, 3.0])
    assert kernel_form("exp_decay", a=2.0)(u) == pytest.approx(np.exp(-2.0 * u))
    assert kernel_form("power", a=1.0)(u) == pytest.approx(1.0 / (1.0 + u))
    assert kernel_form("constant", c=0.5)(u) == pytest.approx([0.5] * 3)
    assert kernel_form("indicator", lo=0.5, hi=2.0)(u) == pytest.approx([0.0, 1.0, 0.0])


def test_kernel_form_integrability_flags():
    assert kernel_form("exp_decay", a=1.0).integrable_on_halfline
    assert kernel_form("power", a=2.0).integrable_on_halfline
    assert not kernel_form("power", a=1.0).integrable_on_halfline
    assert not kernel_form("constant", c=1.0).integrable_on_halfline
    assert kernel_form("indicator", lo=0.0, hi=1.0).integrable_on_halfline


def test_kernel_form_validation():
    with pytest.raises(ValueError, match="unknown kernel form"):
        kernel_form("gauss", a=1.0)
    with pytest.raises(ValueError):
        kernel_form("exp_decay", b=1.0)
    with pytest.raises(ValueError):
        kernel_form("power", a=-1.0)
    with pytest.raises(ValueError):
        kernel_form("indicator", lo=1.0, hi=0.0)


def test_kernel_values_validation():
    with pytest.raises(ValueError):
        kernel_from_values([])
    with pytest.raises(ValueError):
        kernel_from_values([1.0, math.nan])


# L1 norm


def test_l1_norm_probability_measure():
    m = finite_group_uniform_measure(10)
    k = kernel_from_values(np.ones(10))
    assert kernel_l1_norm(k, m) == pytest.approx(1.0, abs=1e-15)


def test_l1_norm_signed_values():
    m = explicit_measure([0.0, 1.0], [1.0, 1.0])
    k = kernel_from_values([2.0, -3.0])
    assert kernel_l1_norm(k, m) == 5.0


def test_l1_norm_exp_decay_against_closed_form_and_trapezoid():
    m = gauss_legendre_measure((0.0, 20.0), 64)
    k = kernel_on_measure(kernel_form("exp_decay", a=1.0), m)
    value = kernel_l1_norm(k, m)
    assert value == pytest.approx(1.0, abs=1e-8)
    oracle = _dense_trapezoid(lambda u: np.exp(-u), 0.0, 20.0)
    assert value == pytest.approx(oracle, abs=1e-8)


def test_l1_norm_misaligned_lengths():
    m = explicit_measure([0.0, 1.0], [1.0, 1.0])
    k = kernel_from_values([1.0])
    with pytest.raises(ValueError, match="2"):
        kernel_l1_norm(k, m)


def test_l1_norm_absolute_homogeneity():
    m = gauss_legendre_measure((0.0, 5.0), 32)
    base = kernel_on_measure(kernel_form("exp_decay", a=1.0), m)
    scaled = kernel_from_values(-4.0 * base.values)
    assert kernel_l1_norm(scaled, m) == pytest.approx(4.0 * kernel_l1_norm(base, m), rel=1e-15)


def test_l1_norm_refinement_cauchy():
    def norm_at(count):
        m = gauss_legendre_measure((0.0, 10.0), count)
        k = kernel_on_measure(kernel_form("exp_decay", a=0.7), m)
        return kernel_l1_norm(k, m)

    a, b, c = norm_at(8), norm_at(16), norm_at(32)
    assert abs(c - b) < abs(b - a)


# truncation sequences


def test_truncation_power_kernel_log_growth():
    pairs = truncation_sequence(kernel_form("power", a=1.0), [1.0, 10.0, 100.0])
    norms = [kernel_l1_norm(k, m) for k, m in pairs]
    assert norms == pytest.approx(
        [math.log(2.0), math.log(11.0), math.log(101.0)], abs=1e-6
    )


def test_truncation_exp_kernel_closed_form():
    pairs = truncation_sequence(kernel_form("exp_decay", a=1.0), [5.0, 10.0])
    norms = [kernel_l1_norm(k, m) for k, m in pairs]
    assert norms == pytest.approx([1.0 - math.exp(-5.0), 1.0 - math.exp(-10.0)], abs=1e-6)


def test_truncation_single_endpoint_matches_direct_rule():
    (kernel, measure), = truncation_sequence(
        kernel_form("power", a=1.0), [1.0], points_per_panel=8
    )
    direct = discretize({"scheme": "gauss_legendre", "interval": [0.0, 1.0], "count": 8})
    assert np.array_equal(measure.nodes, direct.nodes)
    assert np.array_equal(measure.weights, direct.weights)


def test_truncation_norms_nondecreasing():
    pairs = truncation_sequence(kernel_form("power", a=1.5), [0.5, 2.0, 4.0, 16.0])
    norms = [kernel_l1_norm(k, m) for k, m in pairs]
    assert all(b >= a for a, b in zip(norms, norms[1:]))


def test_truncation_endpoint_validation():
    with pytest.raises(ValueError):
        truncation_sequence(kernel_form("power", a=1.0), [2.0, 1.0])
    with pytest.raises(ValueError):
        truncation_sequence(kernel_form("power", a=1.0), [-1.0, 1.0])


@settings(max_examples=40)
@given(
    st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=1, max_size=40),
    st.floats(min_value=-8.0, max_value=8.0),
)
def test_l1_norm_scaling_property(values, scale):
    m = finite_group_uniform_measure(len(values))
    base = kernel_from_values(values)
    scaled = kernel_from_values(scale * base.values)
    assert kernel_l1_norm(scaled, m) == pytest.approx(
        abs(scale) * kernel_l1_norm(base, m), rel=1e-12, abs=1e-15
    )
