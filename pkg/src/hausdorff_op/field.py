"""Scalar fields on R^n with analytic gradients, plus discrete norms.

Built-in field kinds (gaussian, polynomial, gaussian_times_poly) carry
analytic gradients that are cross-checked against central finite differences
at construction, so a typo in a derivative formula fails immediately rather
than surfacing as a loose bound three modules later.  Custom fields skip the
check and may omit the gradient entirely; Sobolev norms then refuse them.

All norms integrate with a supplied :class:`~.geometry.DomainQuadrature` and
reduce in deterministic pairwise order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DomainQuadrature
from .summation import pairwise_sum

P_MIN = 1.0
P_MAX = 16.0

FD_CHECK_POINTS = 100
FD_CHECK_STEP = 1e-5
FD_CHECK_TOL = 1e-6
FD_CHECK_SEED = 1812


class ScalarField:
    """A scalar function with vectorized evaluation and optional gradient.

    ``values`` maps an (m, n) point array to an (m,) array; ``gradients``
    maps it to (m, n).  Fields compose with isometries and form a vector
    space under + and scalar *.
    """

    def __init__(self, dimension: int, values_fn, gradients_fn=None, kind: str = "custom"):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)
        self.kind = kind
        self._values_fn = values_fn
        self._gradients_fn = gradients_fn

    @property
    def has_gradient(self) -> bool:
        return self._gradients_fn is not None

    def _check_points(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {pts.shape[1]}, field has dimension {self.dimension}"
            )
        return pts

    def values(self, points) -> np.ndarray:
        pts = self._check_points(points)
        out = np.asarray(self._values_fn(pts), dtype=float)
        if out.shape != (len(pts),):
            raise ValueError(
                f"field evaluation returned shape {out.shape}, expected ({len(pts)},)"
            )
        return out

    def gradients(self, points) -> np.ndarray:
        if not self.has_gradient:
            raise ValueError(f"field kind {self.kind!r} has no gradient")
        pts = self._check_points(points)
        out = np.asarray(self._gradients_fn(pts), dtype=float)
        if out.shape != pts.shape:
            raise ValueError(
                f"field gradient returned shape {out.shape}, expected {pts.shape}"
            )
        return out

    def __call__(self, x) -> float:
        return float(self.values(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def grad(self, x) -> np.ndarray:
        return self.gradients(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if not isinstance(other, ScalarField):
            return NotImplemented
        if other.dimension != self.dimension:
            raise ValueError(
                f"cannot add fields of dimension {self.dimension} and {other.dimension}"
            )
        grads = None
        if self.has_gradient and other.has_gradient:
            grads = lambda pts: self.gradients(pts) + other.gradients(pts)
        return ScalarField(
            self.dimension,
            lambda pts: self.values(pts) + other.values(pts),
            grads,
            kind="sum",
        )

    def __mul__(self, scalar) -> "ScalarField":
        c = float(scalar)
        grads = None
        if self.has_gradient:
            grads = lambda pts: c * self.gradients(pts)
        return ScalarField(
            self.dimension, lambda pts: c * self.values(pts), grads, kind="scaled"
        )

    __rmul__ = __mul__

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return self + (-1.0) * other

    def compose(self, iso) -> "ScalarField":
        """The pullback x -> f(Vx + b); gradient gains the factor V^T."""
        if iso.dimension != self.dimension:
            raise ValueError(
                f"isometry dimension {iso.dimension} vs field dimension {self.dimension}"
            )
        grads = None
        if self.has_gradient:
            # chain rule: grad of f(Vx+b) at x is V^T grad f(Vx+b)
            grads = lambda pts: self.gradients(iso.apply_many(pts)) @ iso.matrix
        return ScalarField(
            self.dimension,
            lambda pts: self.values(iso.apply_many(pts)),
            grads,
            kind="composed",
        )


def _fd_gradient(f: ScalarField, points: np.ndarray, step: float) -> np.ndarray:
    m, n = points.shape
    out = np.empty((m, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        out[:, j] = (f.values(points + e) - f.values(points - e)) / (2.0 * step)
    return out


def _self_check(f: ScalarField, points: np.ndarray):
    fd = _fd_gradient(f, points, FD_CHECK_STEP)
    an = f.gradients(points)
    defect = np.abs(an - fd) / (1.0 + np.abs(an))
    worst = float(defect.max())
    if worst > FD_CHECK_TOL:
        raise ValueError(
            f"analytic gradient of {f.kind!r} disagrees with finite differences: "
            f"relative defect {worst:.3e} exceeds {FD_CHECK_TOL:.0e}"
        )


def gaussian(center, width: float) -> ScalarField:
    """f(x) = exp(-||x - center||^2 / width^2)."""
    c = np.asarray(center, dtype=float).reshape(-1).copy()
    w = float(width)
    if w <= 0:
        raise ValueError(f"width must be > 0, got {width}")
    n = len(c)

    def values(pts):
        return np.exp(-((pts - c) ** 2).sum(axis=1) / (w * w))

    def gradients(pts):
        return (-2.0 / (w * w)) * (pts - c) * values(pts)[:, None]

    f = ScalarField(n, values, gradients, kind="gaussian")
    rng = np.random.default_rng(FD_CHECK_SEED)
    _self_check(f, c + w * rng.standard_normal((FD_CHECK_POINTS, n)))
    return f


def polynomial(coeffs, dimension: int | None = None) -> ScalarField:
    """Multivariate polynomial sum_a coeffs[a] * x^a.

    ``coeffs`` is an n-dimensional array whose index along axis k is the
    power of x_k; a 1-D array gives a univariate polynomial.
    """
    c = np.asarray(coeffs, dtype=float)
    if dimension is None:
        dimension = c.ndim
    if c.ndim != dimension:
        raise ValueError(
            f"coefficient array has {c.ndim} axes but dimension is {dimension}"
        )
    n = dimension
    degrees = [s - 1 for s in c.shape]

    def _power_tables(pts):
        return [
            pts[:, k][:, None] ** np.arange(degrees[k] + 1) for k in range(n)
        ]

    def values(pts):
        tables = _power_tables(pts)
        out = np.zeros(len(pts))
        for alpha in np.ndindex(c.shape):
            ca = c[alpha]
            if ca == 0.0:
                continue
            term = np.full(len(pts), ca)
            for k in range(n):
                term = term * tables[k][:, alpha[k]]
            out += term
        return out

    def gradients(pts):
        tables = _power_tables(pts)
        out = np.zeros((len(pts), n))
        for alpha in np.ndindex(c.shape):
            ca = c[alpha]
            if ca == 0.0:
                continue
            for j in range(n):
                if alpha[j] == 0:
                    continue
                term = np.full(len(pts), ca * alpha[j])
                for k in range(n):
                    p = alpha[k] - 1 if k == j else alpha[k]
                    term = term * tables[k][:, p]
                out[:, j] += term
        return out

    f = ScalarField(n, values, gradients, kind="polynomial")
    rng = np.random.default_rng(FD_CHECK_SEED + 1)
    _self_check(f, rng.uniform(-1.0, 1.0, (FD_CHECK_POINTS, n)))
    return f


def gaussian_times_poly(center, width: float, coeffs) -> ScalarField:
    """Product of a gaussian envelope and a polynomial factor."""
    g = gaussian(center, width)
    c = np.asarray(coeffs, dtype=float)
    p = polynomial(c, dimension=c.ndim if c.ndim > 0 else 1)
    if p.dimension != g.dimension:
        raise ValueError(
            f"polynomial dimension {p.dimension} vs gaussian dimension {g.dimension}"
        )

    def values(pts):
        return p.values(pts) * g.values(pts)

    def gradients(pts):
        return p.gradients(pts) * g.values(pts)[:, None] + p.values(pts)[:, None] * g.gradients(pts)

    f = ScalarField(g.dimension, values, gradients, kind="gaussian_times_poly")
    rng = np.random.default_rng(FD_CHECK_SEED + 2)
    _self_check(
        f, np.asarray(center, dtype=float) + width * rng.standard_normal((FD_CHECK_POINTS, g.dimension))
    )
    return f


def custom_field(dimension: int, values_fn, gradients_fn=None) -> ScalarField:
    """Wrap caller-supplied vectorized callables; no construction check."""
    return ScalarField(dimension, values_fn, gradients_fn, kind="custom")


@dataclass(frozen=True)
class NormReport:
    """L^p and Sobolev W^{1,p} norms of one field on one quadrature.

    sobolev is exactly lp + sum(per_axis_derivative_lp).
    """

    p: float
    lp: float
    per_axis_derivative_lp: np.ndarray
    sobolev: float
    resolution: int


def _check_p(p: float) -> float:
    p = float(p)
    if p < P_MIN:
        raise ValueError(f"p must be >= {P_MIN}, got {p}")
    if p > P_MAX:
        raise ValueError(f"p must be <= {P_MAX} at desk scale, got {p}")
    return p


def _weighted_lp(values: np.ndarray, quad: DomainQuadrature, p: float) -> float:
    powered = np.abs(values) if p == 1.0 else np.abs(values) ** p
    total = float(pairwise_sum(quad.weights * powered))
    return total if p == 1.0 else total ** (1.0 / p)


def lp_norm(f: ScalarField, p: float, quad: DomainQuadrature) -> float:
    """Discrete L^p norm (sum of w * |f|^p) ** (1/p) over the quadrature."""
    p = _check_p(p)
    return _weighted_lp(f.values(quad.nodes), quad, p)


def sobolev_norm(f: ScalarField, p: float, quad: DomainQuadrature) -> NormReport:
    """W^{1,p} norm: ||f||_p plus the sum of per-axis derivative L^p norms."""
    p = _check_p(p)
    if not f.has_gradient:
        raise ValueError(
            f"sobolev_norm needs a gradient but field kind {f.kind!r} has none"
        )
    lp = _weighted_lp(f.values(quad.nodes), quad, p)
    grads = f.gradients(quad.nodes)
    per_axis = np.array(
        [_weighted_lp(grads[:, k], quad, p) for k in range(f.dimension)]
    )
    return NormReport(
        p=p,
        lp=lp,
        per_axis_derivative_lp=per_axis,
        sobolev=lp + float(per_axis.sum()),
        resolution=quad.resolution,
    )


def hajlasz_defect(f: ScalarField, witness: ScalarField, pairs: np.ndarray) -> float:
    """Worst |f(x)-f(y)| - ||x-y|| (g(x)+g(y)) over an (m, 2, n) pair array.

    Nonpositive (up to roundoff) when ``witness`` is a valid metric upper
    gradient for f on the sampled pairs.
    """
    pts = np.asarray(pairs, dtype=float)
    if pts.ndim != 3 or pts.shape[1] != 2:
        raise ValueError(f"pairs must have shape (m, 2, n), got {pts.shape}")
    x, y = pts[:, 0, :], pts[:, 1, :]
    rho = np.sqrt(((x - y) ** 2).sum(axis=1))
    lhs = np.abs(f.values(x) - f.values(y))
    rhs = rho * (witness.values(x) + witness.values(y))
    return float((lhs - rhs).max())
