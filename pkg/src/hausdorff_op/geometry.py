"""Euclidean integration domains and tensor-product quadrature.

Three domain shapes are supported: balls, axis-aligned boxes, and truncated
spaces.  A truncated space is the box ``[-h, h]^n`` used as a finite window
onto all of R^n: quadrature and sampling treat it exactly like the box, but
membership of transformed points is unrestricted (see
:meth:`Domain.escape_distance`), because the underlying domain is unbounded
and the window exists only to make integrals finite.

Grid quadrature is a tensor product of Gauss-Legendre rules over the bounding
box.  For balls, nodes outside the ball are dropped and their weights
discarded; the weight sum then converges to the ball volume from below as the
resolution grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

BALL = "ball"
BOX = "box"
TRUNCATED = "truncated_space"

_SHAPES = (BALL, BOX, TRUNCATED)


@lru_cache(maxsize=64)
def _legendre_rule(count: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(count)
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_rule(lower: float, upper: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[lower, upper]``.

    Exact for polynomials of degree ``2 * count - 1``.
    """
    if count < 1:
        raise ValueError(f"need at least one node, got count={count}")
    if not upper > lower:
        raise ValueError(f"empty interval [{lower}, {upper}]")
    base_nodes, base_weights = _legendre_rule(int(count))
    mid = 0.5 * (lower + upper)
    half = 0.5 * (upper - lower)
    return mid + half * base_nodes, half * base_weights


@dataclass(frozen=True)
class Domain:
    """A closed integration region in R^n.

    Use the :func:`ball`, :func:`box` and :func:`truncated_space`
    constructors; the raw dataclass fields encode all three shapes.
    """

    dimension: int
    shape: str
    center: np.ndarray | None = None
    radius: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    halfwidth: float | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.shape not in _SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}, expected one of {_SHAPES}")

    def _check_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {pts.shape[1]}, domain has dimension {self.dimension}"
            )
        return pts

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise (lower, upper) corners of the quadrature window."""
        if self.shape == BALL:
            return self.center - self.radius, self.center + self.radius
        if self.shape == BOX:
            return self.lower.copy(), self.upper.copy()
        h = self.halfwidth
        return np.full(self.dimension, -h), np.full(self.dimension, h)

    def contains(self, x: np.ndarray) -> bool:
        """Closed membership of a single point in the quadrature region."""
        return bool(self.contains_many(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`contains` over an ``(m, n)`` array."""
        pts = self._check_points(points)
        if self.shape == BALL:
            d2 = ((pts - self.center) ** 2).sum(axis=1)
            return d2 <= self.radius * self.radius
        lo, hi = self.bounding_box()
        return np.logical_and(pts >= lo, pts <= hi).all(axis=1)

    def escape_distance(self, points: np.ndarray) -> np.ndarray:
        """How far each point lies outside the domain (0 inside).

        Truncated spaces return 0 everywhere: the window is quadrature
        metadata and every point of R^n belongs to the underlying domain.
        Balls use the Euclidean excess, boxes the max componentwise excess.
        """
        pts = self._check_points(points)
        if self.shape == TRUNCATED:
            return np.zeros(len(pts))
        if self.shape == BALL:
            dist = np.sqrt(((pts - self.center) ** 2).sum(axis=1))
            return np.maximum(dist - self.radius, 0.0)
        excess_low = np.maximum(self.lower - pts, 0.0)
        excess_high = np.maximum(pts - self.upper, 0.0)
        return np.maximum(excess_low, excess_high).max(axis=1)

    def volume(self) -> float:
        """Lebesgue volume of the quadrature region (closed form)."""
        if self.shape == BALL:
            n = self.dimension
            return math.pi ** (n / 2) * self.radius**n / math.gamma(n / 2 + 1)
        lo, hi = self.bounding_box()
        return float(np.prod(hi - lo))

    def shrink(self, margin: float) -> "Domain":
        """The domain inset by ``margin`` on every side (for interior points)."""
        if margin < 0:
            raise ValueError(f"margin must be >= 0, got {margin}")
        if self.shape == BALL:
            if margin >= self.radius:
                raise ValueError(f"margin {margin} swallows ball of radius {self.radius}")
            return ball(self.center, self.radius - margin)
        lo, hi = self.bounding_box()
        if np.any(hi - lo <= 2 * margin):
            raise ValueError(f"margin {margin} swallows box with extents {hi - lo}")
        return box(lo + margin, hi - margin)

    def sample_uniform(self, count: int, seed: int) -> np.ndarray:
        """Uniform sample of ``count`` points, rejection sampling for balls.

        Deterministic for a fixed seed.  Returns an ``(count, n)`` array
        whose rows all satisfy :meth:`contains`.
        """
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        rng = np.random.default_rng(seed)
        lo, hi = self.bounding_box()
        if self.shape != BALL:
            return rng.uniform(lo, hi, size=(count, self.dimension))
        # acceptance ratio vol(ball)/vol(box) shrinks with dimension; fine at desk scale
        out = np.empty((count, self.dimension))
        got = 0
        while got < count:
            batch = rng.uniform(lo, hi, size=(2 * (count - got) + 16, self.dimension))
            keep = batch[self.contains_many(batch)]
            take = min(len(keep), count - got)
            out[got : got + take] = keep[:take]
            got += take
        return out


def ball(center, radius: float) -> Domain:
    """Closed Euclidean ball."""
    c = np.asarray(center, dtype=float).reshape(-1).copy()
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    c.setflags(write=False)
    return Domain(dimension=len(c), shape=BALL, center=c, radius=float(radius))


def box(lower, upper) -> Domain:
    """Axis-aligned closed box with componentwise corners."""
    lo = np.asarray(lower, dtype=float).reshape(-1).copy()
    hi = np.asarray(upper, dtype=float).reshape(-1).copy()
    if lo.shape != hi.shape:
        raise ValueError(f"corner shapes differ: {lo.shape} vs {hi.shape}")
    if np.any(hi <= lo):
        raise ValueError("box needs upper > lower componentwise")
    lo.setflags(write=False)
    hi.setflags(write=False)
    return Domain(dimension=len(lo), shape=BOX, lower=lo, upper=hi)


def truncated_space(halfwidth: float, dimension: int) -> Domain:
    """The box ``[-h, h]^n`` marking a finite window onto all of R^n."""
    if halfwidth <= 0:
        raise ValueError(f"halfwidth must be > 0, got {halfwidth}")
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    h = float(halfwidth)
    lo = np.full(dimension, -h)
    hi = np.full(dimension, h)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return Domain(
        dimension=dimension, shape=TRUNCATED, lower=lo, upper=hi, halfwidth=h
    )


@dataclass(frozen=True)
class DomainQuadrature:
    """Nodes and weights of a grid rule over a domain.

    ``resolution`` is the Gauss-Legendre node count per axis before any
    ball masking.
    """

    nodes: np.ndarray
    weights: np.ndarray
    resolution: int

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError(
                f"{len(self.nodes)} nodes vs {len(self.weights)} weights"
            )
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)


def build_grid_quadrature(domain: Domain, resolution: int) -> DomainQuadrature:
    """Tensor-product Gauss-Legendre rule over the domain's bounding box.

    Parameters
    ----------
    domain : Domain
        Target region.  For balls, nodes outside the ball are dropped and
        their weights discarded, so the rule integrates over the ball with a
        boundary-cut error that vanishes under refinement.
    resolution : int
        Nodes per axis.  The raw grid has ``resolution ** n`` nodes.

    Returns
    -------
    DomainQuadrature
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    lo, hi = domain.bounding_box()
    n = domain.dimension
    axes = [gauss_legendre_rule(lo[k], hi[k], resolution) for k in range(n)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = axes[0][1]
    for k in range(1, n):
        weights = np.multiply.outer(weights, axes[k][1])
    weights = weights.ravel()
    if domain.shape == BALL:
        inside = domain.contains_many(nodes)
        nodes = nodes[inside]
        weights = weights[inside]
    return DomainQuadrature(
        nodes=np.ascontiguousarray(nodes),
        weights=np.ascontiguousarray(weights),
        resolution=int(resolution),
    )
