"""Convex per-round losses with exact subgradients.

Four families cover every stream the package produces: linear losses g.x,
one-dimensional absolute losses G*|x_k - e|, hinge losses for margin
classification, and L2-regularized logistic losses. Each exposes

  value(x)               loss at a sparse point,
  subgradient(x)         a sparse subgradient at that point,
  active_coordinates()   the coordinates the loss can ever depend on,
  values_on_axis(k, xs)  vectorized values along the segment x = xs * e_k,

the last being what the one-dimensional grid comparators evaluate.

Kink conventions: the hinge at margin exactly 1 and the absolute loss at its
center both return the zero subgradient (a valid element of the
subdifferential, and the one that keeps learners stationary at the kink).
"""

import math

import numpy as np

from .core import Example, SparseVector, axpy, dot

__all__ = [
    "LinearLoss",
    "AbsoluteLoss",
    "HingeLoss",
    "LogisticLoss",
    "ConvexQuadratic",
    "sigmoid",
]

_EMPTY = SparseVector._wrap({})


def sigmoid(z):
    """Numerically stable 1 / (1 + exp(-z))."""
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _log1pexp(z):
    """log(1 + exp(z)) without overflow: max(z, 0) + log1p(exp(-|z|))."""
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


class LinearLoss:
    """f(x) = g . x for a fixed sparse gradient g."""

    __slots__ = ("gradient",)

    def __init__(self, gradient):
        if not isinstance(gradient, SparseVector):
            gradient = SparseVector(gradient)
        self.gradient = gradient

    def value(self, x):
        return dot(self.gradient, x)

    def subgradient(self, x):
        return self.gradient

    def active_coordinates(self):
        return set(self.gradient.support())

    def values_on_axis(self, coord, xs):
        return self.gradient.get(coord) * np.asarray(xs, dtype=float)

    def __repr__(self):
        return f"LinearLoss({self.gradient!r})"


class AbsoluteLoss:
    """f(x) = scale * |x_coord - center|, a vee with its kink at center."""

    __slots__ = ("scale", "center", "coord")

    def __init__(self, scale, center, coord=0):
        scale = float(scale)
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = scale
        self.center = float(center)
        self.coord = int(coord)

    def value(self, x):
        return self.scale * abs(x.get(self.coord) - self.center)

    def subgradient(self, x):
        v = x.get(self.coord)
        if v < self.center:
            return SparseVector._wrap({self.coord: -self.scale})
        if v > self.center:
            return SparseVector._wrap({self.coord: self.scale})
        return _EMPTY

    def active_coordinates(self):
        return {self.coord}

    def values_on_axis(self, coord, xs):
        xs = np.asarray(xs, dtype=float)
        if coord == self.coord:
            return self.scale * np.abs(xs - self.center)
        return np.full(xs.shape, self.scale * abs(self.center))

    def __repr__(self):
        return f"AbsoluteLoss(scale={self.scale}, center={self.center}, coord={self.coord})"


class HingeLoss:
    """f(x) = max(0, 1 - y * (x . theta)) for a labeled example (theta, y)."""

    __slots__ = ("example",)

    def __init__(self, example):
        self.example = example

    def value(self, x):
        return max(0.0, 1.0 - self.example.label * dot(x, self.example.features))

    def subgradient(self, x):
        y = self.example.label
        if y * dot(x, self.example.features) < 1.0:
            return self.example.features.scaled(-y)
        return _EMPTY

    def active_coordinates(self):
        return set(self.example.features.support())

    def values_on_axis(self, coord, xs):
        xs = np.asarray(xs, dtype=float)
        margins = self.example.label * self.example.features.get(coord) * xs
        return np.maximum(0.0, 1.0 - margins)

    def __repr__(self):
        return f"HingeLoss(y={self.example.label:+g}, nnz={len(self.example.features)})"


class LogisticLoss:
    """f(x) = log(1 + exp(-y * (x . theta))) + (lam/2) * ||x||^2.

    The log term is evaluated as max(z, 0) + log1p(exp(-|z|)) with
    z = -y * (x . theta), which stays finite and accurate for |x . theta|
    up to 1e4 and far beyond. The regularizer is part of the loss itself:
    both value and subgradient include it.
    """

    __slots__ = ("example", "lam")

    def __init__(self, example, lam=0.0):
        lam = float(lam)
        if lam < 0:
            raise ValueError("lam must be non-negative")
        self.example = example
        self.lam = lam

    def value(self, x):
        z = -self.example.label * dot(x, self.example.features)
        reg = 0.5 * self.lam * x.norm_sq() if self.lam else 0.0
        return _log1pexp(z) + reg

    def subgradient(self, x):
        y = self.example.label
        coef = -y * sigmoid(-y * dot(x, self.example.features))
        g = self.example.features.scaled(coef)
        if self.lam:
            g = axpy(self.lam, x, g)
        return g

    def active_coordinates(self, x=None):
        # the regularizer's subgradient touches every coordinate the point
        # carries, not just the example's features
        coords = set(self.example.features.support())
        if self.lam and x is not None:
            coords |= set(x.support())
        return coords

    def values_on_axis(self, coord, xs):
        xs = np.asarray(xs, dtype=float)
        z = -self.example.label * self.example.features.get(coord) * xs
        out = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
        if self.lam:
            out = out + 0.5 * self.lam * xs * xs
        return out

    def __repr__(self):
        return f"LogisticLoss(y={self.example.label:+g}, lam={self.lam})"


class ConvexQuadratic:
    """f(x) = 0.5 x^T Q x + q . x + c with Q symmetric positive semidefinite.

    Dense and low-dimensional; this is the oracle vehicle for the composite
    decomposition machinery and its brute-force comparators, not a fifth
    stream kind. `curvature` optionally records per-coordinate strong
    convexity strengths H with f(y) >= f(x) + grad(x).(y-x)
    + sum_i (H_i/2)(y_i-x_i)^2, guaranteed when Q = A^T A + diag(H).
    """

    __slots__ = ("Q", "q", "c", "curvature")

    def __init__(self, Q, q, c=0.0, curvature=None):
        Q = np.asarray(Q, dtype=float)
        q = np.asarray(q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or q.shape != (Q.shape[0],):
            raise ValueError("Q must be square and q must match its dimension")
        if not np.allclose(Q, Q.T):
            raise ValueError("Q must be symmetric")
        self.Q = Q
        self.q = q
        self.c = float(c)
        self.curvature = None if curvature is None else np.asarray(curvature, dtype=float)

    @property
    def n(self):
        return self.Q.shape[0]

    @classmethod
    def random(cls, rng, n, curvature_lo=0.2, curvature_hi=2.0):
        """Random strongly convex quadratic with known per-coordinate strengths."""
        A = rng.normal(size=(n, n)) * rng.uniform(0.2, 1.0)
        H = rng.uniform(curvature_lo, curvature_hi, size=n)
        Q = A.T @ A + np.diag(H)
        q = rng.normal(size=n) * rng.uniform(0.5, 2.0)
        c = float(rng.normal())
        return cls(Q, q, c, curvature=H)

    def _dense(self, x):
        if isinstance(x, SparseVector):
            return x.to_dense(self.n)
        return np.asarray(x, dtype=float)

    def value(self, x):
        v = self._dense(x)
        return float(0.5 * v @ self.Q @ v + self.q @ v + self.c)

    def gradient_dense(self, v):
        return self.Q @ v + self.q

    def subgradient(self, x):
        return SparseVector.from_dense(self.gradient_dense(self._dense(x)))

    def active_coordinates(self):
        return set(range(self.n))

    def value_on_points(self, points):
        """Vectorized values at an (m, n) array of points."""
        pts = np.asarray(points, dtype=float)
        quad = 0.5 * np.einsum("ij,jk,ik->i", pts, self.Q, pts)
        return quad + pts @ self.q + self.c

    def __repr__(self):
        return f"ConvexQuadratic(n={self.n})"
