"""Sparse vectors, axis-aligned feasible boxes, and labeled examples.

Everything downstream manipulates these three types. Vectors are dict-backed
and never store exact zeros, so the cost of an operation tracks the support
actually involved rather than the ambient dimension; high-dimensional text
streams stay cheap. Boxes come in a dense form (explicit bound arrays) and a
uniform form ([lo, hi]^n) that never materializes n copies of the same bound.

All three types are immutable values: operations return new objects.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SparseVector", "Box", "Example", "dot", "axpy", "project"]


class SparseVector:
    """Immutable sparse real vector over non-negative integer coordinates.

    Entries equal to exactly 0.0 are dropped on construction; reading an
    absent coordinate yields 0.0. Values are 64-bit floats.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries=None):
        d = {}
        if entries:
            items = entries.items() if hasattr(entries, "items") else entries
            for i, v in items:
                v = float(v)
                i = int(i)
                if i < 0:
                    raise ValueError(f"coordinate {i} is negative")
                if not math.isfinite(v):
                    raise ValueError(f"coordinate {i} has non-finite value {v!r}")
                if v != 0.0:
                    d[i] = v
        self._entries = d

    @classmethod
    def _wrap(cls, entries):
        # Internal fast path: caller guarantees a fresh dict with no zeros.
        sv = object.__new__(cls)
        sv._entries = entries
        return sv

    def get(self, i, default=0.0):
        return self._entries.get(i, default)

    def __getitem__(self, i):
        return self._entries.get(i, 0.0)

    def items(self):
        return self._entries.items()

    def support(self):
        return self._entries.keys()

    def as_dict(self):
        return dict(self._entries)

    def __len__(self):
        return len(self._entries)

    def __bool__(self):
        return bool(self._entries)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self):
        inner = ", ".join(f"{i}: {v!r}" for i, v in sorted(self._entries.items()))
        return f"SparseVector({{{inner}}})"

    def norm_sq(self):
        return sum(v * v for v in self._entries.values())

    def norm(self):
        return math.sqrt(self.norm_sq())

    def scaled(self, alpha):
        """alpha * self (empty when alpha == 0)."""
        alpha = float(alpha)
        if alpha == 0.0:
            return SparseVector._wrap({})
        return SparseVector._wrap({i: alpha * v for i, v in self._entries.items()})

    def to_dense(self, n):
        out = np.zeros(int(n))
        for i, v in self._entries.items():
            out[i] = v
        return out

    @classmethod
    def from_dense(cls, values):
        arr = np.asarray(values, dtype=float)
        return cls._wrap({int(i): float(v) for i, v in enumerate(arr) if v != 0.0})


def dot(u, v):
    """Inner product of two sparse vectors (sum over the support overlap)."""
    a, b = u._entries, v._entries
    if len(a) > len(b):
        a, b = b, a
    total = 0.0
    for i, ai in a.items():
        bi = b.get(i)
        if bi is not None:
            total += ai * bi
    return total


def axpy(alpha, u, v):
    """v + alpha * u. Entries that cancel to exactly zero are dropped."""
    alpha = float(alpha)
    if alpha == 0.0 or not u:
        return v
    out = dict(v._entries)
    for i, ui in u._entries.items():
        w = out.get(i, 0.0) + alpha * ui
        if w == 0.0:
            out.pop(i, None)
        else:
            out[i] = w
    return SparseVector._wrap(out)


class Box:
    """Axis-aligned product of closed intervals, F = x_i [lower_i, upper_i]."""

    __slots__ = ("n", "_lo", "_hi", "_uniform", "_has_zero", "_total_diam")

    def __init__(self, lower, upper):
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if lo.size == 0:
            raise ValueError("box must have at least one coordinate")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("every lower bound must not exceed its upper bound")
        self.n = int(lo.size)
        self._lo = lo
        self._hi = hi
        self._uniform = False
        self._has_zero = bool(np.all((lo <= 0.0) & (hi >= 0.0)))
        self._total_diam = float(np.sqrt(np.sum((hi - lo) ** 2)))

    @classmethod
    def uniform(cls, n, lo, hi):
        """[lo, hi]^n without materializing n copies of the bounds."""
        n = int(n)
        lo = float(lo)
        hi = float(hi)
        if n < 1:
            raise ValueError("box must have at least one coordinate")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("box bounds must be finite")
        if lo > hi:
            raise ValueError("every lower bound must not exceed its upper bound")
        box = object.__new__(cls)
        box.n = n
        box._lo = lo
        box._hi = hi
        box._uniform = True
        box._has_zero = lo <= 0.0 <= hi
        box._total_diam = (hi - lo) * math.sqrt(n)
        return box

    @classmethod
    def symmetric(cls, n, radius):
        """[-radius, radius]^n."""
        radius = float(radius)
        if radius < 0:
            raise ValueError("radius must be non-negative")
        return cls.uniform(n, -radius, radius)

    @classmethod
    def unit(cls, n):
        """[0, 1]^n."""
        return cls.uniform(n, 0.0, 1.0)

    @property
    def is_uniform(self):
        return self._uniform

    @property
    def contains_zero(self):
        return self._has_zero

    def low(self, i):
        return self._lo if self._uniform else float(self._lo[i])

    def high(self, i):
        return self._hi if self._uniform else float(self._hi[i])

    def clip(self, i, v):
        if self._uniform:
            lo, hi = self._lo, self._hi
        else:
            lo, hi = self._lo[i], self._hi[i]
        if v < lo:
            return lo
        if v > hi:
            return hi
        return v

    def diameter(self, i):
        """Side length of coordinate i: upper_i - lower_i."""
        if self._uniform:
            return self._hi - self._lo
        return float(self._hi[i] - self._lo[i])

    def total_diameter(self):
        """Euclidean diameter sqrt(sum_i (upper_i - lower_i)^2)."""
        return self._total_diam

    def lower_array(self):
        if self._uniform:
            return np.full(self.n, self._lo)
        return self._lo.copy()

    def upper_array(self):
        if self._uniform:
            return np.full(self.n, self._hi)
        return self._hi.copy()

    def contains(self, x, tol=0.0):
        """Whether the (implicitly zero-padded) point lies in the box."""
        for i, v in x.items():
            if i >= self.n:
                return False
            if v < self.low(i) - tol or v > self.high(i) + tol:
                return False
        if not self._has_zero:
            # Implicit zeros only pass where 0 is inside the interval.
            for i in range(self.n):
                if i not in x.support() and not (self.low(i) - tol <= 0.0 <= self.high(i) + tol):
                    return False
        return True

    def describe(self):
        if self._uniform:
            return f"[{self._lo:g}, {self._hi:g}]^{self.n}"
        return f"box(n={self.n})"

    def __repr__(self):
        return f"Box({self.describe()})"


def project(point, box):
    """Euclidean projection onto the box: componentwise clipping.

    Raises ValueError if the point has a non-finite entry. When the box does
    not contain the origin the result is dense over the box dimension, since
    implicit zeros must move to the nearest bound.
    """
    for i, v in point.items():
        if not math.isfinite(v):
            raise ValueError(f"cannot project non-finite value at coordinate {i}")
    out = {}
    if box.contains_zero:
        for i, v in point.items():
            w = box.clip(i, v)
            if w != 0.0:
                out[i] = w
    else:
        for i in range(box.n):
            w = box.clip(i, point.get(i, 0.0))
            if w != 0.0:
                out[i] = w
    return SparseVector._wrap(out)


@dataclass(frozen=True)
class Example:
    """A labeled example: sparse features and a real label.

    Classification streams use labels in {-1.0, +1.0} (ingestion normalizes
    0/1-coded labels).
    """

    features: SparseVector
    label: float
