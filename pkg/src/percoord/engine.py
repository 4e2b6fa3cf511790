"""Dense fast path for the logistic-regression experiments.

The dict-backed learners are exact, but the L2 term makes every logistic
subgradient's support equal to all features touched so far, which turns each
round into Python-level work proportional to the vocabulary. At the
100k-example scale of the click-stream experiment (and the comparator's
repeated passes over it) that is prohibitive, so this module runs the
identical updates over contiguous arrays: the example stream is compiled
into CSR-style index/value arrays and the iterate, rate accumulators, and
regularizer gradient live in dense vectors.

Trajectory equivalence with the reference learners is pinned by tests; the
semantics (accumulators include the current round, zero accumulators mean no
movement, clipping after every step, losses scored before updating) are the
same, coordinate for coordinate.

Boxes here are uniform [-half_width, half_width]^n, which is the only shape
the logistic experiments use.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .losses import sigmoid

__all__ = [
    "CompiledStream",
    "compile_stream",
    "OnlineResult",
    "logistic_online",
    "StaticResult",
    "logistic_static_optimum",
    "total_static_loss",
]


@dataclass
class CompiledStream:
    """CSR-style view of an example stream."""

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    labels: np.ndarray
    n_features: int

    @property
    def count(self):
        return len(self.labels)

    def matrix(self):
        return scipy.sparse.csr_matrix(
            (self.values, self.indices, self.indptr),
            shape=(self.count, self.n_features),
        )


def compile_stream(examples, n_features):
    """Pack examples into contiguous arrays (feature order: ascending index)."""
    indptr = [0]
    indices = []
    values = []
    labels = []
    for ex in examples:
        for i in sorted(ex.features.support()):
            indices.append(i)
            values.append(ex.features.get(i))
        indptr.append(len(indices))
        labels.append(ex.label)
    return CompiledStream(
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.float64),
        n_features=int(n_features),
    )


@dataclass
class OnlineResult:
    losses: np.ndarray
    point: np.ndarray

    @property
    def cumulative_loss(self):
        return float(self.losses.sum())


class _PerCoordState:
    """Dense mirror of PerCoordinateOGD over a uniform box."""

    def __init__(self, n, half_width, scale):
        self.x = np.zeros(n)
        self.accum = np.zeros(n)
        self.rate_num = scale * 2.0 * half_width  # scale * D_i, uniform
        self.half_width = half_width
        self._g = np.empty(n)
        self._tmp = np.empty(n)

    def step(self, idx, vals, coef, lam):
        g, tmp, x = self._g, self._tmp, self.x
        np.multiply(x, lam, out=g)
        g[idx] += coef * vals
        np.multiply(g, g, out=tmp)
        self.accum += tmp
        np.sqrt(self.accum, out=tmp)
        with np.errstate(divide="ignore"):
            np.divide(self.rate_num, tmp, out=tmp)
        tmp[self.accum == 0.0] = 0.0
        np.multiply(tmp, g, out=tmp)
        x -= tmp
        np.clip(x, -self.half_width, self.half_width, out=x)


class _GlobalState:
    """Dense mirror of AdaptiveGlobalOGD over a uniform box."""

    def __init__(self, n, half_width, scale, estimate_diameter):
        self.x = np.zeros(n)
        self.norm_sq_sum = 0.0
        self.scale = scale
        self.half_width = half_width
        self.side = 2.0 * half_width
        self.estimate_diameter = estimate_diameter
        self.seen = np.zeros(n, dtype=bool)
        self.n_seen = 0
        self.n = n
        self._g = np.empty(n)

    def step(self, idx, vals, coef, lam):
        g, x = self._g, self.x
        np.multiply(x, lam, out=g)
        g[idx] += coef * vals
        if self.estimate_diameter:
            # Coordinates become nonzero only through updates, so the seen
            # set is exactly the union of example supports so far.
            fresh = ~self.seen[idx]
            if fresh.any():
                self.seen[idx[fresh]] = True
                self.n_seen += int(fresh.sum())
            dhat = self.side * math.sqrt(self.n_seen)
        else:
            dhat = self.side * math.sqrt(self.n)
        self.norm_sq_sum += float(g @ g)
        if self.norm_sq_sum <= 0.0:
            return
        eta = self.scale * dhat / math.sqrt(2.0 * self.norm_sq_sum)
        x -= eta * g
        np.clip(x, -self.half_width, self.half_width, out=x)


def _make_state(algorithm, n, half_width, scale, estimate_diameter):
    if algorithm == "per-coord":
        return _PerCoordState(n, half_width, scale)
    if algorithm == "global":
        return _GlobalState(n, half_width, scale, estimate_diameter)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _loss_at(x, idx, vals, y, lam):
    z = -y * float(x[idx] @ vals)
    base = (z if z > 0.0 else 0.0) + math.log1p(math.exp(-abs(z)))
    return base + 0.5 * lam * float(x @ x), z


def logistic_online(stream, algorithm, *, half_width=1.0, scale=0.1, lam=1e-4,
                    estimate_diameter=True):
    """One progressive-validation pass: score each example, then train on it."""
    state = _make_state(algorithm, stream.n_features, half_width, scale, estimate_diameter)
    losses = np.empty(stream.count)
    indptr, indices, values, labels = (
        stream.indptr, stream.indices, stream.values, stream.labels,
    )
    for t in range(stream.count):
        idx = indices[indptr[t]:indptr[t + 1]]
        vals = values[indptr[t]:indptr[t + 1]]
        y = labels[t]
        loss, z = _loss_at(state.x, idx, vals, y, lam)
        losses[t] = loss
        coef = -y * sigmoid(z)
        state.step(idx, vals, coef, lam)
    return OnlineResult(losses=losses, point=state.x)


def total_static_loss(stream, x, lam):
    """sum_t [log(1 + exp(-y_t x.theta_t)) + (lam/2)||x||^2], vectorized."""
    margins = stream.matrix() @ x
    z = -stream.labels * margins
    per_round = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return float(per_round.sum()) + stream.count * 0.5 * lam * float(x @ x)


@dataclass
class StaticResult:
    point: np.ndarray
    loss: float
    converged: bool
    passes: int


def logistic_static_optimum(stream, *, half_width=1.0, scale=0.1, lam=1e-4,
                            tol_rel=1e-6, max_passes=200):
    """Best fixed point by repeated per-coordinate passes until the total
    static loss stalls (relative change below tol_rel between passes)."""
    state = _PerCoordState(stream.n_features, half_width, scale)
    indptr, indices, values, labels = (
        stream.indptr, stream.indices, stream.values, stream.labels,
    )
    prev = None
    total = math.inf
    passes = 0
    for passes in range(1, max_passes + 1):
        for t in range(stream.count):
            idx = indices[indptr[t]:indptr[t + 1]]
            vals = values[indptr[t]:indptr[t + 1]]
            y = labels[t]
            z = -y * float(state.x[idx] @ vals)
            coef = -y * sigmoid(z)
            state.step(idx, vals, coef, lam)
        total = total_static_loss(stream, state.x, lam)
        if prev is not None and abs(total - prev) <= tol_rel * max(1.0, abs(prev)):
            return StaticResult(state.x, total, True, passes)
        prev = total
    return StaticResult(state.x, total, False, passes)
