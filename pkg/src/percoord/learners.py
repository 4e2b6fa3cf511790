"""Online learners over box feasible sets.

All gradient-descent learners share the same shape: they hold a current
iterate x (sparse, starting from 0 projected into the box), accept one
subgradient per round through update(), and clip every touched coordinate
back into its interval. They differ only in the step size:

  FixedStepOGD           eta constant,
  AdaptiveGlobalOGD      eta_t = scale * D / sqrt(2 * sum_s ||g_s||^2),
  PerCoordinateOGD       eta_{t,i} = scale * D_i / sqrt(sum_s g_{s,i}^2),
  StronglyConvexOGD      eta_{t,i} = 1 / (H_i * tau_i), tau_i = active rounds,

where D is the box's Euclidean diameter (or an online estimate over the
coordinates seen so far) and D_i the side length of coordinate i. Root-sum
accumulators include the current round's gradient; while an accumulator is
zero the learner does not move.

PassiveAggressive is the margin-based baseline: unconstrained, parameter
free, updates just far enough to satisfy the hinge constraint.

CompositeDecomposition reduces a joint convex stream to independent 1-D
subproblems via separable surrogate losses that lower-bound each round's
loss and are tight at the played point, so total regret is at most the sum
of the per-coordinate surrogate regrets.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Box, SparseVector

__all__ = [
    "ConfigurationError",
    "FixedStepOGD",
    "AdaptiveGlobalOGD",
    "PerCoordinateOGD",
    "StronglyConvexOGD",
    "PassiveAggressive",
    "Quadratic1D",
    "CompositeDecomposition",
    "per_coordinate_factory",
    "strongly_convex_factory",
]


class ConfigurationError(ValueError):
    """A learner was built or driven with unusable parameters."""


def _check_gradient(g):
    for i, v in g.items():
        if not math.isfinite(v):
            raise ValueError(f"non-finite gradient entry at coordinate {i}")


class _PointMixin:
    """Dict-backed iterate with read access helpers."""

    def margin(self, features):
        """x . features against the live iterate (no copy)."""
        x = self._x
        total = 0.0
        for i, v in features.items():
            xi = x.get(i)
            if xi is not None:
                total += xi * v
        return total

    def point_entry(self, i):
        return self._x.get(i, 0.0)

    def current_point(self):
        return SparseVector._wrap(dict(self._x))


class _ProjectedLearner(_PointMixin):
    """Shared box/state plumbing for the OGD family."""

    def __init__(self, box):
        if not isinstance(box, Box):
            raise ConfigurationError("a Box feasible set is required")
        self.box = box
        self.t = 0
        if box.contains_zero:
            self._x = {}
        else:
            # x_1 = P(0) is dense when the origin lies outside the box.
            self._x = {}
            for i in range(box.n):
                w = box.clip(i, 0.0)
                if w != 0.0:
                    self._x[i] = w

    def update(self, g):
        """Consume one round's subgradient."""
        _check_gradient(g)
        self.t += 1
        self._apply(g)

    def _clip_set(self, i, y):
        w = self.box.clip(i, y)
        if w == 0.0:
            self._x.pop(i, None)
        else:
            self._x[i] = w


class FixedStepOGD(_ProjectedLearner):
    """Projected gradient descent with a constant step size."""

    def __init__(self, box, eta):
        super().__init__(box)
        eta = float(eta)
        if not (eta > 0 and math.isfinite(eta)):
            raise ConfigurationError("eta must be positive and finite")
        self.eta = eta

    def _apply(self, g):
        x = self._x
        eta = self.eta
        for i, gi in g.items():
            self._clip_set(i, x.get(i, 0.0) - eta * gi)

    def describe(self):
        return {"kind": "fixed", "eta": self.eta, "box": self.box.describe()}


class AdaptiveGlobalOGD(_ProjectedLearner):
    """One shared step size, shrinking with the observed gradient mass.

    eta_t = scale * D / sqrt(2 * S_t) with S_t = sum_{s<=t} ||g_s||^2
    (current round included). D is the box's Euclidean diameter, or, with
    estimate_diameter=True, sqrt(sum of D_i^2 over coordinates seen so far)
    -- the streaming-features mode the experiment harness uses. While
    S_t = 0 the iterate does not move.
    """

    def __init__(self, box, scale=1.0, estimate_diameter=False):
        super().__init__(box)
        scale = float(scale)
        if not (scale > 0 and math.isfinite(scale)):
            raise ConfigurationError("scale must be positive and finite")
        self.scale = scale
        self.estimate_diameter = bool(estimate_diameter)
        self.grad_norm_sq_sum = 0.0
        self.last_rate = 0.0
        self._seen = set()
        self._seen_diam_sq = 0.0
        self._full_diameter = box.total_diameter()

    def _apply(self, g):
        x = self._x
        gn2 = 0.0
        if self.estimate_diameter:
            seen = self._seen
            for i, gi in g.items():
                gn2 += gi * gi
                if i not in seen:
                    seen.add(i)
                    d = self.box.diameter(i)
                    self._seen_diam_sq += d * d
            dhat = math.sqrt(self._seen_diam_sq)
        else:
            for gi in g._entries.values():
                gn2 += gi * gi
            dhat = self._full_diameter
        self.grad_norm_sq_sum += gn2
        s = self.grad_norm_sq_sum
        if s <= 0.0:
            return
        eta = self.scale * dhat / math.sqrt(2.0 * s)
        self.last_rate = eta
        for i, gi in g.items():
            self._clip_set(i, x.get(i, 0.0) - eta * gi)

    def describe(self):
        return {
            "kind": "global",
            "scale": self.scale,
            "estimate_diameter": self.estimate_diameter,
            "box": self.box.describe(),
        }


class PerCoordinateOGD(_ProjectedLearner):
    """Independent adaptive step size per coordinate.

    Each coordinate i with a nonzero gradient this round moves by
    eta_{t,i} = scale * D_i / sqrt(sum of g_{s,i}^2 over rounds so far)
    and clips back into [a_i, b_i]; all other coordinates (and their
    accumulators) are untouched.
    """

    def __init__(self, box, scale=1.0):
        super().__init__(box)
        scale = float(scale)
        if not (scale > 0 and math.isfinite(scale)):
            raise ConfigurationError("scale must be positive and finite")
        self.scale = scale
        self._accum = {}

    def _apply(self, g):
        x = self._x
        accum = self._accum
        box = self.box
        scale = self.scale
        for i, gi in g.items():
            s = accum.get(i, 0.0) + gi * gi
            accum[i] = s
            # gi != 0 (sparse vectors never store zeros), hence s > 0.
            eta = scale * box.diameter(i) / math.sqrt(s)
            self._clip_set(i, x.get(i, 0.0) - eta * gi)

    def gradient_sq_sums(self):
        """Copy of the per-coordinate squared-gradient accumulators."""
        return dict(self._accum)

    def rate(self, i):
        """Current step size for coordinate i (0.0 while unseen)."""
        s = self._accum.get(i, 0.0)
        if s <= 0.0:
            return 0.0
        return self.scale * self.box.diameter(i) / math.sqrt(s)

    def describe(self):
        return {"kind": "per-coord", "scale": self.scale, "box": self.box.describe()}


class StronglyConvexOGD(_ProjectedLearner):
    """Per-coordinate 1/(H_i * tau_i) schedule for curvature-rich streams.

    strength is a positive float (shared) or a mapping coordinate -> H_i.
    tau_i counts the rounds in which coordinate i received a nonzero
    gradient. A missing or non-positive strength for an active coordinate is
    a configuration error.
    """

    def __init__(self, box, strength):
        super().__init__(box)
        if isinstance(strength, (int, float)):
            strength = float(strength)
            if not (strength > 0 and math.isfinite(strength)):
                raise ConfigurationError("strength must be positive")
            self._strength = None
            self._shared_strength = strength
        else:
            self._strength = dict(strength)
            self._shared_strength = None
            for i, h in self._strength.items():
                if not (h > 0 and math.isfinite(h)):
                    raise ConfigurationError(f"strength for coordinate {i} must be positive")
        self._counts = {}

    def _strength_for(self, i):
        if self._strength is None:
            return self._shared_strength
        h = self._strength.get(i)
        if h is None:
            raise ConfigurationError(f"no curvature strength configured for coordinate {i}")
        return h

    def _apply(self, g):
        x = self._x
        counts = self._counts
        for i, gi in g.items():
            h = self._strength_for(i)
            tau = counts.get(i, 0) + 1
            counts[i] = tau
            eta = 1.0 / (h * tau)
            self._clip_set(i, x.get(i, 0.0) - eta * gi)

    def describe(self):
        return {"kind": "strongly-convex", "box": self.box.describe()}


class PassiveAggressive(_PointMixin):
    """Margin-based baseline: update just enough to reach hinge loss zero.

    Unconstrained (no feasible box) and parameter free. Given example
    (theta, y) with hinge loss L = max(0, 1 - y * (x . theta)) > 0, move
    x <- x + (L / ||theta||^2) * y * theta. Examples with a zero feature
    vector and positive loss cannot be fixed by any update; they are
    skipped and counted.
    """

    def __init__(self):
        self._x = {}
        self.t = 0
        self.skipped_zero_features = 0

    def update_example(self, example, margin=None):
        """Consume one example; returns the pre-update hinge loss."""
        theta = example.features
        y = example.label
        if margin is None:
            margin = self.margin(theta)
        loss = max(0.0, 1.0 - y * margin)
        self.t += 1
        if loss > 0.0:
            nsq = theta.norm_sq()
            if nsq == 0.0:
                self.skipped_zero_features += 1
                return loss
            tau = loss / nsq
            x = self._x
            step = tau * y
            for i, v in theta.items():
                w = x.get(i, 0.0) + step * v
                if w == 0.0:
                    x.pop(i, None)
                else:
                    x[i] = w
        return loss

    def describe(self):
        return {"kind": "pa"}


@dataclass(frozen=True)
class Quadratic1D:
    """l(y) = constant + slope * (y - center) + 0.5 * curvature * (y - center)^2."""

    constant: float
    slope: float
    curvature: float = 0.0
    center: float = 0.0

    def value(self, y):
        d = y - self.center
        return self.constant + self.slope * d + 0.5 * self.curvature * d * d

    def values(self, ys):
        d = np.asarray(ys, dtype=float) - self.center
        return self.constant + self.slope * d + 0.5 * self.curvature * d * d


def per_coordinate_factory(scale=1.0):
    """1-D learner factory running the adaptive per-coordinate schedule."""

    def make(interval_box, coord):
        return PerCoordinateOGD(interval_box, scale=scale)

    return make


def strongly_convex_factory(strengths):
    """1-D learner factory using the 1/(H tau) schedule per coordinate."""

    def make(interval_box, coord):
        return StronglyConvexOGD(interval_box, strengths[coord])

    return make


class CompositeDecomposition:
    """Coordinate decomposition of a joint convex stream.

    Runs one independent 1-D learner per coordinate. Each round, the played
    point x_t is assembled from the learners, the true loss f is evaluated
    and differentiated at x_t, and separable surrogates l_i are formed with

        sum_i l_i(x_{t,i}) = f(x_t)          (tight at the played point)
        sum_i l_i(y_i)    <= f(y) on the box (a lower bound),

    after which learner i receives l_i's derivative at x_{t,i} (equal to
    g_i in both modes). The surrogate history is kept per coordinate so
    per-coordinate regrets can be measured on them directly.

    mode "linear": l_i(y) = g_i * y; the linearization constant
    f(x_t) - g . x_t is routed to a pinned bias coordinate whose interval is
    exactly [1, 1] (required whenever the constant is nonzero).

    mode "curved": l_i(y) = f(x_t)/n + g_i*(y - x_{t,i})
    + 0.5*H_i*(y - x_{t,i})^2, valid when f is strongly convex with
    per-coordinate strengths H (all of which must be positive).
    """

    def __init__(self, box, factory, mode="linear", strengths=None, bias_coord=None):
        if mode not in ("linear", "curved"):
            raise ConfigurationError(f"unknown composite mode {mode!r}")
        if mode == "curved":
            if strengths is None:
                raise ConfigurationError("curved mode requires per-coordinate strengths")
            strengths = [float(h) for h in strengths]
            if len(strengths) != box.n:
                raise ConfigurationError("need one strength per coordinate")
            for i, h in enumerate(strengths):
                if not (h > 0 and math.isfinite(h)):
                    raise ConfigurationError(f"strength for coordinate {i} must be positive")
        if bias_coord is not None:
            if not (box.low(bias_coord) == box.high(bias_coord) == 1.0):
                raise ConfigurationError("bias coordinate must be pinned to [1, 1]")
        self.box = box
        self.mode = mode
        self.strengths = strengths
        self.bias_coord = bias_coord
        self.t = 0
        self._learners = []
        for i in range(box.n):
            interval = Box(np.array([box.low(i)]), np.array([box.high(i)]))
            self._learners.append(factory(interval, i))
        self._surrogates = [[] for _ in range(box.n)]
        self.true_losses = []
        self._played = []

    def play(self):
        """Current composite point (coordinate i from learner i)."""
        out = {}
        for i, learner in enumerate(self._learners):
            v = learner.point_entry(0)
            if v != 0.0:
                out[i] = v
        return SparseVector._wrap(out)

    def observe(self, f):
        """Consume one round's loss; returns f at the played point."""
        x = self.play()
        fx = f.value(x)
        g = f.subgradient(x)
        n = self.box.n
        if self.mode == "linear":
            const = fx - sum(gi * x.get(i) for i, gi in g.items())
            for i in range(n):
                if i == self.bias_coord:
                    continue
                self._surrogates[i].append(Quadratic1D(0.0, g.get(i)))
            if self.bias_coord is not None:
                # l_bias(y) = (g_bias + const) * y, evaluated at the pinned 1.
                self._surrogates[self.bias_coord].append(
                    Quadratic1D(0.0, g.get(self.bias_coord) + const)
                )
            elif const != 0.0:
                raise ConfigurationError(
                    "nonzero linearization constant needs a bias coordinate pinned to [1, 1]"
                )
        else:
            share = fx / n
            for i in range(n):
                self._surrogates[i].append(
                    Quadratic1D(share, g.get(i), self.strengths[i], x.get(i))
                )
        bias = self.bias_coord if self.mode == "linear" else None
        for i, gi in g.items():
            if i == bias:
                continue
            self._learners[i].update(SparseVector._wrap({0: gi}))
        if bias is not None:
            # The bias learner is driven by its surrogate's slope; projection
            # pins the iterate at 1 regardless.
            s = self._surrogates[bias][-1].slope
            if s != 0.0:
                self._learners[bias].update(SparseVector._wrap({0: s}))
        self.true_losses.append(fx)
        self._played.append(x)
        self.t += 1
        return fx

    def surrogates(self, i):
        return list(self._surrogates[i])

    def played_points(self):
        return list(self._played)

    def surrogate_total_at_played(self, t):
        """sum_i l_{t,i}(x_{t,i}) -- equals the true loss of round t."""
        x = self._played[t]
        return sum(self._surrogates[i][t].value(x.get(i)) for i in range(self.box.n))

    def surrogate_total_at(self, t, point):
        """sum_i l_{t,i}(point_i) -- lower-bounds the true loss at point."""
        return sum(self._surrogates[i][t].value(point.get(i)) for i in range(self.box.n))

    def coordinate_regret(self, i, grid_points=100_000):
        """Measured 1-D regret of learner i on its surrogate stream.

        The comparator is an exhaustive grid over [a_i, b_i] (a degenerate
        interval contributes a single point, hence regret 0 for constants).
        """
        surs = self._surrogates[i]
        if not surs:
            return 0.0
        lo, hi = self.box.low(i), self.box.high(i)
        if lo == hi:
            grid = np.array([lo])
        else:
            grid = np.linspace(lo, hi, grid_points)
        total = np.zeros_like(grid)
        for s in surs:
            total += s.values(grid)
        incurred = sum(s.value(x.get(i)) for s, x in zip(surs, self._played))
        return incurred - float(total.min())
