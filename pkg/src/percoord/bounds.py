"""Regret accounting and the analytical guarantees learners are audited against.

The quantities, for a gradient sequence g_1..g_T over a box with Euclidean
diameter D and per-coordinate side lengths D_i:

  rate_sequence_bound      B(eta_1..eta_T) = D^2/(2 eta_T)
                           + (1/2) sum_t ||g_t||^2 eta_t, valid for any
                           positive non-increasing rate sequence;
  best_constant_rate_bound R_min = D * sqrt(sum_t ||g_t||^2), the minimum of
                           B over constant rates, and sqrt(2)*R_min, the
                           value the adaptive global schedule guarantees
                           without knowing the gradients in advance;
  per_coordinate_bound     sum_i D_i * sqrt(2 sum_t g_{t,i}^2), the analogous
                           guarantee of the per-coordinate schedule;
  dominance_check          the Cauchy-Schwarz fact that the per-coordinate
                           bound never exceeds the global one;
  prefix_sqrt_inequality   sum_i x_i / sqrt(sum_{j<=i} x_j) <= 2 sqrt(sum x),
                           the elementary inequality behind all of the above.

RegretLedger collects one run's per-round losses (and optionally gradients)
and resolves them against a comparator; static_optimum produces comparators
by closed form (linear streams), by iterated per-coordinate descent passes,
or by exhaustive 1-D grid.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SparseVector, project
from .learners import PerCoordinateOGD
from .losses import LinearLoss

__all__ = [
    "ContractViolation",
    "rate_sequence_bound",
    "best_constant_rate_bound",
    "per_coordinate_bound",
    "dominance_check",
    "prefix_sqrt_inequality",
    "golden_section_minimize",
    "StaticOptimum",
    "static_optimum",
    "RegretLedger",
    "box_grid_points",
]


class ContractViolation(ValueError):
    """Inputs outside the domain a bound is valid for."""


def rate_sequence_bound(diameter, rates, grad_norms_sq):
    """B = D^2/(2 eta_T) + (1/2) sum_t ||g_t||^2 eta_t.

    Requires a positive, non-increasing rate sequence of the same length as
    the gradient-norm sequence; anything else is a ContractViolation since
    the guarantee does not hold there.
    """
    rates = [float(r) for r in rates]
    grad_norms_sq = [float(v) for v in grad_norms_sq]
    if len(rates) != len(grad_norms_sq) or not rates:
        raise ContractViolation("need equal-length, nonempty rate and gradient sequences")
    prev = math.inf
    for r in rates:
        if not (r > 0 and math.isfinite(r)):
            raise ContractViolation("rates must be positive and finite")
        if r > prev:
            raise ContractViolation("rates must be non-increasing")
        prev = r
    term = 0.0
    for r, gn2 in zip(rates, grad_norms_sq):
        if gn2 < 0:
            raise ContractViolation("squared gradient norms must be non-negative")
        term += gn2 * r
    return diameter * diameter / (2.0 * rates[-1]) + 0.5 * term


def best_constant_rate_bound(diameter, grad_norms_sq):
    """(R_min, adaptive) for a given gradient-norm-squared sequence.

    R_min = D * sqrt(sum ||g_t||^2) is the best value of the rate-sequence
    bound over constant rates chosen in hindsight; adaptive = sqrt(2) * R_min
    is what the online schedule eta_t = D / sqrt(2 S_t) achieves.
    """
    s = 0.0
    for v in grad_norms_sq:
        if v < 0:
            raise ContractViolation("squared gradient norms must be non-negative")
        s += v
    r_min = diameter * math.sqrt(s)
    return r_min, math.sqrt(2.0) * r_min


def _per_coordinate_sq_sums(gradients):
    sums = {}
    for g in gradients:
        for i, v in g.items():
            sums[i] = sums.get(i, 0.0) + v * v
    return sums


def per_coordinate_bound(box, gradients):
    """(total, per-coordinate terms) of sum_i D_i sqrt(2 sum_t g_{t,i}^2)."""
    sums = _per_coordinate_sq_sums(gradients)
    terms = {}
    total = 0.0
    for i, s in sums.items():
        term = box.diameter(i) * math.sqrt(2.0 * s)
        terms[i] = term
        total += term
    return total, terms


def dominance_check(box, gradients, rel_slack=1e-9):
    """Per-coordinate bound vs global bound: (lhs, rhs, lhs <= rhs).

    lhs = sum_i D_i sqrt(2 sum_t g_{t,i}^2), rhs = D sqrt(2 sum_t ||g_t||^2)
    with D = sqrt(sum_i D_i^2). Cauchy-Schwarz makes lhs <= rhs always; the
    check allows rel_slack of rounding.
    """
    lhs, _ = per_coordinate_bound(box, gradients)
    total_sq = 0.0
    for g in gradients:
        total_sq += g.norm_sq()
    rhs = box.total_diameter() * math.sqrt(2.0 * total_sq)
    return lhs, rhs, lhs <= rhs * (1.0 + rel_slack) + 1e-300


def prefix_sqrt_inequality(values):
    """(lhs, rhs) of sum_i x_i/sqrt(sum_{j<=i} x_j) <= 2 sqrt(sum_i x_i).

    Terms whose running sum is still zero contribute 0 (their numerator is
    zero too). Negative inputs are rejected.
    """
    xs = np.asarray(values, dtype=float)
    if xs.ndim != 1:
        raise ValueError("expected a 1-D sequence")
    if np.any(xs < 0):
        raise ContractViolation("inputs must be non-negative")
    if xs.size == 0:
        return 0.0, 0.0
    prefixes = np.cumsum(xs)
    mask = prefixes > 0
    lhs = float(np.sum(xs[mask] / np.sqrt(prefixes[mask])))
    rhs = 2.0 * math.sqrt(float(prefixes[-1]))
    return lhs, rhs


def golden_section_minimize(fn, lo, hi, iters=200):
    """Golden-section search for the minimum of a unimodal fn on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = (a + b) / 2.0
    return x, fn(x)


@dataclass
class StaticOptimum:
    """Result of a comparator computation."""

    point: SparseVector
    loss: float
    converged: bool
    mode: str
    passes: int = 0


def static_optimum(losses, box, mode, *, grid_points=100_000, tol_rel=1e-6,
                   max_passes=200, scale=1.0):
    """Best fixed point in the box for the summed loss stream.

    mode "closed-form": linear losses only; each coordinate goes to the
    bound opposing its summed gradient (lower bound on ties).

    mode "iterative": per-coordinate adaptive descent on the stream's
    summed subgradient, one step per pass, until the total static loss
    moves by less than tol_rel (relatively) between passes, or max_passes
    is hit; the converged flag reports which. Callers must surface that
    flag.

    mode "grid": exhaustive 1-D grid (grid_points points); the stream must
    touch a single coordinate.
    """
    losses = list(losses)
    if not losses:
        raise ValueError("empty loss stream")
    if mode == "closed-form":
        return _closed_form_optimum(losses, box)
    if mode == "iterative":
        return _iterative_optimum(losses, box, tol_rel, max_passes, scale)
    if mode == "grid":
        return _grid_optimum(losses, box, grid_points)
    raise ValueError(f"unknown mode {mode!r}")


def _closed_form_optimum(losses, box):
    sums = {}
    for f in losses:
        if not isinstance(f, LinearLoss):
            raise ContractViolation("closed-form mode requires linear losses")
        for i, gi in f.gradient.items():
            sums[i] = sums.get(i, 0.0) + gi
    entries = {}
    total = 0.0
    for i, s in sums.items():
        if s > 0:
            xi = box.low(i)
        elif s < 0:
            xi = box.high(i)
        else:
            xi = box.low(i)  # exact cancellation: settle on the lower face
        total += s * xi
        if xi != 0.0:
            entries[i] = xi
    # untouched coordinates cost nothing; projection keeps the point feasible
    point = project(SparseVector._wrap(entries), box)
    return StaticOptimum(point, total, True, "closed-form")


def _iterative_optimum(losses, box, tol_rel, max_passes, scale):
    # one batch step per pass, not a sweep of per-example steps: feeding the
    # summed subgradient keeps the accumulated squared norms self-limiting
    # on smooth objectives (gradients vanish near an interior optimum), so
    # the step size stabilizes and the iterate settles instead of orbiting
    learner = PerCoordinateOGD(box, scale=scale)
    x = learner.current_point()
    prev = None
    total = math.inf
    passes = 0
    for passes in range(1, max_passes + 1):
        gsum = {}
        for f in losses:
            for i, v in f.subgradient(x).items():
                gsum[i] = gsum.get(i, 0.0) + v
        learner.update(SparseVector._wrap({i: v for i, v in gsum.items() if v != 0.0}))
        x = learner.current_point()
        total = sum(f.value(x) for f in losses)
        if prev is not None and abs(total - prev) <= tol_rel * max(1.0, abs(prev)):
            return StaticOptimum(x, total, True, "iterative", passes)
        prev = total
    return StaticOptimum(x, total, False, "iterative", passes)


def _grid_optimum(losses, box, grid_points):
    active = set()
    for f in losses:
        active |= f.active_coordinates()
    if len(active) > 1:
        raise ContractViolation("grid mode needs a stream confined to one coordinate")
    coord = active.pop() if active else 0
    xs = np.linspace(box.low(coord), box.high(coord), int(grid_points))
    total = np.zeros_like(xs)
    for f in losses:
        total += f.values_on_axis(coord, xs)
    k = int(np.argmin(total))
    point = SparseVector({coord: xs[k]})
    return StaticOptimum(point, float(total[k]), True, "grid")


def box_grid_points(box, total_points=100_000):
    """Lattice of ~total_points points covering the box, as an (m, n) array."""
    n = box.n
    per_dim = max(2, int(round(total_points ** (1.0 / n))))
    axes = [np.linspace(box.low(i), box.high(i), per_dim) for i in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class RegretLedger:
    """Per-round record for one algorithm run.

    Collects losses (and, when log_gradients, the per-round subgradients for
    bound evaluation), then resolves against a comparator loss -- or is
    explicitly marked as having none (pure progressive-validation runs).
    Emitting results from an unresolved ledger is refused downstream.
    """

    def __init__(self, algorithm="", dataset="", log_gradients=True):
        self.algorithm = algorithm
        self.dataset = dataset
        self.losses = []
        self.gradients = [] if log_gradients else None
        self.cumulative_loss = 0.0
        self.comparator_loss = None
        self.comparator_converged = None
        self._no_comparator = False
        self._total_rounds = 0
        self.bound_values = {}
        self.avg_hinge_loss = None
        self.mistake_fraction = None
        self.wall_ms = None
        self.config = {}

    def record(self, loss, gradient=None):
        loss = float(loss)
        self.losses.append(loss)
        self.cumulative_loss += loss
        if self.gradients is not None:
            self.gradients.append(gradient if gradient is not None else SparseVector._wrap({}))

    def set_totals(self, cumulative_loss, rounds):
        """Aggregate-only recording for runs that do not keep per-round losses."""
        if self.losses:
            raise ValueError("per-round losses were already recorded")
        self.cumulative_loss = float(cumulative_loss)
        self._total_rounds = int(rounds)

    @property
    def rounds(self):
        return self._total_rounds if self._total_rounds else len(self.losses)

    def resolve(self, comparator_loss, converged=True):
        self.comparator_loss = float(comparator_loss)
        self.comparator_converged = bool(converged)
        self._no_comparator = False

    def mark_no_comparator(self):
        self._no_comparator = True
        self.comparator_loss = None
        self.comparator_converged = None

    @property
    def resolved(self):
        return self._no_comparator or self.comparator_loss is not None

    @property
    def regret(self):
        if self.comparator_loss is None:
            return None
        return self.cumulative_loss - self.comparator_loss

    @property
    def regret_per_round(self):
        r = self.regret
        if r is None or not self.rounds:
            return None
        return r / self.rounds

    def compute_bounds(self, box):
        """Fill bound_values from the gradient log (requires log_gradients)."""
        if self.gradients is None:
            raise ValueError("gradient logging was disabled for this ledger")
        norms_sq = [g.norm_sq() for g in self.gradients]
        r_min, adaptive = best_constant_rate_bound(box.total_diameter(), norms_sq)
        pc_total, _ = per_coordinate_bound(box, self.gradients)
        self.bound_values = {
            "best_constant": r_min,
            "global_adaptive": adaptive,
            "per_coordinate": pc_total,
        }
        return self.bound_values
